import json

import pytest

from frozen_backend import build_frozen_snapshot


@pytest.fixture(scope="session")
def snapshot_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("snap") / "frozen_h7.json"
    path.write_text(json.dumps(build_frozen_snapshot(), indent=2) + "\n")
    return path
