"""Export CLI: backend calibrations and circuit schedules to interchange JSON.

``export-backend <name> --out dir/`` writes device.json + library.json;
``export-schedule --circuit c.qc --backend <name> --out dir/`` writes
sched.json. Offline runs read a frozen --snapshot file; live runs need the
provider SDK and its standard credential environment variable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .convert import device_dict, library_dict
from .qc_format import parse_qc
from .schedule_export import schedule_dict
from .snapshot import ExportError, load_or_fetch


def _write(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _cmd_export_backend(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    snapshot = load_or_fetch(args.backend, args.snapshot)
    _write(out / "device.json", device_dict(snapshot))
    _write(out / "library.json", library_dict(snapshot))
    return 0


def _cmd_export_schedule(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    snapshot = load_or_fetch(args.backend, args.snapshot)
    circuit_path = Path(args.circuit)
    if not circuit_path.exists():
        raise ExportError(f"circuit file {circuit_path} does not exist")
    num_qubits, ops = parse_qc(circuit_path.read_text())
    _write(out / "sched.json", schedule_dict(num_qubits, ops, snapshot))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsca-export", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("export-backend", help="device.json + library.json from a backend")
    p.add_argument("backend", help="backend name")
    p.add_argument("--snapshot", help="frozen snapshot JSON (offline mode)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export_backend)

    p = sub.add_parser("export-schedule", help="sched.json for a circuit on a backend")
    p.add_argument("--circuit", required=True, help=".qc circuit file")
    p.add_argument("--backend", required=True)
    p.add_argument("--snapshot", help="frozen snapshot JSON (offline mode)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export_schedule)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ExportError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
