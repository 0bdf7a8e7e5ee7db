"""Backend snapshots: frozen JSON mirrors of provider configuration/defaults.

A snapshot captures what the provider SDK reports for one backend: qubit
count, coupling map, timing constants, and the calibrated pulse sequence of
every basis gate (cmd_def). Snapshots are cached to disk so everything
downstream runs offline; the live path needs the provider SDK plus the
standard credential environment variable.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

CREDENTIAL_ENV = "QISKIT_IBM_TOKEN"

SUPPORTED_GATES = ("id", "i", "rz", "sx", "x", "cx")
SUPPORTED_SHAPES = ("drag", "gaussian_square")


class ExportError(Exception):
    pass


@dataclass
class BackendSnapshot:
    """Provider-side view of one backend, as loaded from a snapshot file."""

    backend_name: str
    n_qubits: int
    coupling_map: list
    dt: float
    granularity: int
    cmd_def: list
    control_channels: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "BackendSnapshot":
        try:
            return cls(
                backend_name=d["backend_name"],
                n_qubits=d["n_qubits"],
                coupling_map=[list(e) for e in d["coupling_map"]],
                dt=d["dt"],
                granularity=d.get("timing_constraints", {}).get("granularity", 1),
                cmd_def=d["cmd_def"],
                control_channels={k: v for k, v in d.get("control_channels", {}).items()},
            )
        except KeyError as missing:
            raise ExportError(f"snapshot is missing field {missing}") from None

    @classmethod
    def load(cls, path) -> "BackendSnapshot":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def entry(self, gate: str, qubits) -> dict | None:
        qubits = list(qubits)
        for cmd in self.cmd_def:
            if cmd["name"] == gate and list(cmd["qubits"]) == qubits:
                return cmd
        return None

    def gate_duration(self, gate: str, qubits) -> int:
        cmd = self.entry(gate, qubits)
        if cmd is None:
            raise ExportError(f"no calibration for {gate} on {tuple(qubits)}")
        dur = 0
        for inst in cmd["sequence"]:
            if inst["name"] == "delay":
                dur = max(dur, inst["t0"] + inst["duration"])
            elif inst["name"] == "parametric_pulse":
                dur = max(dur, inst["t0"] + inst["parameters"]["duration"])
        return dur


def fetch_live_snapshot(backend_name: str) -> BackendSnapshot:
    """Pull a snapshot from the provider SDK (needs credentials installed)."""
    if not os.environ.get(CREDENTIAL_ENV):
        raise ExportError(
            f"no {CREDENTIAL_ENV} in the environment; pass --snapshot for offline use"
        )
    try:
        from qiskit_ibm_runtime import QiskitRuntimeService  # noqa: PLC0415
    except ImportError:
        raise ExportError(
            "provider SDK (qiskit-ibm-runtime) is not installed; "
            "pass --snapshot for offline use"
        ) from None
    service = QiskitRuntimeService()
    backend = service.backend(backend_name)
    cfg = backend.configuration().to_dict()
    defaults = backend.defaults().to_dict()
    control_channels = {
        ",".join(str(q) for q in qubits): chans[0].index
        for qubits, chans in backend.configuration().control_channels.items()
    }
    return BackendSnapshot.from_dict(
        {
            "backend_name": backend_name,
            "n_qubits": cfg["n_qubits"],
            "coupling_map": cfg["coupling_map"],
            "dt": cfg["dt"],
            "timing_constraints": cfg.get("timing_constraints", {"granularity": 1}),
            "cmd_def": defaults["cmd_def"],
            "control_channels": control_channels,
        }
    )


def load_or_fetch(backend_name: str, snapshot_path=None) -> BackendSnapshot:
    if snapshot_path is not None:
        snap = BackendSnapshot.load(snapshot_path)
        if snap.backend_name != backend_name:
            raise ExportError(
                f"snapshot is for {snap.backend_name!r}, not {backend_name!r}"
            )
        return snap
    return fetch_live_snapshot(backend_name)
