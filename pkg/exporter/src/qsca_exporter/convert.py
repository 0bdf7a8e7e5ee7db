"""Snapshot to interchange-JSON conversion (device.json / library.json)."""

from __future__ import annotations

import sys

from .snapshot import SUPPORTED_GATES, SUPPORTED_SHAPES, BackendSnapshot, ExportError


def _channel_dict(name: str, snapshot: BackendSnapshot, edge_order: list) -> dict:
    """Map a provider channel name (d<k>/u<k>) to the interchange channel."""
    kind, idx = name[0], name[1:]
    if kind == "d":
        return {"kind": "drive", "index": int(idx)}
    if kind == "u":
        u_index = int(idx)
        if u_index >= len(edge_order):
            raise ExportError(f"control channel {name} has no coupling assigned")
        return {"kind": "control", "index": u_index}
    raise ExportError(f"unsupported channel {name!r} (measure/acquire are out of scope)")


def _shape_dict(inst: dict) -> dict:
    shape = inst["pulse_shape"]
    if shape not in SUPPORTED_SHAPES:
        raise ExportError(f"unsupported pulse shape {shape!r}")
    p = inst["parameters"]
    amp = p["amp"]
    if isinstance(amp, (int, float)):
        amp = [float(amp), 0.0]
    out = {
        "variant": shape,
        "duration": p["duration"],
        "amp": [float(amp[0]), float(amp[1])],
        "sigma": float(p["sigma"]),
    }
    if shape == "drag":
        out["beta"] = float(p["beta"])
    else:
        out["width"] = p["width"]
    return out


def edge_order_from(snapshot: BackendSnapshot) -> list:
    """Directed edges ordered by their control-channel (u) index.

    Falls back to coupling-map order when the snapshot carries no explicit
    control-channel table.
    """
    if snapshot.control_channels:
        by_u = sorted(
            ((u, tuple(int(q) for q in key.split(","))) for key, u in snapshot.control_channels.items()),
        )
        expected = list(range(len(by_u)))
        if [u for u, _ in by_u] != expected:
            raise ExportError("control channel indices are not contiguous from 0")
        return [edge for _, edge in by_u]
    return [tuple(e) for e in snapshot.coupling_map]


def device_dict(snapshot: BackendSnapshot) -> dict:
    return {
        "name": snapshot.backend_name,
        "num_qubits": snapshot.n_qubits,
        "granularity": snapshot.granularity,
        "dt": snapshot.dt,
        "edges": [list(e) for e in edge_order_from(snapshot)],
    }


def library_dict(snapshot: BackendSnapshot) -> dict:
    """Interchange library from the snapshot's cmd_def.

    Gates outside the supported basis are rejected by name. The x/sx
    half-amplitude convention is reported when it fails to hold, but never
    enforced: imported calibrations are data.
    """
    edge_order = edge_order_from(snapshot)
    entries = []
    amp_by_gate = {}
    for cmd in snapshot.cmd_def:
        gate = cmd["name"]
        if gate not in SUPPORTED_GATES:
            raise ExportError(f"unsupported gate {gate!r} in cmd_def (basis is i/rz/sx/x/cx)")
        qubits = list(cmd["qubits"])
        pulses = []
        delay = None
        for inst in cmd["sequence"]:
            if inst["name"] == "delay":
                delay = max(delay or 0, inst["t0"] + inst["duration"])
                continue
            if inst["name"] != "parametric_pulse":
                raise ExportError(
                    f"unsupported instruction {inst['name']!r} in {gate}{tuple(qubits)}"
                )
            pulses.append(
                {
                    "channel": _channel_dict(inst["ch"], snapshot, edge_order),
                    "offset": inst["t0"],
                    "shape": _shape_dict(inst),
                }
            )
        entry = {"gate": "i" if gate == "id" else gate, "qubits": qubits, "pulses": pulses}
        if delay is not None:
            entry["delay"] = delay
        entries.append(entry)
        if gate in ("x", "sx") and pulses:
            amp = pulses[0]["shape"]["amp"]
            amp_by_gate[(gate, qubits[0])] = (amp[0] ** 2 + amp[1] ** 2) ** 0.5

    for q in range(snapshot.n_qubits):
        ax, asx = amp_by_gate.get(("x", q)), amp_by_gate.get(("sx", q))
        if ax and asx and abs(2 * asx - ax) > 1e-9 * max(ax, 1e-12):
            sys.stderr.write(
                f"note: qubit {q}: |sx amp| {asx!r} is not half of |x amp| {ax!r} "
                "(recorded as observed)\n"
            )

    return {"entries": entries}
