"""Provider-style schedule export: replay cmd_def timings over a circuit.

Gates start as soon as their operand qubits are free, rounded up to the
backend granularity; each gate's pulse sequence is shifted by its start.
This reproduces the pulse timeline the provider scheduler would emit, in the
sched.json interchange format.
"""

from __future__ import annotations

from .convert import _channel_dict, _shape_dict, edge_order_from
from .snapshot import BackendSnapshot, ExportError


def _round_up(value: int, granularity: int) -> int:
    return -(-value // granularity) * granularity


def schedule_dict(num_qubits: int, ops: list, snapshot: BackendSnapshot) -> dict:
    """Lower parsed circuit ops to the sched.json structure."""
    if num_qubits > snapshot.n_qubits:
        raise ExportError(
            f"circuit needs {num_qubits} qubits; {snapshot.backend_name} has {snapshot.n_qubits}"
        )
    edge_order = edge_order_from(snapshot)
    g = snapshot.granularity
    ready = [0] * snapshot.n_qubits
    items = []
    gates = []

    for idx, (gate, qubits, _angle) in enumerate(ops):
        if gate == "barrier":
            sync = qubits or tuple(range(snapshot.n_qubits))
            t = _round_up(max(ready[q] for q in sync), g)
            for q in sync:
                ready[q] = t
            gates.append({"gate": "barrier", "qubits": list(sync), "start": t, "duration": 0})
            continue
        if gate == "measure":
            gates.append(
                {"gate": "measure", "qubits": list(qubits), "start": ready[qubits[0]], "duration": 0}
            )
            continue
        if gate == "rz":
            gates.append(
                {"gate": "rz", "qubits": list(qubits), "start": ready[qubits[0]], "duration": 0}
            )
            continue

        cmd = snapshot.entry("id" if gate == "i" else gate, qubits)
        if cmd is None and gate == "i":
            cmd = snapshot.entry("i", qubits)
        if cmd is None:
            raise ExportError(f"no calibration for {gate} on {tuple(qubits)}")
        start = _round_up(max(ready[q] for q in qubits), g)
        duration = snapshot.gate_duration(cmd["name"], qubits)
        for inst in cmd["sequence"]:
            if inst["name"] == "delay":
                continue
            items.append(
                {
                    "channel": _channel_dict(inst["ch"], snapshot, edge_order),
                    "start": start + inst["t0"],
                    "shape": _shape_dict(inst),
                    "gate_idx": idx,
                }
            )
        for q in qubits:
            ready[q] = start + duration
        gates.append(
            {"gate": gate, "qubits": list(qubits), "start": start, "duration": duration}
        )

    return {"device": snapshot.backend_name, "items": items, "gates": gates}
