"""ASAP lowering of physical circuits to timed pulses on channels.

Each qubit carries a ready-time; a gate starts at the max ready-time of its
operands rounded up to the device granularity. X/SX advance one qubit by
their pulse span, cx occupies both operands for the full entry span, rz takes
zero time, the identity advances by its delay, and barriers synchronize the
listed (or all) qubits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .circuit import Circuit
from .device import (
    BasisPulseLibrary,
    Channel,
    Device,
    PulseShape,
    lookup_basis_pulses,
)
from .errors import UnsupportedGateError


@dataclass(frozen=True)
class ScheduledPulse:
    """A pulse instance: absolute start in samples plus its source gate index."""

    channel: Channel
    start: int
    shape: PulseShape
    gate_index: int

    def to_dict(self) -> dict:
        return {
            "channel": self.channel.to_dict(),
            "start": self.start,
            "shape": self.shape.to_dict(),
            "gate_idx": self.gate_index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScheduledPulse":
        return cls(
            Channel.from_dict(d["channel"]),
            d["start"],
            PulseShape.from_dict(d["shape"]),
            d["gate_idx"],
        )


@dataclass(frozen=True)
class GateRecord:
    """Per-gate timing: (gate, qubits, start, duration in samples)."""

    gate: str
    qubits: tuple[int, ...]
    start: int
    duration: int

    def to_dict(self) -> dict:
        return {
            "gate": self.gate,
            "qubits": list(self.qubits),
            "start": self.start,
            "duration": self.duration,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GateRecord":
        return cls(d["gate"], tuple(d["qubits"]), d["start"], d["duration"])


@dataclass(frozen=True)
class Schedule:
    """The pulse-level circuit: timed pulse items plus per-gate records."""

    device: Device
    items: tuple[ScheduledPulse, ...]
    gates: tuple[GateRecord, ...]

    def items_on(self, channel: Channel) -> tuple[ScheduledPulse, ...]:
        return tuple(it for it in self.items if it.channel == channel)

    def to_dict(self) -> dict:
        return {
            "device": self.device.name,
            "items": [it.to_dict() for it in self.items],
            "gates": [g.to_dict() for g in self.gates],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def from_dict(cls, d: dict, device: Device) -> "Schedule":
        if d["device"] != device.name:
            raise ValueError(f"schedule is for {d['device']!r}, not {device.name!r}")
        return cls(
            device=device,
            items=tuple(ScheduledPulse.from_dict(it) for it in d["items"]),
            gates=tuple(GateRecord.from_dict(g) for g in d["gates"]),
        )

    @classmethod
    def load(cls, path, device: Device) -> "Schedule":
        return cls.from_dict(json.loads(Path(path).read_text()), device)


def _round_up(value: int, granularity: int) -> int:
    return -(-value // granularity) * granularity


def schedule(c: Circuit, lib: BasisPulseLibrary, device: Device) -> Schedule:
    """Lower a layout-applied, connectivity-legal circuit to a Schedule."""
    if c.num_qubits > device.num_qubits:
        raise UnsupportedGateError(
            f"circuit has {c.num_qubits} qubits but {device.name} has {device.num_qubits}"
        )
    ready = [0] * device.num_qubits
    items: list[ScheduledPulse] = []
    records: list[GateRecord] = []

    for idx, op in enumerate(c.ops):
        if op.gate == "barrier":
            qubits = op.qubits or tuple(range(device.num_qubits))
            t = _round_up(max(ready[q] for q in qubits), device.granularity)
            for q in qubits:
                ready[q] = t
            records.append(GateRecord("barrier", qubits, t, 0))
            continue
        if op.gate == "measure":
            # measure channels are out of scope: recorded, no pulses, no time
            q = op.qubits[0]
            records.append(GateRecord("measure", op.qubits, ready[q], 0))
            continue
        if op.gate == "rz":
            q = op.qubits[0]
            records.append(GateRecord("rz", op.qubits, ready[q], 0))
            continue

        entry = lookup_basis_pulses(lib, op.gate, op.qubits)
        start = _round_up(max(ready[q] for q in op.qubits), device.granularity)
        duration = entry.span
        for p in entry.pulses:
            items.append(ScheduledPulse(p.channel, start + p.offset, p.shape, idx))
        for q in op.qubits:
            ready[q] = start + duration
        records.append(GateRecord(op.gate, op.qubits, start, duration))

    return Schedule(device=device, items=tuple(items), gates=tuple(records))


def schedule_span(s: Schedule) -> int:
    """Samples from circuit start to the end of the last pulse (0 if pulse-free)."""
    if not s.items:
        return 0
    return max(it.start + it.shape.duration for it in s.items)
