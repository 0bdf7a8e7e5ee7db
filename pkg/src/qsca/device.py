"""Device model: channels, pulse shapes, and basis pulse libraries.

A device is a set of qubits with directed couplings. Every qubit owns a drive
channel and every directed coupling owns a control channel. Basis gates carry
their calibrated pulses in a library keyed by (gate name, qubit tuple); the
samplers below turn shape parameters into complex amplitude series.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import (
    ChannelError,
    InvalidShapeError,
    ShapeMismatchError,
    UnsupportedGateError,
)

DRIVE = "drive"
CONTROL = "control"

DRAG = "drag"
GAUSSIAN_SQUARE = "gaussian_square"

#: gates a library can describe; rz and i are pulse-free
BASIS_GATES = ("i", "rz", "sx", "x", "cx")


@dataclass(frozen=True, order=True)
class Channel:
    """A logical wire: drive channels address qubits, control channels address
    directed coupling edges (by index into the device edge list)."""

    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in (DRIVE, CONTROL):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.index < 0:
            raise ValueError("channel index must be >= 0")

    def __str__(self) -> str:
        return f"{self.kind}/{self.index}"

    @classmethod
    def parse(cls, text: str) -> "Channel":
        kind, _, idx = text.partition("/")
        return cls(kind, int(idx))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "index": self.index}

    @classmethod
    def from_dict(cls, d: dict) -> "Channel":
        return cls(d["kind"], d["index"])


@dataclass(frozen=True)
class Device:
    """Qubit count, directed coupling edges, and timing constants.

    ``granularity`` is the required divisor (in samples) of every pulse start
    time; ``dt`` is the sample period in seconds.
    """

    name: str
    num_qubits: int
    edges: tuple[tuple[int, int], ...]
    granularity: int = 16
    dt: float = 2.2222e-10

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        if self.granularity < 1:
            raise ValueError("granularity must be >= 1")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        edges = tuple((int(c), int(t)) for c, t in self.edges)
        object.__setattr__(self, "edges", edges)
        seen = set()
        for c, t in edges:
            if not (0 <= c < self.num_qubits and 0 <= t < self.num_qubits):
                raise ValueError(f"edge ({c},{t}) references a missing qubit")
            if c == t:
                raise ValueError(f"self-edge ({c},{t})")
            if (c, t) in seen:
                raise ValueError(f"duplicate directed edge ({c},{t})")
            seen.add((c, t))
        object.__setattr__(self, "_edge_index", {e: i for i, e in enumerate(edges)})

    def drive(self, qubit: int) -> Channel:
        if not 0 <= qubit < self.num_qubits:
            raise ChannelError(f"no qubit {qubit} on {self.name}")
        return Channel(DRIVE, qubit)

    def control(self, edge: tuple[int, int]) -> Channel:
        idx = self._edge_index.get(tuple(edge))
        if idx is None:
            raise ChannelError(f"no directed edge {edge} on {self.name}")
        return Channel(CONTROL, idx)

    def edge_index(self, edge: tuple[int, int]) -> int | None:
        return self._edge_index.get(tuple(edge))

    def channels(self) -> tuple[Channel, ...]:
        drives = tuple(Channel(DRIVE, q) for q in range(self.num_qubits))
        controls = tuple(Channel(CONTROL, i) for i in range(len(self.edges)))
        return drives + controls

    def has_channel(self, ch: Channel) -> bool:
        if ch.kind == DRIVE:
            return 0 <= ch.index < self.num_qubits
        return 0 <= ch.index < len(self.edges)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "num_qubits": self.num_qubits,
            "granularity": self.granularity,
            "dt": self.dt,
            "edges": [[c, t] for c, t in self.edges],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Device":
        return cls(
            name=d["name"],
            num_qubits=d["num_qubits"],
            edges=tuple((c, t) for c, t in d["edges"]),
            granularity=d["granularity"],
            dt=d["dt"],
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "Device":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class PulseShape:
    """Parametrized envelope: a DRAG pulse or a Gaussian-square pulse.

    Durations, sigma, and width are in samples; amp is a dimensionless complex
    fraction of full AWG scale with |amp| <= 1.
    """

    variant: str
    duration: int
    amp: complex
    sigma: float
    beta: float | None = None
    width: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "amp", complex(self.amp))
        if self.duration < 1:
            raise InvalidShapeError("duration must be a positive sample count")
        if self.sigma <= 0:
            raise InvalidShapeError("sigma must be positive")
        if abs(self.amp) > 1 + 1e-12:
            raise InvalidShapeError("|amp| must be <= 1")
        if self.variant == DRAG:
            if self.beta is None:
                raise InvalidShapeError("drag requires beta")
            if self.width is not None:
                raise InvalidShapeError("drag takes no width")
        elif self.variant == GAUSSIAN_SQUARE:
            if self.width is None:
                raise InvalidShapeError("gaussian_square requires width")
            if self.beta is not None:
                raise InvalidShapeError("gaussian_square takes no beta")
            if not 0 <= self.width < self.duration:
                raise InvalidShapeError("need 0 <= width < duration (risefall > 0)")
        else:
            raise InvalidShapeError(f"unknown variant {self.variant!r}")

    @property
    def risefall(self) -> float:
        if self.variant != GAUSSIAN_SQUARE:
            raise ShapeMismatchError("risefall is defined for gaussian_square only")
        return (self.duration - self.width) / 2

    def to_dict(self) -> dict:
        d = {
            "variant": self.variant,
            "duration": self.duration,
            "amp": [self.amp.real, self.amp.imag],
            "sigma": self.sigma,
        }
        if self.beta is not None:
            d["beta"] = self.beta
        if self.width is not None:
            d["width"] = self.width
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PulseShape":
        return cls(
            variant=d["variant"],
            duration=d["duration"],
            amp=complex(d["amp"][0], d["amp"][1]),
            sigma=d["sigma"],
            beta=d.get("beta"),
            width=d.get("width"),
        )


def drag(duration: int, amp: complex, sigma: float, beta: float) -> PulseShape:
    return PulseShape(DRAG, duration, amp, sigma, beta=beta)


def gaussian_square(duration: int, amp: complex, sigma: float, width: int) -> PulseShape:
    return PulseShape(GAUSSIAN_SQUARE, duration, amp, sigma, width=width)


def sample_drag(shape: PulseShape) -> np.ndarray:
    """Sample a DRAG envelope: lifted Gaussian plus i*beta times the Gaussian
    derivative, scaled by amp.

    f(t) = amp * [lifted(t) + i*beta*(-(t-mu)/sigma^2)*g(t)] for t = 0..d-1,
    with mu = (d-1)/2, g(t) = exp(-(t-mu)^2 / (2 sigma^2)) and
    lifted(t) = (g(t) - g(-1)) / (1 - g(-1)).
    """
    if shape.variant != DRAG:
        raise ShapeMismatchError(f"sample_drag got {shape.variant!r}")
    d = shape.duration
    sig = shape.sigma
    mu = (d - 1) / 2
    t = np.arange(d, dtype=np.float64)
    g = np.exp(-((t - mu) ** 2) / (2 * sig * sig))
    g_edge = math.exp(-((-1 - mu) ** 2) / (2 * sig * sig))
    lifted = (g - g_edge) / (1 - g_edge)
    env = lifted + 1j * shape.beta * (-(t - mu) / (sig * sig)) * g
    return shape.amp * env


def sample_gaussian_square(shape: PulseShape) -> np.ndarray:
    """Sample a Gaussian-square envelope: Gaussian flanks around a flat top,
    lifted so sample 0 is exactly zero and the top equals amp."""
    if shape.variant != GAUSSIAN_SQUARE:
        raise ShapeMismatchError(f"sample_gaussian_square got {shape.variant!r}")
    d, w, sig = shape.duration, shape.width, shape.sigma
    r = (d - w) / 2
    t = np.arange(d, dtype=np.float64)
    raw = np.ones(d, dtype=np.float64)
    rise = t < r
    fall = t > r + w
    raw[rise] = np.exp(-((t[rise] - r) ** 2) / (2 * sig * sig))
    raw[fall] = np.exp(-((t[fall] - (r + w)) ** 2) / (2 * sig * sig))
    base = raw[0]
    lifted = (raw - base) / (1 - base)
    return shape.amp * lifted.astype(np.complex128)


@lru_cache(maxsize=8192)
def sample_envelope(shape: PulseShape) -> np.ndarray:
    """Cached variant dispatch; the returned array is read-only."""
    if shape.variant == DRAG:
        arr = sample_drag(shape)
    else:
        arr = sample_gaussian_square(shape)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PulsePlacement:
    """One pulse of a basis-gate entry: where it goes and when, relative to
    the gate start."""

    channel: Channel
    offset: int
    shape: PulseShape

    def to_dict(self) -> dict:
        return {
            "channel": self.channel.to_dict(),
            "offset": self.offset,
            "shape": self.shape.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PulsePlacement":
        return cls(Channel.from_dict(d["channel"]), d["offset"], PulseShape.from_dict(d["shape"]))


@dataclass(frozen=True)
class LibraryEntry:
    """Calibrated pulse set of one basis gate on a particular qubit tuple.

    RZ entries have no pulses and no delay; identity entries have no pulses
    but carry the delay (in samples) the gate occupies.
    """

    gate: str
    qubits: tuple[int, ...]
    pulses: tuple[PulsePlacement, ...] = ()
    delay: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if self.gate not in BASIS_GATES:
            raise UnsupportedGateError(f"{self.gate!r} is not a basis gate")

    @property
    def span(self) -> int:
        """Samples the gate occupies: delay for identity, last pulse end otherwise."""
        if self.pulses:
            return max(p.offset + p.shape.duration for p in self.pulses)
        return self.delay or 0

    def to_dict(self) -> dict:
        d = {
            "gate": self.gate,
            "qubits": list(self.qubits),
            "pulses": [p.to_dict() for p in self.pulses],
        }
        if self.delay is not None:
            d["delay"] = self.delay
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LibraryEntry":
        return cls(
            gate=d["gate"],
            qubits=tuple(d["qubits"]),
            pulses=tuple(PulsePlacement.from_dict(p) for p in d["pulses"]),
            delay=d.get("delay"),
        )


@dataclass
class BasisPulseLibrary:
    """Map from (gate name, qubit tuple) to its calibrated pulse entry.

    Populated once by a generator or loader, then treated as read-only;
    sharing across parallel workers is safe.
    """

    entries: dict = field(default_factory=dict)

    @classmethod
    def from_entries(cls, entries) -> "BasisPulseLibrary":
        lib = cls()
        for e in entries:
            lib.add(e)
        return lib

    def add(self, entry: LibraryEntry) -> None:
        key = (entry.gate, entry.qubits)
        if key in self.entries:
            raise ValueError(f"duplicate library entry for {key}")
        self.entries[key] = entry

    def get(self, gate: str, qubits: tuple[int, ...]) -> LibraryEntry | None:
        return self.entries.get((gate, tuple(qubits)))

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries.values()]}

    @classmethod
    def from_dict(cls, d: dict) -> "BasisPulseLibrary":
        return cls.from_entries(LibraryEntry.from_dict(e) for e in d["entries"])

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "BasisPulseLibrary":
        return cls.from_dict(json.loads(Path(path).read_text()))


def lookup_basis_pulses(lib: BasisPulseLibrary, gate: str, qubits) -> LibraryEntry:
    """Fetch the pulse entry for a gate application.

    RZ always resolves to an empty entry (virtual gate). A missing identity
    entry falls back to the qubit's X duration as its delay.
    """
    qubits = tuple(int(q) for q in qubits)
    if gate not in BASIS_GATES:
        raise UnsupportedGateError(f"{gate!r} is not a basis gate")
    entry = lib.get(gate, qubits)
    if entry is not None:
        return entry
    if gate == "rz":
        return LibraryEntry("rz", qubits)
    if gate == "i":
        x_entry = lib.get("x", qubits)
        if x_entry is not None:
            return LibraryEntry("i", qubits, delay=x_entry.span)
    raise UnsupportedGateError(f"no library entry for {gate} on {qubits}")


def validate_library(lib: BasisPulseLibrary, device: Device) -> list[str]:
    """Check library invariants against a device; returns human-readable
    violations (empty list means valid).

    Checks: X/SX coverage per qubit, CX coverage per directed edge, channel
    validity, duration and offset granularity, same-channel non-overlap
    within an entry, and the SX = X/2 amplitude convention.
    """
    violations: list[str] = []
    g = device.granularity

    for q in range(device.num_qubits):
        for gate in ("x", "sx"):
            if lib.get(gate, (q,)) is None:
                violations.append(f"missing {gate} entry for qubit ({q},)")
    for edge in device.edges:
        if lib.get("cx", edge) is None:
            violations.append(f"missing cx entry for edge {edge}")

    for (gate, qubits), entry in lib.entries.items():
        label = f"{gate}{qubits}"
        for q in qubits:
            if not 0 <= q < device.num_qubits:
                violations.append(f"{label}: qubit {q} not on device")
        if gate == "cx" and device.edge_index(qubits) is None:
            violations.append(f"{label}: not a directed device edge")
        by_channel: dict[Channel, list[tuple[int, int]]] = {}
        for p in entry.pulses:
            if not device.has_channel(p.channel):
                violations.append(f"{label}: channel {p.channel} not on device")
                continue
            if p.shape.duration % g != 0:
                violations.append(
                    f"{label}: duration {p.shape.duration} not a multiple of granularity {g}"
                )
            if p.offset % g != 0:
                violations.append(
                    f"{label}: offset {p.offset} not a multiple of granularity {g}"
                )
            by_channel.setdefault(p.channel, []).append((p.offset, p.offset + p.shape.duration))
        for ch, spans in by_channel.items():
            spans.sort()
            for (s0, e0), (s1, _) in zip(spans, spans[1:]):
                if s1 < e0:
                    violations.append(f"{label}: overlapping pulses on {ch}")

    for q in range(device.num_qubits):
        x_entry = lib.get("x", (q,))
        sx_entry = lib.get("sx", (q,))
        if x_entry is None or sx_entry is None or not x_entry.pulses or not sx_entry.pulses:
            continue
        ax = max(abs(p.shape.amp) for p in x_entry.pulses)
        asx = max(abs(p.shape.amp) for p in sx_entry.pulses)
        if not math.isclose(2 * asx, ax, rel_tol=1e-9, abs_tol=1e-12):
            violations.append(
                f"qubit {q}: |sx amp| {asx!r} is not half of |x amp| {ax!r}"
            )

    return violations
