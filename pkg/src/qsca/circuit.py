"""Gate-level circuit IR, the .qc text format, layouts, and a dense unitary.

Circuits use the hardware basis {i, rz, sx, x, cx} plus barrier/measure.
Qubit ordering follows the little-endian convention: basis-state bit k is
qubit k, so the most significant (leftmost) ket position is the highest
qubit index.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .device import Device
from .errors import CapacityError, ConnectivityError, ParseError, SizeError

GATE_NAMES = ("i", "rz", "sx", "x", "cx", "barrier", "measure")
ONE_QUBIT = ("i", "rz", "sx", "x", "measure")

#: default cap for dense unitary construction
MAX_UNITARY_QUBITS = 10


@dataclass(frozen=True)
class GateApp:
    """One gate application; angle is present exactly for rz."""

    gate: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.gate not in GATE_NAMES:
            raise ValueError(f"unknown gate {self.gate!r}")
        if (self.angle is not None) != (self.gate == "rz"):
            raise ValueError("angle is required for rz and only rz")
        if self.gate == "cx":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError("cx needs two distinct qubits")
        elif self.gate in ONE_QUBIT and len(self.qubits) != 1:
            raise ValueError(f"{self.gate} takes exactly one qubit")

    def to_dict(self) -> dict:
        d = {"gate": self.gate, "qubits": list(self.qubits)}
        if self.angle is not None:
            d["angle"] = self.angle
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GateApp":
        return cls(d["gate"], tuple(d["qubits"]), d.get("angle"))


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list over ``num_qubits`` named qubits.

    ``layout`` records, once a layout has been applied, the injective
    logical-to-physical map that produced this circuit.
    """

    num_qubits: int
    ops: tuple[GateApp, ...]
    name: str = ""
    layout: dict | None = None

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            for q in op.qubits:
                if not 0 <= q < self.num_qubits:
                    raise ValueError(f"{op.gate} references missing qubit {q}")

    def gate_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for op in self.ops:
            counts[op.gate] = counts.get(op.gate, 0) + 1
        return counts

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "num_qubits": self.num_qubits,
            "ops": [op.to_dict() for op in self.ops],
        }
        if self.layout is not None:
            d["layout"] = {str(k): v for k, v in self.layout.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        layout = d.get("layout")
        if layout is not None:
            layout = {int(k): v for k, v in layout.items()}
        return cls(
            num_qubits=d["num_qubits"],
            ops=tuple(GateApp.from_dict(o) for o in d["ops"]),
            name=d.get("name", ""),
            layout=layout,
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "Circuit":
        return cls.from_dict(json.loads(Path(path).read_text()))


_RZ_RE = re.compile(r"^rz\(([^)]*)\)$")
_QUBIT_RE = re.compile(r"^q(\d+)$")


def parse_circuit(text: str, name: str = "") -> Circuit:
    """Parse the line-oriented .qc format.

    Header ``qubits N`` followed by one op per line, e.g. ``x q0``,
    ``rz(1.5708) q2``, ``cx q0 q1``, ``barrier``, ``measure q0``. ``#``
    starts a comment. Errors carry the offending line number.
    """
    num_qubits = None
    ops: list[GateApp] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head, args = tokens[0], tokens[1:]

        if num_qubits is None:
            if head != "qubits" or len(args) != 1:
                raise ParseError(lineno, "expected header 'qubits N'")
            try:
                num_qubits = int(args[0])
            except ValueError:
                raise ParseError(lineno, f"bad qubit count {args[0]!r}") from None
            if num_qubits < 1:
                raise ParseError(lineno, "qubit count must be positive")
            continue

        def qubit(tok: str) -> int:
            m = _QUBIT_RE.match(tok)
            if not m:
                raise ParseError(lineno, f"bad qubit operand {tok!r}")
            q = int(m.group(1))
            if q >= num_qubits:
                raise ParseError(lineno, f"qubit index {q} out of range (qubits {num_qubits})")
            return q

        rz_match = _RZ_RE.match(head)
        if rz_match:
            if len(args) != 1:
                raise ParseError(lineno, "rz takes one operand")
            try:
                angle = float(rz_match.group(1))
            except ValueError:
                raise ParseError(lineno, f"malformed angle {rz_match.group(1)!r}") from None
            if not math.isfinite(angle):
                raise ParseError(lineno, f"non-finite angle {angle!r}")
            ops.append(GateApp("rz", (qubit(args[0]),), angle))
        elif head == "barrier":
            ops.append(GateApp("barrier", tuple(qubit(a) for a in args)))
        elif head == "cx":
            if len(args) != 2:
                raise ParseError(lineno, "cx takes two operands")
            c, t = qubit(args[0]), qubit(args[1])
            if c == t:
                raise ParseError(lineno, "duplicate operand")
            ops.append(GateApp("cx", (c, t)))
        elif head in ("i", "sx", "x", "measure"):
            if len(args) != 1:
                raise ParseError(lineno, f"{head} takes one operand")
            ops.append(GateApp(head, (qubit(args[0]),)))
        else:
            raise ParseError(lineno, f"unknown gate {head!r}")

    if num_qubits is None:
        raise ParseError(1, "empty circuit text (missing 'qubits N' header)")
    return Circuit(num_qubits, tuple(ops), name=name)


def format_circuit(c: Circuit) -> str:
    """Inverse of parse_circuit on the op list."""
    lines = [f"qubits {c.num_qubits}"]
    for op in c.ops:
        operands = " ".join(f"q{q}" for q in op.qubits)
        if op.gate == "rz":
            lines.append(f"rz({op.angle!r}) {operands}")
        elif op.gate == "barrier" and not op.qubits:
            lines.append("barrier")
        else:
            lines.append(f"{op.gate} {operands}".rstrip())
    return "\n".join(lines) + "\n"


def apply_layout(c: Circuit, layout: dict, device: Device) -> Circuit:
    """Relabel logical qubits onto physical device qubits.

    The layout must be injective and cover every logical qubit; every
    relabeled cx must land on a directed device edge (no routing is done).
    Bare barriers are materialized onto the layout image.
    """
    mapping = {int(k): int(v) for k, v in layout.items()}
    if len(set(mapping.values())) != len(mapping):
        raise ConnectivityError("layout is not injective")
    for logical in range(c.num_qubits):
        if logical not in mapping:
            raise ConnectivityError(f"layout misses logical qubit {logical}")
    for phys in mapping.values():
        if not 0 <= phys < device.num_qubits:
            raise ConnectivityError(f"layout target {phys} not on {device.name}")

    image = tuple(sorted(mapping[q] for q in range(c.num_qubits)))
    new_ops = []
    for op in c.ops:
        if op.gate == "barrier" and not op.qubits:
            new_ops.append(GateApp("barrier", image))
            continue
        qubits = tuple(mapping[q] for q in op.qubits)
        if op.gate == "cx" and device.edge_index(qubits) is None:
            raise ConnectivityError(
                f"cx{qubits} is not a directed edge of {device.name} (routing out of scope)"
            )
        new_ops.append(GateApp(op.gate, qubits, op.angle))
    return Circuit(device.num_qubits, tuple(new_ops), name=c.name, layout=mapping)


def enumerate_layouts(n_logical: int, device: Device, limit: int, seed: int) -> list[dict]:
    """Seeded sample (without replacement) of injective logical->physical maps.

    There are k!/(k-n)! such maps for k device qubits; if ``limit`` covers
    them all they are returned in lexicographic order.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    k = device.num_qubits
    n = n_logical
    if n < 1:
        raise ValueError("n_logical must be >= 1")
    if n > k:
        raise CapacityError(f"{n} logical qubits exceed {k}-qubit device {device.name}")

    total = math.perm(k, n)
    if limit >= total:
        ranks = range(total)
    else:
        ranks = random.Random(seed).sample(range(total), limit)

    layouts = []
    for rank in ranks:
        available = list(range(k))
        picked = []
        rem = rank
        for i in range(n):
            div = math.perm(k - 1 - i, n - 1 - i)
            d, rem = divmod(rem, div)
            picked.append(available.pop(d))
        layouts.append({logical: phys for logical, phys in enumerate(picked)})
    return layouts


_I2 = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=np.complex128)


def _rz_matrix(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]], dtype=np.complex128
    )


def _embed_1q(u: np.ndarray, q: int, n: int) -> np.ndarray:
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=np.complex128)
    cols = np.arange(dim)
    mask = 1 << q
    c0 = cols[(cols & mask) == 0]
    c1 = c0 | mask
    m[c0, c0] = u[0, 0]
    m[c1, c0] = u[1, 0]
    m[c0, c1] = u[0, 1]
    m[c1, c1] = u[1, 1]
    return m


def _embed_cx(ctrl: int, tgt: int, n: int) -> np.ndarray:
    dim = 1 << n
    cols = np.arange(dim)
    rows = np.where((cols & (1 << ctrl)) != 0, cols ^ (1 << tgt), cols)
    m = np.zeros((dim, dim), dtype=np.complex128)
    m[rows, cols] = 1
    return m


def unitary_of(c: Circuit, max_qubits: int = MAX_UNITARY_QUBITS) -> np.ndarray:
    """Dense unitary of the circuit; barrier and measure are ignored."""
    if c.num_qubits > max_qubits:
        raise SizeError(f"{c.num_qubits} qubits exceed the dense cap of {max_qubits}")
    n = c.num_qubits
    u = np.eye(1 << n, dtype=np.complex128)
    for op in c.ops:
        if op.gate in ("barrier", "measure", "i"):
            continue
        if op.gate == "cx":
            g = _embed_cx(op.qubits[0], op.qubits[1], n)
        elif op.gate == "rz":
            g = _embed_1q(_rz_matrix(op.angle), op.qubits[0], n)
        elif op.gate == "x":
            g = _embed_1q(_X, op.qubits[0], n)
        else:  # sx
            g = _embed_1q(_SX, op.qubits[0], n)
        u = g @ u
    return u
