"""Synthetic devices, calibrated libraries, and benchmark circuits.

Generated devices mimic the published 5- and 7-qubit IBM coupling maps
(line, T, H) with per-qubit DRAG parameters and per-edge cross-resonance
style cx entries. Parameter spreads are declared design ranges, not vendor
calibration data.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .circuit import Circuit, GateApp
from .device import (
    BasisPulseLibrary,
    Device,
    LibraryEntry,
    PulsePlacement,
    drag,
    gaussian_square,
)

X_DURATION = 160
X_SIGMA = 40.0
X_AMP_RANGE = (0.1, 0.3)
BETA_RANGE = (-2.0, 2.0)
CX_SIGMA = 64.0
CX_AMP_RANGE = (0.1, 0.5)
CX_DURATION_RANGE = (1408, 2944)  # multiples of the granularity
CX_FLANK = 256  # duration - width
ECHO_BACKOFF = 80  # echo pulse sits near duration/2


class TopologyShape(enum.Enum):
    LINE = "line"
    TSHAPE = "t"
    HSHAPE = "h"


_T_COUPLINGS = ((0, 1), (1, 2), (1, 3), (3, 4))
_H_COUPLINGS = ((0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6))


def _couplings(shape: TopologyShape, n: int) -> tuple[tuple[int, int], ...]:
    if shape is TopologyShape.LINE:
        if n < 2:
            raise ValueError("line topology needs at least 2 qubits")
        return tuple((i, i + 1) for i in range(n - 1))
    if shape is TopologyShape.TSHAPE:
        if n != 5:
            raise ValueError("T shape is a 5-qubit topology")
        return _T_COUPLINGS
    if n != 7:
        raise ValueError("H shape is a 7-qubit topology")
    return _H_COUPLINGS


def topology_edges(shape: TopologyShape, n: int) -> tuple[tuple[int, int], ...]:
    """Directed edge list: both directions of every physical coupling."""
    edges: list[tuple[int, int]] = []
    for a, b in _couplings(shape, n):
        edges.append((a, b))
        edges.append((b, a))
    return tuple(edges)


def _round_to(value: float, granularity: int) -> int:
    return int(round(value / granularity)) * granularity


def gen_library(device: Device, seed: int) -> BasisPulseLibrary:
    """Seeded calibrated library for an arbitrary device.

    Per qubit: x is a DRAG pulse, sx the same pulse at half amplitude, rz is
    empty, identity carries the x duration as delay. Per directed edge: a
    Gaussian-square pair on the control channel and target drive plus a DRAG
    echo pulse (the control qubit's x shape) on the control drive.
    """
    rng = np.random.default_rng(seed)
    g = device.granularity
    lib = BasisPulseLibrary()

    x_shapes = {}
    for q in range(device.num_qubits):
        amp = float(rng.uniform(*X_AMP_RANGE))
        beta = float(rng.uniform(*BETA_RANGE))
        x_shape = drag(X_DURATION, amp, X_SIGMA, beta)
        sx_shape = drag(X_DURATION, amp / 2, X_SIGMA, beta)
        x_shapes[q] = x_shape
        ch = device.drive(q)
        lib.add(LibraryEntry("x", (q,), (PulsePlacement(ch, 0, x_shape),)))
        lib.add(LibraryEntry("sx", (q,), (PulsePlacement(ch, 0, sx_shape),)))
        lib.add(LibraryEntry("rz", (q,)))
        lib.add(LibraryEntry("i", (q,), delay=X_DURATION))

    lo, hi = CX_DURATION_RANGE
    steps = (hi - lo) // g + 1
    for c, t in device.edges:
        duration = lo + int(rng.integers(0, steps)) * g
        cr_amp = float(rng.uniform(*CX_AMP_RANGE))
        drive_amp = float(rng.uniform(*CX_AMP_RANGE))
        width = duration - CX_FLANK
        cr = gaussian_square(duration, cr_amp, CX_SIGMA, width)
        target = gaussian_square(duration, drive_amp, CX_SIGMA, width)
        echo_offset = _round_to(duration / 2 - ECHO_BACKOFF, g)
        pulses = (
            PulsePlacement(device.control((c, t)), 0, cr),
            PulsePlacement(device.drive(t), 0, target),
            PulsePlacement(device.drive(c), echo_offset, x_shapes[c]),
        )
        lib.add(LibraryEntry("cx", (c, t), pulses))

    return lib


def gen_device(shape: TopologyShape, n: int, seed: int) -> tuple[Device, BasisPulseLibrary]:
    """Seeded synthetic device plus its basis pulse library."""
    device = Device(
        name=f"synth_{shape.value}{n}_s{seed}",
        num_qubits=n,
        edges=topology_edges(shape, n),
    )
    return device, gen_library(device, seed)


def gen_random_circuit(
    device: Device,
    n_gates: int,
    seed: int,
    rz_fraction: float = 0.0,
    qubits=None,
) -> Circuit:
    """Seeded connectivity-legal random circuit over {x, sx, cx, rz}.

    ``qubits`` restricts the operand set (cx is drawn from edges induced on
    it); by default all device qubits are used.
    """
    if n_gates < 1:
        raise ValueError("n_gates must be >= 1")
    rng = np.random.default_rng(seed)
    pool = sorted(qubits) if qubits is not None else list(range(device.num_qubits))
    pool_set = set(pool)
    edges = [e for e in device.edges if e[0] in pool_set and e[1] in pool_set]

    ops: list[GateApp] = []
    for _ in range(n_gates):
        if rz_fraction > 0 and rng.random() < rz_fraction:
            q = pool[int(rng.integers(0, len(pool)))]
            ops.append(GateApp("rz", (q,), float(rng.uniform(0, 2 * math.pi))))
            continue
        kinds = ["x", "sx"] + (["cx"] if edges else [])
        kind = kinds[int(rng.integers(0, len(kinds)))]
        if kind == "cx":
            ops.append(GateApp("cx", edges[int(rng.integers(0, len(edges)))]))
        else:
            q = pool[int(rng.integers(0, len(pool)))]
            ops.append(GateApp(kind, (q,)))
    return Circuit(device.num_qubits, tuple(ops), name=f"rand_s{seed}")


def connected_subset(device: Device, size: int, seed: int) -> tuple[int, ...]:
    """Seeded connected qubit subset (BFS order) of the coupling graph."""
    if size > device.num_qubits:
        raise ValueError("subset larger than device")
    rng = np.random.default_rng(seed)
    adj: dict[int, set[int]] = {q: set() for q in range(device.num_qubits)}
    for c, t in device.edges:
        adj[c].add(t)
        adj[t].add(c)
    start = int(rng.integers(0, device.num_qubits))
    chosen = [start]
    frontier = sorted(adj[start])
    while len(chosen) < size:
        if not frontier:
            raise ValueError("coupling graph is disconnected")
        nxt = frontier.pop(int(rng.integers(0, len(frontier))))
        if nxt in chosen:
            continue
        chosen.append(nxt)
        frontier = sorted(set(frontier) | (adj[nxt] - set(chosen)))
    return tuple(sorted(chosen))


def _hadamard(q: int) -> list[GateApp]:
    # H up to global phase in the hardware basis
    return [
        GateApp("rz", (q,), math.pi / 2),
        GateApp("sx", (q,)),
        GateApp("rz", (q,), math.pi / 2),
    ]


def _hop_chain(a: int, b: int) -> list[GateApp]:
    """Nearest-neighbor cx sequence XORing the current value of qubit a into
    qubit b (a < b); intermediates are left dirty until uncomputed."""
    ops = [GateApp("cx", (i, i + 1)) for i in range(b - 1, a, -1)]
    ops += [GateApp("cx", (i, i + 1)) for i in range(a, b)]
    return ops


def _phase_gadget(subset: tuple[int, ...], theta: float) -> list[GateApp]:
    """exp(-i theta/2 Z...Z) on ``subset`` using only line-adjacent cx."""
    subset = tuple(sorted(subset))
    forward: list[GateApp] = []
    for a, b in zip(subset, subset[1:]):
        forward += _hop_chain(a, b)
    return forward + [GateApp("rz", (subset[-1],), theta)] + forward[::-1]


def marked_state_oracle(n: int, marked: int) -> list[GateApp]:
    """Diagonal phase oracle putting a minus sign on |marked>.

    Compiled as phase gadgets over every non-empty qubit subset; the cx
    skeleton is independent of ``marked`` and only the rz angles change.
    """
    ops: list[GateApp] = []
    for mask in range(1, 1 << n):
        subset = tuple(q for q in range(n) if (mask >> q) & 1)
        sign = -1.0 if bin(mask & marked).count("1") % 2 else 1.0
        theta = -math.pi * 2.0 ** (1 - n) * sign
        ops += _phase_gadget(subset, theta)
    return ops


def gen_textbook(algo: str, n: int, param: int) -> Circuit:
    """Textbook oracle-identification families (logical circuits).

    bv: n data qubits plus an ancilla (qubit n); the Boolean oracle applies
    cx(data_i -> ancilla) per set bit of the hidden string.
    dj: balanced phase oracle rz(pi) on qubits with set bits (rz-only family).
    gs: one Grover iteration with the marked-state oracle and the zero-state
    reflection both compiled as fixed-skeleton phase gadgets.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= param < (1 << n):
        raise ValueError(f"param {param} out of range for n={n}")

    ops: list[GateApp] = []
    if algo == "bv":
        anc = n
        for q in range(n):
            ops += _hadamard(q)
        ops.append(GateApp("x", (anc,)))
        ops += _hadamard(anc)
        for q in range(n):
            if (param >> q) & 1:
                ops.append(GateApp("cx", (q, anc)))
        for q in range(n):
            ops += _hadamard(q)
        for q in range(n):
            ops.append(GateApp("measure", (q,)))
        return Circuit(n + 1, tuple(ops), name=f"bv{n}_{param:0{n}b}")

    if algo == "dj":
        for q in range(n):
            ops += _hadamard(q)
        for q in range(n):
            if (param >> q) & 1:
                ops.append(GateApp("rz", (q,), math.pi))
        for q in range(n):
            ops += _hadamard(q)
        for q in range(n):
            ops.append(GateApp("measure", (q,)))
        return Circuit(n, tuple(ops), name=f"dj{n}_{param:0{n}b}")

    if algo == "gs":
        for q in range(n):
            ops += _hadamard(q)
        ops += marked_state_oracle(n, param)
        for q in range(n):
            ops += _hadamard(q)
        ops += marked_state_oracle(n, 0)
        for q in range(n):
            ops += _hadamard(q)
        for q in range(n):
            ops.append(GateApp("measure", (q,)))
        return Circuit(n, tuple(ops), name=f"gs{n}_{param:0{n}b}")

    raise ValueError(f"unknown textbook algorithm {algo!r}")


def star_device(n_data: int, seed: int = 0) -> tuple[Device, BasisPulseLibrary]:
    """Device whose edges run from each data qubit to a hub ancilla.

    Bernstein-Vazirani oracles need the ancilla adjacent to every data qubit;
    routing is out of scope, so the harness provides the star directly.
    """
    device = Device(
        name=f"synth_star{n_data}_s{seed}",
        num_qubits=n_data + 1,
        edges=tuple((q, n_data) for q in range(n_data)),
    )
    return device, gen_library(device, seed)
