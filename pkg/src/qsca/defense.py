"""Virtual-RZ substitution defense.

Randomly selected single-qubit gates are rewritten into logically equivalent
sequences containing virtual rz gates. The rz gates are invisible in power
traces, so an attacker reconstructing from pulses sees a different gate list;
stripping the rz gates must not reproduce the original gate, which is what
makes the rz-blind reconstruction wrong.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuit import Circuit, GateApp, unitary_of

_PI = math.pi


def u3_sequence(theta: float, phi: float, lam: float, qubit: int = 0) -> tuple[GateApp, ...]:
    """Generic single-qubit rotation as rz/sx alternation, in application order:
    [rz(lam - pi/2), sx, rz(pi - theta), sx, rz(phi - pi/2)].

    The angle convention is certified against the unitary oracle (see
    substitution_rules); only the global phase is free.
    """
    return (
        GateApp("rz", (qubit,), lam - _PI / 2),
        GateApp("sx", (qubit,)),
        GateApp("rz", (qubit,), _PI - theta),
        GateApp("sx", (qubit,)),
        GateApp("rz", (qubit,), phi - _PI / 2),
    )


@dataclass(frozen=True)
class SubstitutionRule:
    """Replacement sequence for one gate; certified equivalent up to phase,
    and certified to break equivalence once its rz gates are stripped."""

    matches: str
    replacement: tuple[GateApp, ...]


def equivalent_up_to_phase(a: Circuit, b: Circuit, max_qubits: int = 10) -> bool:
    """True iff unitary_of(a) equals unitary_of(b) up to one global phase
    (tolerance 1e-8, anchored on b's largest-magnitude entry)."""
    if a.num_qubits != b.num_qubits:
        return False
    ua = unitary_of(a, max_qubits)
    ub = unitary_of(b, max_qubits)
    i, j = np.unravel_index(np.argmax(np.abs(ub)), ub.shape)
    if abs(ua[i, j]) < 1e-10:
        return False
    gamma = ua[i, j] / ub[i, j]
    if abs(abs(gamma) - 1.0) > 1e-8:
        return False
    return float(np.max(np.abs(ua - gamma * ub))) <= 1e-8


def strip_rz(c: Circuit) -> Circuit:
    """Drop every rz gate; models an attacker blind to virtual gates."""
    return Circuit(
        c.num_qubits,
        tuple(op for op in c.ops if op.gate != "rz"),
        name=c.name,
        layout=c.layout,
    )


def _certify(rule: SubstitutionRule) -> SubstitutionRule:
    target = Circuit(1, (GateApp(rule.matches, (0,)),))
    replacement = Circuit(1, rule.replacement)
    if not any(op.gate == "rz" for op in rule.replacement):
        raise AssertionError(f"{rule.matches} replacement contains no rz")
    if not equivalent_up_to_phase(target, replacement):
        raise AssertionError(f"{rule.matches} replacement is not equivalent")
    if equivalent_up_to_phase(target, strip_rz(replacement)):
        raise AssertionError(f"{rule.matches} replacement survives rz stripping")
    return rule


@lru_cache(maxsize=1)
def substitution_rules() -> dict[str, SubstitutionRule]:
    """Certified rules for x and sx.

    sx uses the 5-gate generic rotation at (theta, phi, lam) = (pi/2, 0, 0).
    x needs a third sx: any two-sx realization strips to sx*sx = x, which
    would leave the rz-blind reconstruction logically correct.
    """
    sx_seq = u3_sequence(_PI / 2, 0.0, 0.0)
    x_seq = (GateApp("sx", (0,)),) + sx_seq
    return {
        "sx": _certify(SubstitutionRule("sx", sx_seq)),
        "x": _certify(SubstitutionRule("x", x_seq)),
    }


def _retarget(seq: tuple[GateApp, ...], qubit: int) -> list[GateApp]:
    return [GateApp(op.gate, (qubit,), op.angle) for op in seq]


def substitute(c: Circuit, prob: float, seed: int) -> Circuit:
    """Independently replace each x/sx with probability ``prob`` by its
    certified rule; cx and rz are left unchanged."""
    if not 0.0 <= prob <= 1.0:
        raise ValueError("prob must lie in [0, 1]")
    rules = substitution_rules()
    rng = random.Random(seed)
    ops: list[GateApp] = []
    for op in c.ops:
        if op.gate in rules and rng.random() < prob:
            ops.extend(_retarget(rules[op.gate].replacement, op.qubits[0]))
        else:
            ops.append(op)
    return Circuit(c.num_qubits, tuple(ops), name=c.name, layout=c.layout)
