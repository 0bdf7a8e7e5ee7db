"""Minimal reader for the .qc interchange circuit format.

Line-oriented: a ``qubits N`` header, then one op per line (``x q0``,
``rz(0.5) q1``, ``cx q0 q1``, ``barrier``, ``measure q0``); ``#`` comments.
"""

from __future__ import annotations

import re

from .snapshot import ExportError

_RZ_RE = re.compile(r"^rz\(([^)]*)\)$")
_QUBIT_RE = re.compile(r"^q(\d+)$")

GATES_1Q = ("i", "sx", "x", "measure")


def parse_qc(text: str) -> tuple[int, list]:
    """Returns (num_qubits, ops) with ops as (gate, qubit tuple, angle|None)."""
    num_qubits = None
    ops = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head, args = tokens[0], tokens[1:]
        if num_qubits is None:
            if head != "qubits" or len(args) != 1:
                raise ExportError(f"line {lineno}: expected 'qubits N' header")
            num_qubits = int(args[0])
            continue

        def qubit(tok):
            m = _QUBIT_RE.match(tok)
            if not m or int(m.group(1)) >= num_qubits:
                raise ExportError(f"line {lineno}: bad qubit operand {tok!r}")
            return int(m.group(1))

        rz = _RZ_RE.match(head)
        if rz:
            ops.append(("rz", (qubit(args[0]),), float(rz.group(1))))
        elif head == "barrier":
            ops.append(("barrier", tuple(qubit(a) for a in args), None))
        elif head == "cx":
            ops.append(("cx", (qubit(args[0]), qubit(args[1])), None))
        elif head in GATES_1Q:
            ops.append((head, (qubit(args[0]),), None))
        else:
            raise ExportError(
                f"line {lineno}: gate {head!r} is outside the basis "
                "(custom pulse gates are excluded)"
            )
    if num_qubits is None:
        raise ExportError("empty circuit text")
    return num_qubits, ops
