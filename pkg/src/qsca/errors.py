"""Exception types shared across the toolkit."""


class QscaError(Exception):
    """Base class for all domain errors raised by this package."""


class ShapeMismatchError(QscaError):
    """A sampler was handed a pulse shape of the wrong variant."""


class InvalidShapeError(QscaError):
    """Pulse shape parameters violate their constraints."""


class UnsupportedGateError(QscaError):
    """No library entry exists for the requested (gate, qubits) pair."""


class ParseError(QscaError):
    """Circuit text could not be parsed; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ConnectivityError(QscaError):
    """A two-qubit gate does not sit on a directed device edge."""


class CapacityError(QscaError):
    """More logical qubits than the device provides."""


class SizeError(QscaError):
    """Circuit exceeds the dense-unitary qubit cap."""


class ChannelError(QscaError):
    """Channel does not belong to the device at hand."""


class DegenerateTraceError(QscaError):
    """Operation undefined on an empty power trace."""


class DegenerateNormError(QscaError):
    """Normalized distance requires a nonzero first-argument norm."""


class ArityError(QscaError):
    """Too few elements for a pairwise computation."""


class AmbiguousMatchError(QscaError):
    """Two basis-gate templates matched one segment; boundary/tolerance coupling violated."""


class IncompleteReconstructionError(QscaError):
    """Unmatched segments remained after both reconstruction phases.

    ``leftovers`` lists (channel, start, length) of the residual segments and
    ``partial`` holds whatever was reconstructed before the failure.
    """

    def __init__(self, leftovers, partial):
        super().__init__(
            f"{len(leftovers)} unmatched segment(s) remain: "
            + ", ".join(f"{ch}@{start}+{length}" for ch, start, length in leftovers[:8])
        )
        self.leftovers = leftovers
        self.partial = partial
