"""Identification and reconstruction attacks over power traces.

User-circuit identification is a nearest-neighbor match on one of four
quantities (trace, energy, mean power, duration). Reconstruction runs the
two-phase search/remove algorithm: binarize each channel, match segment run
lengths against basis-gate templates (control channels first, so cx drive
components never masquerade as single-qubit gates), subtract what was found,
and repeat for drive channels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import Circuit
from .device import CONTROL, DRIVE, BasisPulseLibrary, Channel, Device, sample_envelope
from .errors import AmbiguousMatchError, ChannelError, IncompleteReconstructionError
from .metrics import MetricKind, circuit_dist, min_pairwise_norm_dist
from .scheduler import Schedule
from .tracegen import PowerTrace, ScalarStats


@dataclass(frozen=True)
class CandidateEntry:
    """One known circuit the attacker can compare a measurement against."""

    id: str
    circuit: Circuit
    schedule: Schedule
    trace: PowerTrace
    stats: ScalarStats


@dataclass
class CandidateList:
    """Ordered candidate set; ids are unique and order breaks ties."""

    entries: list[CandidateEntry] = field(default_factory=list)

    def __post_init__(self):
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("candidate ids must be unique")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _quantity(entry: CandidateEntry, metric: MetricKind):
    if metric is MetricKind.TRACE:
        return entry.trace
    if metric is MetricKind.ENERGY:
        return entry.stats.energy
    if metric is MetricKind.MEAN_POWER:
        return entry.stats.mean_power
    return entry.stats.duration


def _distance(measured, candidate, metric: MetricKind) -> float:
    if metric is MetricKind.TRACE:
        return circuit_dist(measured, candidate)
    return abs(float(measured) - float(candidate))


def identify_uc(measured, candidates: CandidateList, metric: MetricKind) -> str:
    """Nearest candidate id for the measured quantity; ties keep the first."""
    if not len(candidates):
        raise ValueError("candidate list is empty")
    best_id = None
    best = None
    for entry in candidates:
        d = _distance(measured, _quantity(entry, metric), metric)
        if best is None or d < best:
            best = d
            best_id = entry.id
    return best_id


def uc_accuracy(candidates: CandidateList, metric: MetricKind) -> float:
    """Fraction of candidates whose own quantity identifies them.

    With noiseless self-measurements this equals 1 - (non-first members of
    identical-quantity classes) / N, because only an exact collision can tie
    the zero self-distance.
    """
    n = len(candidates)
    if n == 0:
        raise ValueError("candidate list is empty")
    if metric is MetricKind.TRACE and n > 64:
        return _uc_accuracy_trace_packed(candidates)
    correct = 0
    for entry in candidates:
        if identify_uc(_quantity(entry, metric), candidates, metric) == entry.id:
            correct += 1
    return correct / n


def _uc_accuracy_trace_packed(candidates: CandidateList) -> float:
    """Matrix form of the trace-metric self-identification.

    Approximate squared distances come from the Gram expansion; every entry
    near a row's minimum is then recomputed exactly with circuit_dist, so
    collision ties resolve identically to the naive loop (first wins).
    """
    entries = candidates.entries
    n = len(entries)
    length = max(len(e.trace) for e in entries)
    packed = np.zeros((n, length), dtype=np.float64)
    for i, e in enumerate(entries):
        packed[i, : len(e.trace)] = e.trace.samples
    sq = np.einsum("ij,ij->i", packed, packed)
    # well beyond the GEMM rounding error of ~length*eps*max|a||b|
    slack = 1e-9 * (float(sq.max()) + 1.0)
    correct = 0
    block = max(1, min(n, int(64e6 // (8 * length)) or 1))
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        cross = packed[lo:hi] @ packed.T
        d2 = sq[lo:hi, None] + sq[None, :] - 2.0 * cross
        row_min = d2.min(axis=1)
        for r, i in enumerate(range(lo, hi)):
            near = np.flatnonzero(d2[r] <= row_min[r] + slack)
            best_j = None
            best = None
            for j in near:
                d = circuit_dist(entries[i].trace, entries[j].trace)
                if best is None or d < best:
                    best = d
                    best_j = j
            if best_j == i:
                correct += 1
    return correct / n


def distinguishability(candidates: CandidateList) -> float:
    """Minimum pairwise normalized circuit distance over the set's traces.

    Callers assemble the set per scenario: oracle variants (CO), ansatz
    families (CA), layouts of one circuit (QM), or one circuit across device
    libraries (QP).
    """
    return min_pairwise_norm_dist([e.trace for e in candidates])


@dataclass(frozen=True)
class ReconstructionParams:
    """Boundary/tolerance for the search phase plus robustness knobs.

    ``boundary`` is either one power threshold or a staged (b_hi, b_lo) pair;
    staged mode finds x above b_hi first, then sx above b_lo. The optional
    knobs (all off by default) exist for noisy traces: ``smooth_window``
    applies a centered moving average to traces and templates alike,
    ``merge_gap`` closes zero-gaps up to that length between segments, and
    ``min_run`` drops shorter segments as noise before matching.
    """

    boundary: float | tuple[float, float]
    tolerance: int = 0
    smooth_window: int = 1
    merge_gap: int = 0
    min_run: int = 0
    control_boundary: float | None = None

    def __post_init__(self):
        if self.staged:
            b_hi, b_lo = self.boundary
            if not (b_hi > b_lo > 0):
                raise ValueError("staged boundaries need b_hi > b_lo > 0")
        elif not self.boundary > 0:
            raise ValueError("boundary must be positive")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        if self.smooth_window < 1:
            raise ValueError("smooth_window must be >= 1")
        if self.control_boundary is not None and not self.control_boundary > 0:
            raise ValueError("control_boundary must be positive")

    @property
    def staged(self) -> bool:
        return isinstance(self.boundary, tuple)

    @property
    def low_boundary(self) -> float:
        """Drive-channel threshold for the residual scan (and sx in staged mode)."""
        return self.boundary[1] if self.staged else self.boundary

    @property
    def cx_boundary(self) -> float:
        """Control-channel threshold; cx peaks sit well above the sx-constrained
        drive boundary, so a higher default-able cut reduces edge jitter."""
        return self.control_boundary if self.control_boundary is not None else self.low_boundary


@dataclass(frozen=True)
class ReconstructedCircuit:
    """Recovered (gate, qubits, start) triples, ordered by start then channel."""

    gates: tuple[tuple[str, tuple[int, ...], int], ...]

    def multiset(self) -> dict:
        counts: dict = {}
        for g in self.gates:
            counts[g] = counts.get(g, 0) + 1
        return counts

    def to_dict(self) -> dict:
        return {
            "gates": [
                {"gate": g, "qubits": list(qs), "start": start}
                for g, qs, start in self.gates
            ]
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def from_dict(cls, d: dict) -> "ReconstructedCircuit":
        return cls(
            tuple((g["gate"], tuple(g["qubits"]), g["start"]) for g in d["gates"])
        )


def binarize(t, boundary: float) -> np.ndarray:
    """Bit series: 1 where the sample exceeds the boundary."""
    if boundary <= 0:
        raise ValueError("boundary must be positive")
    samples = t.samples if isinstance(t, PowerTrace) else np.asarray(t)
    return (samples > boundary).astype(np.uint8)


def find_segments(bits: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of 1s as (start, length), in order."""
    bits = np.asarray(bits, dtype=np.uint8)
    if len(bits) == 0:
        return []
    padded = np.concatenate(([0], bits, [0]))
    diff = np.diff(padded.astype(np.int8))
    starts = np.flatnonzero(diff == 1)
    ends = np.flatnonzero(diff == -1)
    return [(int(s), int(e - s)) for s, e in zip(starts, ends)]


def _merge_segments(segs: list[tuple[int, int]], gap: int) -> list[tuple[int, int]]:
    if gap <= 0 or not segs:
        return segs
    merged = [segs[0]]
    for start, length in segs[1:]:
        p_start, p_len = merged[-1]
        if start - (p_start + p_len) <= gap:
            merged[-1] = (p_start, start + length - p_start)
        else:
            merged.append((start, length))
    return merged


def _smooth(x: np.ndarray, window: int) -> np.ndarray:
    if window <= 1:
        return x
    kernel = np.full(window, 1.0 / window)
    return np.convolve(x, kernel, mode="same")


def _entry_channel_power(entry, channel: Channel) -> np.ndarray:
    """Noise-free power this entry contributes to one channel, at its own offsets."""
    out = np.zeros(entry.span, dtype=np.float64)
    for p in entry.pulses:
        if p.channel == channel:
            env = sample_envelope(p.shape)
            out[p.offset : p.offset + len(env)] += env.real**2 + env.imag**2
    return out


def _template(entry, channel: Channel, boundary: float, params: ReconstructionParams):
    """Binarized signature (run start, run length) of a basis gate on a channel.

    None if the gate never crosses the boundary there (undetectable). The
    observation pipeline (smoothing) is applied so run lengths stay
    comparable with observed segments.
    """
    power = _smooth(_entry_channel_power(entry, channel), params.smooth_window)
    segs = find_segments(binarize(power, boundary))
    if not segs:
        return None
    # Gaussian-family envelopes give a single run; keep the longest if noise
    # floors ever split a template.
    return max(segs, key=lambda s: s[1])


def _observed_segments(working: np.ndarray, boundary: float, params: ReconstructionParams):
    bits = binarize(_smooth(working, params.smooth_window), boundary)
    segs = _merge_segments(find_segments(bits), params.merge_gap)
    if params.min_run > 0:
        segs = [s for s in segs if s[1] >= params.min_run]
    return segs


def validate_params(
    lib: BasisPulseLibrary, device: Device, params: ReconstructionParams
) -> list[str]:
    """Check the boundary/tolerance coupling; violations are data, not errors.

    Same-channel basis-gate templates must differ in run length by more than
    2*tolerance, and staged boundaries must sit strictly between the per-qubit
    sx and x power peaks.
    """
    violations: list[str] = []

    if params.staged:
        b_hi, b_lo = params.boundary
        for q in range(device.num_qubits):
            x_entry, sx_entry = lib.get("x", (q,)), lib.get("sx", (q,))
            if x_entry is None or sx_entry is None:
                continue
            ch = device.drive(q)
            x_peak = float(
                np.max(_smooth(_entry_channel_power(x_entry, ch), params.smooth_window))
            )
            sx_peak = float(
                np.max(_smooth(_entry_channel_power(sx_entry, ch), params.smooth_window))
            )
            if not sx_peak < b_hi < x_peak:
                violations.append(
                    f"qubit {q}: b_hi {b_hi!r} not strictly between sx peak "
                    f"{sx_peak!r} and x peak {x_peak!r}"
                )
            if not 0 < b_lo < sx_peak:
                violations.append(
                    f"qubit {q}: b_lo {b_lo!r} not strictly below sx peak {sx_peak!r}"
                )
        return violations

    boundary = params.boundary
    for q in range(device.num_qubits):
        ch = device.drive(q)
        runs = []
        for gate in ("x", "sx"):
            entry = lib.get(gate, (q,))
            if entry is None:
                continue
            tmpl = _template(entry, ch, boundary, params)
            runs.append((gate, 0 if tmpl is None else tmpl[1]))
        for (g1, l1) in runs:
            for (g2, l2) in runs:
                if g1 < g2 and abs(l1 - l2) <= 2 * params.tolerance:
                    violations.append(
                        f"qubit {q}: {g1}/{g2} run lengths {l1}/{l2} within "
                        f"2*tolerance={2 * params.tolerance}"
                    )
    return violations


def match_gate(
    segment: tuple[int, int],
    channel: Channel,
    lib: BasisPulseLibrary,
    device: Device,
    params: ReconstructionParams,
    boundary: float | None = None,
    gates: tuple[str, ...] | None = None,
):
    """Match one binarized segment against the channel's basis-gate templates.

    Control channels carry exactly their edge's cx; drive channels carry x
    and sx (cx drive components are expected to be removed first). Returns
    (gate, qubits) or None; two in-tolerance matches raise, since validated
    parameters make that impossible.
    """
    if boundary is None:
        boundary = params.cx_boundary if channel.kind == CONTROL else params.low_boundary
    if channel.kind == CONTROL:
        edge = device.edges[channel.index]
        candidates = [("cx", edge)]
    else:
        q = channel.index
        pool = gates if gates is not None else ("x", "sx")
        candidates = [(g, (q,)) for g in pool]

    matches = []
    for gate, qubits in candidates:
        entry = lib.get(gate, tuple(qubits))
        if entry is None:
            continue
        tmpl = _template(entry, channel, boundary, params)
        if tmpl is None:
            continue
        if abs(segment[1] - tmpl[1]) <= params.tolerance:
            matches.append((gate, tuple(qubits)))
    if len(matches) > 1:
        raise AmbiguousMatchError(
            f"segment {segment} on {channel} matches {matches}; "
            "boundary/tolerance coupling violated"
        )
    return matches[0] if matches else None


def _round_nearest(value: int, granularity: int) -> int:
    return int(round(value / granularity)) * granularity


def _refine_start(arr: np.ndarray, entry, channel: Channel, start0: int, g: int) -> int:
    """Pick the granularity-grid start minimizing the raw power residual of
    this entry's pulses on the matched channel.

    Noise jitters binarized edges by a few samples; the residual search
    resolves which grid multiple the gate actually started on. Noiselessly
    the true start cancels exactly (residual 0), so behavior is unchanged.
    """
    pulses = [p for p in entry.pulses if p.channel == channel]
    if not pulses:
        return start0
    lo_off = min(p.offset for p in pulses)
    hi_off = max(p.offset + p.shape.duration for p in pulses)
    tpl = np.zeros(hi_off - lo_off, dtype=np.float64)
    for p in pulses:
        env = sample_envelope(p.shape)
        tpl[p.offset - lo_off : p.offset - lo_off + len(env)] += env.real**2 + env.imag**2

    best_t, best_r = start0, None
    for k in range(-2, 3):
        t = start0 + k * g
        if t < 0:
            continue
        seg_lo = t + lo_off
        window = np.zeros(len(tpl), dtype=np.float64)
        a = max(seg_lo, 0)
        b = min(seg_lo + len(tpl), len(arr))
        if a < b:
            window[a - seg_lo : b - seg_lo] = arr[a:b]
        r = float(np.sum((window - tpl) ** 2))
        if best_r is None or r < best_r:
            best_r, best_t = r, t
    return best_t


def _remove_entry(working: dict, entry, start: int) -> None:
    """Subtract a found gate's synthesized power from every affected channel,
    clamping the touched window at zero."""
    for p in entry.pulses:
        arr = working.get(p.channel)
        if arr is None:
            continue
        env = sample_envelope(p.shape)
        power = env.real**2 + env.imag**2
        lo = start + p.offset
        hi = lo + len(power)
        clip_lo = max(lo, 0)
        clip_hi = min(hi, len(arr))
        if clip_lo >= clip_hi:
            continue
        window = arr[clip_lo:clip_hi] - power[clip_lo - lo : clip_hi - lo]
        np.maximum(window, 0.0, out=window)
        arr[clip_lo:clip_hi] = window


def reconstruct(
    traces: dict[Channel, PowerTrace],
    lib: BasisPulseLibrary,
    device: Device,
    params: ReconstructionParams,
) -> ReconstructedCircuit:
    """Recover (gate, qubits, start) triples from per-channel power traces.

    Phase 1 walks control channels, identifying cx gates (the directed edge
    is whichever control channel carries the pulse) and removing their full
    pulse sets. Phase 2 walks drive channels: staged boundaries find x then
    sx; a uniform boundary classifies by run length. Unmatched segments left
    after both phases raise, carrying the partial result.
    """
    missing = [ch for ch in device.channels() if ch not in traces]
    if missing:
        raise ChannelError(f"traces missing for channels: {missing}")

    working = {
        ch: np.array(traces[ch].samples, dtype=np.float64) for ch in device.channels()
    }
    found: list[tuple[str, tuple[int, ...], int]] = []
    g = device.granularity

    def search_channel(channel, boundary, gates=None):
        hits = []
        for seg in _observed_segments(working[channel], boundary, params):
            match = match_gate(seg, channel, lib, device, params, boundary, gates)
            if match is None:
                continue
            gate, qubits = match
            entry = lib.get(gate, qubits)
            tmpl = _template(entry, channel, boundary, params)
            start = _round_nearest(seg[0] - tmpl[0], g)
            start = _refine_start(working[channel], entry, channel, start, g)
            hits.append((gate, qubits, start, entry))
        for gate, qubits, start, entry in hits:
            _remove_entry(working, entry, start)
            found.append((gate, qubits, start))

    for ch in device.channels():
        if ch.kind == CONTROL:
            search_channel(ch, params.cx_boundary)

    for ch in device.channels():
        if ch.kind != DRIVE:
            continue
        if params.staged:
            b_hi, b_lo = params.boundary
            search_channel(ch, b_hi, gates=("x",))
            search_channel(ch, b_lo, gates=("sx",))
        else:
            search_channel(ch, params.boundary)

    leftovers = []
    for ch in device.channels():
        b_scan = params.cx_boundary if ch.kind == CONTROL else params.low_boundary
        for seg in _observed_segments(working[ch], b_scan, params):
            leftovers.append((ch, seg[0], seg[1]))

    ordered = tuple(
        sorted(
            found,
            key=lambda t: (
                t[2],
                0 if len(t[1]) == 1 else 1,
                t[1],
                t[0],
            ),
        )
    )
    result = ReconstructedCircuit(ordered)
    if leftovers:
        raise IncompleteReconstructionError(leftovers, result)
    return result
