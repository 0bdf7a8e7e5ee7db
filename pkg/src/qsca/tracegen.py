"""Power trace synthesis from schedules.

Per-channel power is the squared norm of the complex pulse amplitude series;
the total trace is the equal-weight sum over all channels. Traces have one
sample per device dt and length equal to the schedule span.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .device import Channel, sample_envelope
from .errors import ChannelError, DegenerateTraceError
from .scheduler import Schedule, schedule_span


@dataclass(frozen=True)
class PowerTrace:
    """Uniformly sampled power series; channel is None for the total trace."""

    samples: np.ndarray
    channel: Channel | None = None

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class ScalarStats:
    """Energy (sum of power), duration (trace length), and mean power."""

    energy: float
    duration: int
    mean_power: float


def channel_amplitude(s: Schedule, ch: Channel) -> np.ndarray:
    """Complex amplitude series of one channel over the schedule span."""
    if not s.device.has_channel(ch):
        raise ChannelError(f"{ch} does not belong to {s.device.name}")
    out = np.zeros(schedule_span(s), dtype=np.complex128)
    for item in s.items:
        if item.channel == ch:
            env = sample_envelope(item.shape)
            out[item.start : item.start + len(env)] += env
    return out


def _channel_power(s: Schedule, ch: Channel) -> np.ndarray:
    amp = channel_amplitude(s, ch)
    return amp.real**2 + amp.imag**2


def per_channel_power(s: Schedule) -> dict[Channel, PowerTrace]:
    """Power trace of every device channel (idle channels are all-zero)."""
    return {
        ch: PowerTrace(_channel_power(s, ch), channel=ch) for ch in s.device.channels()
    }


def total_power(s: Schedule) -> PowerTrace:
    """Equal-weight sum of the per-channel power traces."""
    out = np.zeros(schedule_span(s), dtype=np.float64)
    for ch in s.device.channels():
        out += _channel_power(s, ch)
    return PowerTrace(out)


def scalar_stats(t: PowerTrace) -> ScalarStats:
    """Energy, duration, and mean power of a trace (duration must be > 0)."""
    duration = len(t)
    if duration == 0:
        raise DegenerateTraceError("mean power undefined on an empty trace")
    energy = float(np.sum(t.samples))
    return ScalarStats(energy=energy, duration=duration, mean_power=energy / duration)


def add_noise(t: PowerTrace, sigma: float, seed: int) -> PowerTrace:
    """Add i.i.d. zero-mean Gaussian noise per sample (may go negative)."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    noise = np.random.default_rng(seed).normal(0.0, sigma, size=len(t))
    return PowerTrace(t.samples + noise, channel=t.channel)


def write_trace_csv(t: PowerTrace, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["index", "power"])
        for i, p in enumerate(t.samples):
            writer.writerow([i, repr(float(p))])


def read_trace_csv(path) -> PowerTrace:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != ["index", "power"]:
            raise ValueError(f"unexpected trace header {header!r}")
        samples = [float(row[1]) for row in reader]
    return PowerTrace(np.array(samples, dtype=np.float64))


def write_traces_json(traces: dict[Channel, PowerTrace], path) -> None:
    payload = {str(ch): [float(x) for x in tr.samples] for ch, tr in traces.items()}
    with open(path, "w") as f:
        json.dump(payload, f)
        f.write("\n")


def read_traces_json(path) -> dict[Channel, PowerTrace]:
    with open(path) as f:
        payload = json.load(f)
    return {
        Channel.parse(key): PowerTrace(np.array(vals, dtype=np.float64), channel=Channel.parse(key))
        for key, vals in payload.items()
    }
