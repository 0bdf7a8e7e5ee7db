import math

import mpmath
import numpy as np
import pytest

from qsca.device import (
    BasisPulseLibrary,
    Channel,
    Device,
    LibraryEntry,
    PulsePlacement,
    drag,
    gaussian_square,
    lookup_basis_pulses,
    sample_drag,
    sample_envelope,
    sample_gaussian_square,
    validate_library,
)
from qsca.errors import (
    InvalidShapeError,
    ShapeMismatchError,
    UnsupportedGateError,
)

mpmath.mp.dps = 60


def mp_drag_sample(t, d, amp, sigma, beta):
    """Independent arbitrary-precision evaluation of the DRAG formula."""
    mu = mpmath.mpf(d - 1) / 2
    sig = mpmath.mpf(sigma)
    g = lambda x: mpmath.e ** (-((x - mu) ** 2) / (2 * sig**2))
    g_edge = g(mpmath.mpf(-1))
    lifted = (g(t) - g_edge) / (1 - g_edge)
    deriv = -(t - mu) / sig**2 * g(t)
    return complex(amp) * complex(float(lifted), 0) + complex(amp) * 1j * beta * float(deriv)


def mp_gs_sample(t, d, amp, sigma, width):
    """Independent arbitrary-precision evaluation of the Gaussian-square formula."""
    sig = mpmath.mpf(sigma)
    r = mpmath.mpf(d - width) / 2
    def raw(x):
        x = mpmath.mpf(x)
        if x < r:
            return mpmath.e ** (-((x - r) ** 2) / (2 * sig**2))
        if x > r + width:
            return mpmath.e ** (-((x - (r + width)) ** 2) / (2 * sig**2))
        return mpmath.mpf(1)
    base = raw(0)
    return complex(amp) * float((raw(t) - base) / (1 - base))


class TestDevice:
    def test_basic_construction(self):
        d = Device(name="d", num_qubits=3, edges=((0, 1), (1, 0), (1, 2)))
        assert d.drive(2) == Channel("drive", 2)
        assert d.control((1, 0)) == Channel("control", 1)
        assert len(d.channels()) == 6

    def test_rejects_bad_edges(self):
        with pytest.raises(ValueError):
            Device(name="d", num_qubits=2, edges=((0, 0),))
        with pytest.raises(ValueError):
            Device(name="d", num_qubits=2, edges=((0, 3),))
        with pytest.raises(ValueError):
            Device(name="d", num_qubits=2, edges=((0, 1), (0, 1)))

    def test_json_round_trip(self, tmp_path):
        d = Device(name="rt", num_qubits=2, edges=((0, 1), (1, 0)))
        d.save(tmp_path / "device.json")
        assert Device.load(tmp_path / "device.json") == d


class TestDragSampler:
    def test_zero_amp_gives_zeros(self):
        series = sample_drag(drag(160, 0.0, 40.0, 1.2))
        assert np.array_equal(series, np.zeros(160, dtype=complex))

    def test_center_and_symmetry(self):
        # odd duration puts the center exactly on sample (d-1)/2
        series = sample_drag(drag(161, 1.0, 40.0, 0.0))
        assert series[80] == pytest.approx(1.0)
        assert np.allclose(series, series[::-1])
        assert np.all(series.imag == 0)

    def test_matches_high_precision_oracle(self):
        d, amp, sigma, beta = 160, 0.2, 40.0, 1.5
        series = sample_drag(drag(d, amp, sigma, beta))
        for t in range(d):
            want = mp_drag_sample(t, d, amp, sigma, beta)
            assert series[t] == pytest.approx(want, abs=1e-15)

    def test_beta_zero_is_real_lifted_gaussian(self):
        series = sample_drag(drag(160, 0.25, 30.0, 0.0))
        assert np.all(series.imag == 0)
        # lifting subtracts g(-1), so the edge sits just above zero
        mu, sig = 159 / 2, 30.0
        g0 = math.exp(-(mu**2) / (2 * sig**2))
        g_edge = math.exp(-((-1 - mu) ** 2) / (2 * sig**2))
        assert series[0].real == pytest.approx(0.25 * (g0 - g_edge) / (1 - g_edge), rel=1e-12)

    def test_length_and_max_magnitude(self):
        for dur, amp, sigma, beta in [(160, 0.3, 40.0, 2.0), (96, 0.9, 10.0, -1.5)]:
            series = sample_drag(drag(dur, amp, sigma, beta))
            assert len(series) == dur
            assert np.max(np.abs(series)) <= abs(amp) + 1e-12

    def test_variant_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            sample_drag(gaussian_square(64, 0.5, 16.0, 32))


class TestGaussianSquareSampler:
    def test_zero_amp(self):
        series = sample_gaussian_square(gaussian_square(704, 0.0, 64.0, 448))
        assert np.array_equal(series, np.zeros(704, dtype=complex))

    def test_near_degenerate_flat_top(self):
        series = sample_gaussian_square(gaussian_square(64, 1.0, 16.0, 62))
        # flat region spans [r, r+w] = [1, 63]
        assert np.all(series[1:64].real == 1.0)

    def test_first_sample_exactly_zero(self):
        series = sample_gaussian_square(gaussian_square(704, 0.5 + 0.1j, 64.0, 448))
        assert series[0] == 0

    def test_matches_high_precision_oracle(self):
        d, amp, sigma, w = 704, 0.5 + 0.1j, 64.0, 448
        series = sample_gaussian_square(gaussian_square(d, amp, sigma, w))
        for t in range(0, d, 7):
            want = mp_gs_sample(t, d, amp, sigma, w)
            assert series[t] == pytest.approx(want, abs=1e-15)

    def test_invalid_width(self):
        with pytest.raises(InvalidShapeError):
            gaussian_square(64, 0.5, 16.0, 64)

    def test_max_magnitude(self):
        series = sample_gaussian_square(gaussian_square(704, 0.5 + 0.1j, 64.0, 448))
        assert len(series) == 704
        assert np.max(np.abs(series)) <= abs(0.5 + 0.1j) + 1e-12

    def test_variant_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            sample_gaussian_square(drag(160, 0.1, 40.0, 0.0))


class TestLibrary:
    def test_lookup_rz_is_empty(self, h7):
        _, lib = h7
        entry = lookup_basis_pulses(lib, "rz", (3,))
        assert entry.pulses == ()
        assert entry.span == 0

    def test_lookup_x(self, h7):
        _, lib = h7
        entry = lookup_basis_pulses(lib, "x", (0,))
        assert len(entry.pulses) == 1
        p = entry.pulses[0]
        assert p.channel == Channel("drive", 0)
        assert p.offset == 0
        assert p.shape.variant == "drag"

    def test_lookup_missing_edge(self, h7):
        device, lib = h7
        # (0, 2) is not a coupling on the H shape
        with pytest.raises(UnsupportedGateError):
            lookup_basis_pulses(lib, "cx", (0, 2))

    def test_lookup_identity_carries_delay(self, h7):
        _, lib = h7
        entry = lookup_basis_pulses(lib, "i", (2,))
        assert entry.pulses == ()
        assert entry.delay == 160

    def test_generated_library_is_valid(self, h7):
        device, lib = h7
        assert validate_library(lib, device) == []

    def test_missing_sx_coverage_violation(self, h7):
        device, lib = h7
        pruned = BasisPulseLibrary(
            {k: v for k, v in lib.entries.items() if k != ("sx", (2,))}
        )
        violations = validate_library(pruned, device)
        assert len(violations) == 1
        assert "sx" in violations[0] and "(2,)" in violations[0]

    def test_granularity_violation(self, h7):
        device, lib = h7
        edge = device.edges[0]
        bad = BasisPulseLibrary(dict(lib.entries))
        shape = gaussian_square(300, 0.3, 64.0, 200)  # 300 % 16 != 0
        bad.entries[("cx", edge)] = LibraryEntry(
            "cx", edge, (PulsePlacement(device.control(edge), 0, shape),)
        )
        violations = validate_library(bad, device)
        assert any("300" in v and "granularity" in v for v in violations)

    def test_sx_half_amplitude_violation(self, h7):
        device, lib = h7
        bad = BasisPulseLibrary(dict(lib.entries))
        x0 = lib.get("x", (0,)).pulses[0]
        bad.entries[("sx", (0,))] = LibraryEntry(
            "sx", (0,), (PulsePlacement(x0.channel, 0, x0.shape),)
        )
        violations = validate_library(bad, device)
        assert any("half" in v for v in violations)

    def test_json_round_trip_bit_identical_envelopes(self, h7, tmp_path):
        device, lib = h7
        lib.save(tmp_path / "library.json")
        lib2 = BasisPulseLibrary.load(tmp_path / "library.json")
        assert set(lib2.entries) == set(lib.entries)
        for key, entry in lib.entries.items():
            for p, p2 in zip(entry.pulses, lib2.entries[key].pulses):
                assert np.array_equal(sample_envelope(p.shape), sample_envelope(p2.shape))

    def test_reserialization_is_byte_identical(self, h7, tmp_path):
        _, lib = h7
        lib.save(tmp_path / "a.json")
        BasisPulseLibrary.load(tmp_path / "a.json").save(tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_channel_string_round_trip():
    for ch in (Channel("drive", 0), Channel("control", 11)):
        assert Channel.parse(str(ch)) == ch
