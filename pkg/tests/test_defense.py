import math

import numpy as np
import pytest

from qsca.circuit import Circuit, GateApp
from qsca.defense import (
    equivalent_up_to_phase,
    strip_rz,
    substitute,
    substitution_rules,
    u3_sequence,
)
from qsca.devicegen import gen_random_circuit
from qsca.scheduler import schedule
from qsca.tracegen import total_power

PI = math.pi


def one_qubit(seq):
    return Circuit(1, tuple(seq))


class TestU3Sequence:
    def test_structure(self):
        seq = u3_sequence(0.3, 0.5, 0.7)
        assert [op.gate for op in seq] == ["rz", "sx", "rz", "sx", "rz"]
        assert seq[0].angle == pytest.approx(0.7 - PI / 2)
        assert seq[2].angle == pytest.approx(PI - 0.3)
        assert seq[4].angle == pytest.approx(0.5 - PI / 2)

    def test_triple_for_x(self):
        # the oracle fixes the convention: (pi, 0, 0) lands on x
        assert equivalent_up_to_phase(
            one_qubit(u3_sequence(PI, 0.0, 0.0)), one_qubit([GateApp("x", (0,))])
        )

    def test_triple_for_sx(self):
        assert equivalent_up_to_phase(
            one_qubit(u3_sequence(PI / 2, 0.0, 0.0)), one_qubit([GateApp("sx", (0,))])
        )

    def test_theta_zero_collapses_to_rz(self):
        for phi, lam in [(0.4, 1.1), (2.0, -0.3), (0.0, 0.0)]:
            assert equivalent_up_to_phase(
                one_qubit(u3_sequence(0.0, phi, lam)),
                one_qubit([GateApp("rz", (0,), phi + lam)]),
            )


class TestRules:
    def test_rules_certified(self):
        rules = substitution_rules()
        assert set(rules) == {"x", "sx"}
        for gate, rule in rules.items():
            assert any(op.gate == "rz" for op in rule.replacement)
            assert equivalent_up_to_phase(
                one_qubit([GateApp(gate, (0,))]), one_qubit(rule.replacement)
            )

    def test_stripping_breaks_equivalence(self):
        rules = substitution_rules()
        for gate, rule in rules.items():
            stripped = strip_rz(one_qubit(rule.replacement))
            assert not equivalent_up_to_phase(one_qubit([GateApp(gate, (0,))]), stripped)


class TestEquivalence:
    def test_self(self, line3):
        device, _ = line3
        c = gen_random_circuit(device, 10, seed=0)
        assert equivalent_up_to_phase(c, c)

    def test_sx_sx_equals_x(self):
        a = one_qubit([GateApp("x", (0,))])
        b = one_qubit([GateApp("sx", (0,)), GateApp("sx", (0,))])
        assert equivalent_up_to_phase(a, b)

    def test_x_vs_sx_not_equivalent(self):
        a = one_qubit([GateApp("x", (0,))])
        b = one_qubit([GateApp("sx", (0,))])
        assert not equivalent_up_to_phase(a, b)


class TestSubstitute:
    def test_prob_zero_identity(self, line3):
        device, _ = line3
        c = gen_random_circuit(device, 20, seed=1)
        assert substitute(c, 0.0, seed=5) == c

    def test_prob_one_on_single_x(self):
        c = one_qubit([GateApp("x", (0,))])
        out = substitute(c, 1.0, seed=0)
        assert len(out.ops) == len(substitution_rules()["x"].replacement)
        assert equivalent_up_to_phase(c, out)

    def test_determinism(self, line3):
        device, _ = line3
        c = gen_random_circuit(device, 25, seed=2)
        assert substitute(c, 0.5, seed=9) == substitute(c, 0.5, seed=9)

    def test_cx_and_rz_untouched(self, line3):
        device, _ = line3
        c = Circuit(
            3,
            (GateApp("cx", (0, 1)), GateApp("rz", (2,), 0.7), GateApp("x", (1,))),
        )
        out = substitute(c, 1.0, seed=3)
        assert out.ops[0] == c.ops[0]
        assert out.ops[1] == c.ops[1]
        assert len(out.ops) > 3

    def test_equivalence_sweep(self, line3):
        device, _ = line3
        for prob in (0.25, 0.5, 1.0):
            for seed in range(17):
                c = gen_random_circuit(device, 12, seed=400 + seed, rz_fraction=0.2)
                out = substitute(c, prob, seed=seed)
                assert equivalent_up_to_phase(c, out)

    def test_substitution_changes_trace(self, line3):
        device, lib = line3
        c = Circuit(3, (GateApp("x", (0,)), GateApp("cx", (0, 1))))
        out = substitute(c, 1.0, seed=0)
        assert len(out.ops) > len(c.ops)
        t0 = total_power(schedule(c, lib, device))
        t1 = total_power(schedule(out, lib, device))
        from qsca.metrics import circuit_dist

        assert circuit_dist(t0, t1) > 0

    def test_any_fired_substitution_changes_trace(self, line3):
        from qsca.metrics import circuit_dist

        device, lib = line3
        changed = 0
        for seed in range(20):
            c = gen_random_circuit(device, 10, seed=500 + seed)
            out = substitute(c, 0.4, seed=seed)
            if out == c:
                continue
            changed += 1
            t0 = total_power(schedule(c, lib, device))
            t1 = total_power(schedule(out, lib, device))
            assert circuit_dist(t0, t1) > 0
        assert changed > 0

    def test_defense_rz_angles_invisible(self, line3):
        device, lib = line3
        c = gen_random_circuit(device, 15, seed=6)
        out = substitute(c, 0.7, seed=11)
        rng = np.random.default_rng(0)
        twisted_ops = tuple(
            GateApp("rz", op.qubits, float(rng.uniform(0, 2 * PI)))
            if op.gate == "rz"
            else op
            for op in out.ops
        )
        twisted = Circuit(out.num_qubits, twisted_ops)
        a = total_power(schedule(out, lib, device))
        b = total_power(schedule(twisted, lib, device))
        assert np.array_equal(a.samples, b.samples)
