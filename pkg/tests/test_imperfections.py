import math

import numpy as np
import pytest

from brute_force import two_photon_distinguishable
from pbsgates.devices import HeraldPolicy, device_inputs, simulate
from pbsgates.imperfections import (
    DEFAULT_COHERENCE_LENGTH_UM,
    ExtinctionSpec,
    VisibilityModel,
    coupler_coincidence,
    error_report,
    fit_visibility,
    input_error,
    run_distinguishable,
    run_with_visibility,
)
from pbsgates.qubit import QubitState

S = 1 / math.sqrt(2)
COUPLER = np.array([[1, 1], [1, -1]]) * S
ZERO, ONE, PLUS = QubitState.zero(), QubitState.one(), QubitState.plus()


def classical_error(device, control, target):
    """Error of the distinguishable run from labeled-photon enumeration."""
    q1, q2 = device_inputs(device, control, target)
    parts = two_photon_distinguishable(device, q1.vector, q2.vector)[False]
    if device == "dcnot":
        ideal = control.vector[0] * target.vector + control.vector[1] * target.vector[::-1]
    else:
        ideal = target.vector * control.vector
    ideal = ideal / np.linalg.norm(ideal)
    total = sum(p for p, _ in parts)
    return 1 - sum(p * abs(np.vdot(ideal, v)) ** 2 for p, v in parts) / total


class TestModels:
    def test_delay_zero_is_unit_visibility(self):
        assert VisibilityModel(delay=0.0).overlap == 1.0

    def test_delay_gaussian(self):
        m = VisibilityModel(delay=DEFAULT_COHERENCE_LENGTH_UM)
        assert m.overlap == pytest.approx(math.exp(-1))

    def test_default_coherence_length(self):
        assert DEFAULT_COHERENCE_LENGTH_UM == pytest.approx(49.28, abs=0.01)

    @pytest.mark.parametrize("v", [-0.1, 1.1])
    def test_range(self, v):
        with pytest.raises(ValueError):
            VisibilityModel(v)

    def test_leak_range(self):
        with pytest.raises(ValueError):
            ExtinctionSpec(1.0)


class TestDistinguishable:
    def test_dcnot_worse_than_ideal(self):
        out = run_distinguishable("dcnot", (ZERO, ONE))
        assert out.output_distribution()["1"] < 1
        assert 1 - out.output_distribution()["1"] == pytest.approx(classical_error("dcnot", ONE, ZERO))

    def test_parity_rejection_survives(self):
        assert run_distinguishable("parity", (ZERO, ONE)).success_probability == 0

    def test_matches_labeled_enumeration(self, rng):
        for device in ("parity", "dcnot"):
            for _ in range(10):
                c, t = QubitState.random(rng), QubitState.random(rng)
                out = run_distinguishable(device, device_inputs(device, c, t))
                ideal = simulate(device, device_inputs(device, c, t)).logical_vector()
                assert 1 - out.fidelity(ideal) == pytest.approx(classical_error(device, c, t), abs=1e-10)
                q1, q2 = device_inputs(device, c, t)
                ref = two_photon_distinguishable(device, q1.vector, q2.vector)[False]
                assert out.success_probability == pytest.approx(sum(p for p, _ in ref), abs=1e-12)

    def test_hom_no_dip(self):
        assert coupler_coincidence(COUPLER, distinguishable=True) == pytest.approx(0.5, abs=1e-12)
        assert coupler_coincidence(COUPLER, distinguishable=False) == pytest.approx(0, abs=1e-12)

    def test_cnot_unsupported(self):
        with pytest.raises(ValueError):
            run_distinguishable("cnot", (ZERO, ZERO))


class TestVisibilityMixture:
    def test_unit_visibility_is_ideal(self):
        ideal = simulate("dcnot", (PLUS, ONE))
        mixed = run_with_visibility("dcnot", (PLUS, ONE), VisibilityModel(1.0))
        assert mixed.success_probability == ideal.success_probability
        assert mixed.logical_output.amplitudes == ideal.logical_output.amplitudes

    def test_zero_visibility_is_distinguishable(self):
        a = run_with_visibility("dcnot", (ZERO, ONE), VisibilityModel(0.0))
        b = run_distinguishable("dcnot", (ZERO, ONE))
        assert a.success_probability == b.success_probability
        assert a.output_distribution() == b.output_distribution()

    def test_intermediate(self):
        errs = [input_error("dcnot", ONE, ZERO, VisibilityModel(v)) for v in (1.0, 0.8, 0.0)]
        assert errs[0] < errs[1] < errs[2]
        # w = v^2 mixture with equal component success probabilities
        assert errs[1] == pytest.approx((1 - 0.64) * errs[2])

    @pytest.mark.parametrize("v", [0.0, 0.3, 0.7, 1.0])
    def test_valid_probabilities(self, rng, v):
        for device in ("parity", "dcnot"):
            for _ in range(5):
                out = run_with_visibility(device, (QubitState.random(rng), QubitState.random(rng)), VisibilityModel(v))
                assert 0 <= out.success_probability <= 1
                dist = out.output_distribution()
                assert all(p >= 0 for p in dist.values())
                assert sum(dist.values()) == pytest.approx(1, abs=1e-12)

    def test_ideal_limits_reproduce_ideal_module(self, rng):
        for device in ("parity", "dcnot"):
            for policy in HeraldPolicy:
                inputs = (QubitState.random(rng), QubitState.random(rng))
                a = simulate(device, inputs, policy)
                b = run_with_visibility(device, inputs, VisibilityModel(1.0), policy, ExtinctionSpec(0.0))
                assert a.success_probability == b.success_probability
                for x, y in zip(a.branches, b.branches):
                    assert x.state.amplitudes == y.state.amplitudes

    def test_leak_degrades(self):
        leaky = run_with_visibility("dcnot", (ZERO, ZERO), VisibilityModel(1.0), extinction=ExtinctionSpec(0.2))
        assert leaky.output_distribution()["0"] < 1
        rep = error_report("dcnot", VisibilityModel(1.0), extinction=ExtinctionSpec(0.2), n_random=10)
        assert rep.worst_case_error > 0


class TestErrorReport:
    def test_ideal(self):
        rep = error_report("dcnot", VisibilityModel(1.0), n_random=20)
        assert rep.worst_case_error < 1e-12
        assert rep.mean_error < 1e-12

    def test_classical_baseline(self):
        rep = error_report("dcnot", VisibilityModel(0.0), n_random=0)
        expected = max(classical_error("dcnot", QubitState.basis(c), QubitState.basis(t)) for c in (0, 1) for t in (0, 1))
        assert rep.worst_case_error == pytest.approx(expected)
        assert expected == pytest.approx(0.5)

    def test_parity_off_parity_rows_excluded(self):
        rep = error_report("parity", VisibilityModel(0.5), n_random=0)
        assert rep.basis_errors[1] is None and rep.basis_errors[2] is None

    def test_fitted_visibility(self):
        v = fit_visibility("dcnot", 0.17)
        # worst error = (1 - v^2) * 0.5 for the basis inputs
        assert v == pytest.approx(math.sqrt(1 - 0.34), abs=1e-8)
        rep = error_report("dcnot", VisibilityModel(v))
        assert rep.worst_case_error == pytest.approx(0.17, abs=1e-6)
        assert rep.mean_error < rep.worst_case_error
        assert input_error("dcnot", ZERO, PLUS, VisibilityModel(v)) < 0.01

    @pytest.mark.parametrize("device", ["parity", "dcnot"])
    def test_monotone(self, device):
        vs = np.linspace(0, 1, 11)
        reps = [error_report(device, VisibilityModel(v), n_random=20) for v in vs]
        worst = [r.worst_case_error for r in reps]
        mean = [r.mean_error for r in reps]
        assert all(a >= b - 1e-12 for a, b in zip(worst, worst[1:]))
        assert all(a >= b - 1e-12 for a, b in zip(mean, mean[1:]))

    def test_unreachable_target(self):
        with pytest.raises(ValueError):
            fit_visibility("dcnot", 0.9)
