import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from pbsgates.fock import (
    MAX_MODES,
    MAX_PHOTONS,
    PhotonicState,
    SingleParticleUnitary,
    apply_unitary,
    drop_paths,
    fidelity,
    inject_photon,
    inner_product,
    permanent,
    tensor,
    transition_amplitude_oracle,
    vacuum,
)
from pbsgates.qubit import QubitState

S = 1 / math.sqrt(2)
COUPLER = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def single(paths, path, a, b):
    return inject_photon(vacuum(paths), path, QubitState(a, b))


def random_state(rng, n_paths, n_photons, n_terms=4):
    occs = set()
    for _ in range(n_terms):
        occ = [0] * (2 * n_paths)
        for k in rng.integers(0, 2 * n_paths, size=n_photons):
            occ[k] += 1
        occs.add(tuple(occ))
    amps = rng.normal(size=len(occs)) + 1j * rng.normal(size=len(occs))
    amps /= np.linalg.norm(amps)
    return PhotonicState(tuple(range(n_paths)), dict(zip(occs, amps)), n_photons)


def random_unitary(rng, n):
    return SingleParticleUnitary(unitary_group.rvs(n, random_state=rng))


class TestInjectPhoton:
    def test_basis_injection(self):
        s = single([1, 2], 1, 1, 0)
        assert s.amplitudes == {(1, 0, 0, 0): 1}
        assert s.n_photons == 1

    def test_diagonal(self):
        s = single([1, 2], 1, S, S)
        assert s.amplitudes == pytest.approx({(1, 0, 0, 0): S, (0, 1, 0, 0): S})

    def test_twenty_degree_input(self):
        s = inject_photon(vacuum([1, 2]), 1, QubitState.normalized(0.94, 0.34))
        amps = s.amplitudes
        assert amps[(1, 0, 0, 0)] / amps[(0, 1, 0, 0)] == pytest.approx(0.94 / 0.34)
        assert s.norm_squared() == pytest.approx(1.0)

    def test_unknown_path(self):
        with pytest.raises(KeyError):
            inject_photon(vacuum([1, 2]), 3, QubitState.zero())

    def test_non_normalized_qubit(self):
        with pytest.raises(ValueError):
            inject_photon(vacuum([1]), 1, (0.94, 0.34))

    def test_occupied_path(self):
        s = single([1], 1, 1, 0)
        with pytest.raises(ValueError):
            inject_photon(s, 1, QubitState.one())


class TestApplyUnitary:
    def test_identity(self, rng):
        s = random_state(rng, 3, 3)
        out = apply_unitary(s, SingleParticleUnitary.identity(6))
        assert out.amplitudes == pytest.approx(s.amplitudes)

    def test_hong_ou_mandel(self):
        # 50/50 coupler between the H modes of paths a and b
        u = SingleParticleUnitary.on_paths(["a", "b"], ["a", "b"], np.eye(4))
        full = np.eye(4, dtype=complex)
        full[np.ix_([0, 2], [0, 2])] = COUPLER
        s = inject_photon(single(["a", "b"], "a", 1, 0), "b", QubitState.zero())
        out = apply_unitary(apply_unitary(s, u), SingleParticleUnitary(full))
        # expected amplitudes from the permanent oracle on the 2x2 coupler
        expected = {
            (2, 0, 0, 0): transition_amplitude_oracle(COUPLER, [1, 1], [2, 0]),
            (0, 0, 2, 0): transition_amplitude_oracle(COUPLER, [1, 1], [0, 2]),
        }
        assert expected[(2, 0, 0, 0)] == pytest.approx(S)
        assert expected[(0, 0, 2, 0)] == pytest.approx(-S)
        assert out.amplitudes == pytest.approx(expected)
        assert (1, 0, 1, 0) not in out.amplitudes

    def test_permutation(self):
        swap_v = np.eye(4)
        swap_v[np.ix_([1, 3], [1, 3])] = [[0, 1], [1, 0]]
        s = single([1, 2], 1, 0, 1)
        out = apply_unitary(s, SingleParticleUnitary(swap_v))
        assert out.amplitudes == pytest.approx({(0, 0, 0, 1): 1})

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply_unitary(single([1, 2], 1, 1, 0), SingleParticleUnitary.identity(2))

    def test_non_unitary(self):
        with pytest.raises(ValueError, match="not unitary"):
            apply_unitary(single([1], 1, 1, 0), np.array([[1, 0], [0, 2]]))

    def test_homomorphism(self, rng):
        s = random_state(rng, 3, 3)
        u, v = random_unitary(rng, 6), random_unitary(rng, 6)
        two_step = apply_unitary(apply_unitary(s, u), v)
        one_step = apply_unitary(s, v @ u)
        for occ in set(two_step.amplitudes) | set(one_step.amplitudes):
            assert abs(two_step.amplitudes.get(occ, 0) - one_step.amplitudes.get(occ, 0)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_paths=st.integers(1, 4), n_photons=st.integers(1, 4))
def test_norm_and_photon_number_preserved(seed, n_paths, n_photons):
    rng = np.random.default_rng(seed)
    s = random_state(rng, n_paths, n_photons)
    out = apply_unitary(s, random_unitary(rng, 2 * n_paths))
    assert out.n_photons == n_photons
    assert all(sum(o) == n_photons for o in out.amplitudes)
    assert out.norm_squared() == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_paths=st.integers(1, 2), n_photons=st.integers(1, 3))
def test_oracle_equivalence(seed, n_paths, n_photons):
    rng = np.random.default_rng(seed)
    n_modes = 2 * n_paths
    u = random_unitary(rng, n_modes)
    occ_in = [0] * n_modes
    for k in rng.integers(0, n_modes, size=n_photons):
        occ_in[k] += 1
    lifted = apply_unitary(PhotonicState(tuple(range(n_paths)), {tuple(occ_in): 1}, n_photons), u)
    for combo in itertools.combinations_with_replacement(range(n_modes), n_photons):
        occ_out = tuple(combo.count(k) for k in range(n_modes))
        want = transition_amplitude_oracle(u, occ_in, occ_out)
        assert abs(lifted.amplitudes.get(occ_out, 0) - want) < 1e-10


class TestOracle:
    def test_identity(self):
        assert transition_amplitude_oracle(np.eye(2), [1, 1], [1, 1]) == pytest.approx(1)

    def test_bunching(self):
        assert transition_amplitude_oracle(COUPLER, [1, 1], [2, 0]) == pytest.approx(S)

    def test_hom_cancellation(self):
        assert abs(transition_amplitude_oracle(COUPLER, [1, 1], [1, 1])) < 1e-15

    def test_photon_number_mismatch(self):
        with pytest.raises(ValueError):
            transition_amplitude_oracle(np.eye(2), [1, 1], [1, 0])

    def test_permanent_small(self):
        assert permanent(np.array([[1, 2], [3, 4]])) == 10
        assert permanent(np.ones((3, 3))) == 6


class TestInnerProduct:
    def test_self_overlap(self, rng):
        s = random_state(rng, 2, 2)
        assert inner_product(s, s) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert fidelity(single([1], 1, 1, 0), single([1], 1, 0, 1)) == 0

    def test_half_overlap(self):
        assert fidelity(single([1], 1, 1, 0), single([1], 1, S, S)) == pytest.approx(0.5)

    def test_mismatched_spaces(self):
        with pytest.raises(ValueError):
            inner_product(single([1], 1, 1, 0), single([2], 2, 1, 0))


class TestStateInvariants:
    def test_pruning(self):
        s = PhotonicState((1,), {(1, 0): 1.0, (0, 1): 1e-13}, 1)
        assert (0, 1) not in s.amplitudes

    def test_pruning_effect_on_probabilities_is_negligible(self, rng):
        s = random_state(rng, 3, 3, n_terms=8)
        u = random_unitary(rng, 6)
        m = u.matrix
        # unpruned reference: dense lift via the permanent oracle
        for occ_out, amp in apply_unitary(s, u).amplitudes.items():
            dense = sum(a * transition_amplitude_oracle(m, occ, occ_out) for occ, a in s.amplitudes.items())
            assert abs(abs(amp) ** 2 - abs(dense) ** 2) < 1e-9

    def test_wrong_photon_number(self):
        with pytest.raises(ValueError):
            PhotonicState((1,), {(1, 1): 1.0}, 1)

    def test_caps(self):
        with pytest.raises(ValueError):
            vacuum(range(MAX_MODES // 2 + 1))
        with pytest.raises(ValueError):
            PhotonicState((1,), {(MAX_PHOTONS + 1, 0): 1.0}, MAX_PHOTONS + 1)

    def test_tensor_and_drop(self):
        s = tensor(single([1], 1, 1, 0), vacuum([2]))
        assert s.paths == (1, 2)
        assert drop_paths(s, [2]).amplitudes == {(1, 0): 1}
        with pytest.raises(ValueError):
            drop_paths(s, [1])
