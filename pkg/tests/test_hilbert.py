import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from esu.hilbert import (
    DecompositionCache,
    HermitianMatrix,
    PiecewisePropagator,
    StateVector,
    TwoTermHamiltonian,
    eig_hermitian,
    energy_stats,
    propagate_step,
    propagate_piecewise,
)


def random_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_state(dim, seed, tag="t"):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(tag, v / np.linalg.norm(v))


class TestStateVector:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            StateVector("t", np.array([1.0, 1.0]))

    def test_overlap_and_survival(self):
        a = StateVector("t", np.array([1.0, 0.0]))
        b = StateVector("t", np.array([1.0, 1.0]) / np.sqrt(2))
        assert a.overlap(b) == pytest.approx(1 / np.sqrt(2))
        assert a.survival(b) == pytest.approx(0.5)

    def test_basis_mismatch(self):
        a = StateVector("x", np.array([1.0, 0.0]))
        b = StateVector("y", np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            a.overlap(b)


class TestHermitianMatrix:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            HermitianMatrix("t", np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_accepts_hermitian(self):
        h = HermitianMatrix("t", np.array([[1.0, 2j], [-2j, 3.0]]))
        assert h.dim == 2


class TestEig:
    def test_reconstruction(self):
        h = HermitianMatrix("t", random_hermitian(12, 0))
        dec = eig_hermitian(h)
        v, w = dec.eigenvectors, dec.eigenvalues
        assert np.allclose(v @ np.diag(w) @ v.conj().T, h.entries, atol=1e-10)
        assert np.all(np.diff(w) >= 0)

    def test_phase_convention(self):
        # First significant component of every eigenvector is real positive,
        # so decompositions are reproducible across LAPACK builds.
        dec = eig_hermitian(HermitianMatrix("t", random_hermitian(9, 4)))
        for k in range(9):
            col = dec.eigenvectors[:, k]
            lead = col[np.flatnonzero(np.abs(col) > 1e-9)[0]]
            assert lead.imag == pytest.approx(0.0, abs=1e-12)
            assert lead.real > 0

    def test_state_accessor(self):
        dec = eig_hermitian(HermitianMatrix("t", random_hermitian(5, 1)))
        ground = dec.state(0)
        assert ground.basis_tag == "t"
        assert np.array_equal(ground.amplitudes, dec.eigenvectors[:, 0])


def test_cache_returns_same_decomposition():
    cache = DecompositionCache()
    h = HermitianMatrix("t", random_hermitian(6, 2))
    first = cache.decompose("k", h)
    second = cache.decompose("k", h)
    assert first is second
    assert len(cache) == 1


class TestPropagateStep:
    def test_matches_expm(self):
        h = HermitianMatrix("t", random_hermitian(8, 3))
        psi = random_state(8, 5)
        out = propagate_step(h, psi, 0.37)
        expect = expm(-1j * h.entries * 0.37) @ psi.amplitudes
        assert np.allclose(out.amplitudes, expect, atol=1e-12)

    def test_identity_at_zero_dt(self):
        h = HermitianMatrix("t", random_hermitian(4, 6))
        psi = random_state(4, 7)
        out = propagate_step(h, psi, 0.0)
        assert np.allclose(out.amplitudes, psi.amplitudes, atol=1e-14)

    @settings(max_examples=25, deadline=None, derandomize=True)
    @given(
        seed=st.integers(0, 10_000),
        dt=st.floats(-3.0, 3.0, allow_nan=False),
    )
    def test_unitarity(self, seed, dt):
        h = HermitianMatrix("t", random_hermitian(5, seed))
        psi = random_state(5, seed + 1)
        out = propagate_step(h, psi, dt)
        assert np.linalg.norm(out.amplitudes) == pytest.approx(1.0, abs=1e-10)


class TestEnergyStats:
    def test_eigenstate_has_zero_fluctuation(self):
        h = HermitianMatrix("t", random_hermitian(7, 8))
        dec = eig_hermitian(h)
        energy, fluct = energy_stats(h, dec.state(3))
        assert energy == pytest.approx(dec.eigenvalues[3], abs=1e-10)
        assert fluct == pytest.approx(0.0, abs=1e-6)

    def test_two_level_mixture(self):
        h = HermitianMatrix("t", np.diag([1.0, 3.0]))
        psi = StateVector("t", np.array([1.0, 1.0]) / np.sqrt(2))
        energy, fluct = energy_stats(h, psi)
        assert energy == pytest.approx(2.0)
        assert fluct == pytest.approx(1.0)


def two_term_problem(dim, seed, tag="t"):
    rng = np.random.default_rng(seed)
    h0 = random_hermitian(dim, seed)
    h1 = np.diag(rng.normal(size=dim))
    return TwoTermHamiltonian(tag, h0, h1)


class TestPiecewisePropagator:
    def test_assemble(self):
        tt = two_term_problem(6, 9)
        assembled = tt.assemble(0.5, -2.0)
        assert np.allclose(assembled.entries, 0.5 * tt.h0 - 2.0 * tt.h1)

    @pytest.mark.parametrize("dim", [6, 80])
    def test_matches_expm_product(self, dim):
        # dim=6 exercises the dense path, dim=80 the polynomial path.
        tt = two_term_problem(dim, 10)
        prop = PiecewisePropagator(tt)
        assert prop.dense == (dim <= 64)
        psi = random_state(dim, 11)
        cs, fs, dts = [1.0, 0.8, 1.2], [0.3, -0.5, 0.9], [0.21, 0.33, 0.11]
        out = prop.propagate(psi, cs, fs, dts)
        expect = psi.amplitudes
        for c, f, dt in zip(cs, fs, dts):
            expect = expm(-1j * (c * tt.h0 + f * tt.h1) * dt) @ expect
        assert np.max(np.abs(out.amplitudes - expect)) < 1e-11

    def test_negative_dt_inverts(self):
        tt = two_term_problem(90, 12)
        prop = PiecewisePropagator(tt)
        psi = random_state(90, 13)
        there = prop.propagate(psi, [1.0], [2.0], [0.4])
        back = prop.propagate(there, [1.0], [2.0], [-0.4])
        assert np.max(np.abs(back.amplitudes - psi.amplitudes)) < 1e-11

    def test_step_constant_matches_propagate(self):
        tt = two_term_problem(70, 14)
        prop = PiecewisePropagator(tt)
        psi = random_state(70, 15)
        a = prop.step_constant(psi.amplitudes, 0.7, 1.1, 0.25)
        b = prop.propagate(psi, [0.7], [1.1], [0.25]).amplitudes
        assert np.array_equal(a, b)

    def test_empty_sequence_is_identity(self):
        tt = two_term_problem(5, 16)
        psi = random_state(5, 17)
        out = PiecewisePropagator(tt).propagate(psi, [], [], [])
        assert out is psi


def test_propagate_piecewise_wrapper():
    tt = two_term_problem(6, 18)
    psi = random_state(6, 19)
    a = propagate_piecewise(tt, psi, [1.0, 1.0], [0.2, 0.4], 0.3)
    b = PiecewisePropagator(tt).propagate(psi, [1.0, 1.0], [0.2, 0.4], 0.3)
    assert np.array_equal(a.amplitudes, b.amplitudes)
