import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from esu.entanglement import (
    DensityMatrix,
    chain_block_entropy,
    concurrence,
    pair_density_matrix_symmetric,
    symmetric_amplitude_matrix,
    symmetric_block_entropy,
    uhlmann_fidelity,
    von_neumann_entropy,
)

BELL = np.zeros((4, 4))
BELL[0, 0] = BELL[0, 3] = BELL[3, 0] = BELL[3, 3] = 0.5


def dm(entries):
    return DensityMatrix(np.asarray(entries, dtype=complex))


def werner(p):
    return dm(p * BELL + (1 - p) * np.eye(4) / 4)


class TestDensityMatrix:
    def test_accepts_valid(self):
        rho = dm(np.eye(2) / 2)
        assert rho.dim == 2

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            dm(np.eye(2))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            dm([[0.5, 0.3], [0.0, 0.5]])

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            dm(np.diag([1.5, -0.5]))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            dm(np.ones((2, 3)))


class TestVonNeumann:
    def test_pure_state_zero(self):
        rho = np.zeros((3, 3))
        rho[1, 1] = 1.0
        assert von_neumann_entropy(dm(rho)) == pytest.approx(0.0, abs=1e-12)

    def test_maximally_mixed(self):
        assert von_neumann_entropy(dm(np.eye(8) / 8)) == pytest.approx(3.0)

    def test_qubit_mixture(self):
        rho = np.diag([0.25, 0.75])
        expect = -(0.25 * np.log2(0.25) + 0.75 * np.log2(0.75))
        assert von_neumann_entropy(dm(rho)) == pytest.approx(expect)


class TestSymmetricStates:
    def test_amplitude_matrix_shape(self):
        amps = np.ones(5) / np.sqrt(5)
        a = symmetric_amplitude_matrix(amps, 4, 2, k_values=range(5))
        assert a.shape == (3, 3)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            symmetric_amplitude_matrix(np.ones(5), 4, 2, k_values=range(5))

    def test_dicke_half_excitation_entropy(self):
        # |N=4, k=2> split 2|2 has Schmidt weights (1/6, 2/3, 1/6).
        amps = np.array([0.0, 0.0, 1.0, 0.0, 0.0])
        s = symmetric_block_entropy(amps, 4, 2, k_values=range(5))
        expect = -(np.log2(1 / 6) / 6 + 2 / 3 * np.log2(2 / 3) + np.log2(1 / 6) / 6)
        assert s == pytest.approx(expect, abs=1e-12)
        assert s == pytest.approx(1.2516291673878228, abs=1e-12)

    def test_polarized_state_is_product(self):
        amps = np.zeros(7)
        amps[0] = 1.0
        s = symmetric_block_entropy(amps, 6, 3, k_values=range(7))
        assert s == pytest.approx(0.0, abs=1e-10)

    def test_even_sector_inference(self):
        # N/2 + 1 amplitudes map onto k = 0, 2, ..., N without explicit
        # k_values.
        amps = np.zeros(5)
        amps[2] = 1.0
        explicit = symmetric_block_entropy(amps, 8, 4, k_values=[0, 2, 4, 6, 8])
        inferred = symmetric_block_entropy(amps, 8, 4)
        assert inferred == explicit

    def test_ghz_pair_reduction(self):
        # (|all up> + |all down>)/sqrt(2): pair state is diag(1/2, 0, 0, 1/2).
        amps = np.zeros(9)
        amps[0] = amps[-1] = 1 / np.sqrt(2)
        rho = pair_density_matrix_symmetric(amps, 8, k_values=range(9))
        expect = np.zeros((4, 4))
        expect[0, 0] = expect[3, 3] = 0.5
        assert np.allclose(rho.entries, expect, atol=1e-12)

    def test_w_state_pair_reduction(self):
        # One shared excitation over N=4.
        amps = np.zeros(5)
        amps[1] = 1.0
        rho = pair_density_matrix_symmetric(amps, 4, k_values=range(5))
        expect = np.array(
            [
                [0.5, 0.0, 0.0, 0.0],
                [0.0, 0.25, 0.25, 0.0],
                [0.0, 0.25, 0.25, 0.0],
                [0.0, 0.0, 0.0, 0.0],
            ]
        )
        assert np.allclose(rho.entries, expect, atol=1e-12)

    def test_ghz_concurrence_vanishes(self):
        # The GHZ pair state is separable even though the state is entangled.
        amps = np.zeros(9)
        amps[0] = amps[-1] = 1 / np.sqrt(2)
        rho = pair_density_matrix_symmetric(amps, 8, k_values=range(9))
        assert concurrence(rho) == pytest.approx(0.0, abs=1e-10)

    def test_w_state_concurrence(self):
        # C = 2/N for the W state.
        amps = np.zeros(7)
        amps[1] = 1.0
        rho = pair_density_matrix_symmetric(amps, 6, k_values=range(7))
        assert concurrence(rho) == pytest.approx(2 / 6, abs=1e-10)


class TestChainEntropy:
    def test_product_state(self):
        psi = np.zeros(16)
        psi[0] = 1.0
        assert chain_block_entropy(psi, 4, 2) == pytest.approx(0.0, abs=1e-12)

    def test_ghz_between_halves(self):
        # (|0000> + |1111>)/sqrt(2) carries one ebit across any cut.
        psi = np.zeros(16)
        psi[0] = psi[-1] = 1 / np.sqrt(2)
        assert chain_block_entropy(psi, 4, 2) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            chain_block_entropy(np.ones(10) / np.sqrt(10), 4, 2)

    def test_agrees_with_symmetric_path(self):
        # Same symmetric state through both routes.
        import math

        rng = np.random.default_rng(7)
        c = rng.normal(size=5) + 1j * rng.normal(size=5)
        c /= np.linalg.norm(c)
        fast = symmetric_block_entropy(c, 4, 2, k_values=range(5))

        psi = np.zeros(16, dtype=complex)
        for k, c_k in enumerate(c):
            weight = c_k / math.sqrt(math.comb(4, k))
            for idx in range(16):
                if bin(idx).count("1") == k:
                    psi[idx] = weight
        dense = chain_block_entropy(psi, 4, 2)
        assert dense == pytest.approx(fast, abs=1e-10)


class TestConcurrence:
    def test_bell_state(self):
        assert concurrence(dm(BELL)) == pytest.approx(1.0, abs=1e-12)

    def test_product_state(self):
        rho = np.zeros((4, 4))
        rho[0, 0] = 1.0
        assert concurrence(dm(rho)) == pytest.approx(0.0, abs=1e-12)

    def test_rejects_wrong_dimension(self):
        with pytest.raises(ValueError):
            concurrence(dm(np.eye(2) / 2))

    @pytest.mark.parametrize("p", [0.0, 0.2, 1 / 3, 0.5, 0.8, 1.0])
    def test_werner_family(self, p):
        expect = max(0.0, (3 * p - 1) / 2)
        assert concurrence(werner(p)) == pytest.approx(expect, abs=1e-10)

    @settings(max_examples=20, deadline=None, derandomize=True)
    @given(phase=st.floats(0, 2 * np.pi), p=st.floats(0, 1))
    def test_local_phase_invariance(self, phase, p):
        u = np.diag([1.0, np.exp(1j * phase)])
        local = np.kron(u, np.eye(2))
        rotated = dm(local @ werner(p).entries @ local.conj().T)
        assert concurrence(rotated) == pytest.approx(concurrence(werner(p)), abs=1e-9)


class TestUhlmannFidelity:
    def test_identical_states(self):
        assert uhlmann_fidelity(werner(0.7), werner(0.7)) == pytest.approx(1.0)

    def test_orthogonal_pure(self):
        a = dm(np.diag([1.0, 0.0]))
        b = dm(np.diag([0.0, 1.0]))
        assert uhlmann_fidelity(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_pure_versus_mixed(self):
        # Against pure |0>, fidelity reduces to <0|rho|0>.
        pure = dm(np.diag([1.0, 0.0]))
        rho = dm([[0.7, 0.2], [0.2, 0.3]])
        assert uhlmann_fidelity(pure, rho) == pytest.approx(0.7, abs=1e-10)

    def test_commuting_case(self):
        p = dm(np.diag([0.6, 0.4]))
        q = dm(np.diag([0.3, 0.7]))
        expect = (np.sqrt(0.6 * 0.3) + np.sqrt(0.4 * 0.7)) ** 2
        assert uhlmann_fidelity(p, q) == pytest.approx(expect, abs=1e-10)

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError):
            uhlmann_fidelity(dm(np.eye(2) / 2), dm(np.eye(4) / 4))

    @settings(max_examples=15, deadline=None, derandomize=True)
    @given(p=st.floats(0, 1), q=st.floats(0, 1))
    def test_symmetry(self, p, q):
        a, b = werner(p), werner(q)
        assert uhlmann_fidelity(a, b) == pytest.approx(uhlmann_fidelity(b, a), abs=1e-9)
