import numpy as np
import pytest

from esu.hilbert import eig_hermitian
from esu.lmg import build_dicke_sector, eigenstate_entropy_scan, lmg_hamiltonian

from oracles import (
    block_entropy_full,
    collective_spin,
    embed_even_sector,
    lmg_full_hamiltonian,
)


class TestSectorConstruction:
    def test_even_dimension(self):
        ops = build_dicke_sector(10)
        assert ops.dim == 6
        assert ops.basis_tag == "dicke-N10-even"

    def test_odd_parity_dimension(self):
        ops = build_dicke_sector(10, parity="odd")
        assert ops.dim == 5
        assert ops.basis_tag == "dicke-N10-odd"

    def test_m_ladder(self):
        ops = build_dicke_sector(8)
        assert list(ops.sector.m_values) == [4.0, 2.0, 0.0, -2.0, -4.0]
        assert list(ops.sector.k_values) == [0, 2, 4, 6, 8]

    @pytest.mark.parametrize("bad", [3, 7, 2, 1026])
    def test_rejects_bad_sizes(self, bad):
        with pytest.raises(ValueError):
            build_dicke_sector(bad)

    def test_rejects_bad_parity(self):
        with pytest.raises(ValueError):
            build_dicke_sector(8, parity="mixed")


class TestAgainstFullSpace:
    """Sector operators must reproduce the 2^N construction for small N."""

    @pytest.mark.parametrize("n", [4, 6, 8])
    @pytest.mark.parametrize("gamma", [0.0, 0.7, 1.0, 2.5, 10.0])
    def test_spectrum_subset(self, n, gamma):
        ops = build_dicke_sector(n)
        sector_spectrum = np.linalg.eigvalsh(ops.hamiltonian(gamma).entries)
        full = np.linalg.eigvalsh(lmg_full_hamiltonian(n, gamma))
        # Every sector eigenvalue appears in the full spectrum.
        for value in sector_spectrum:
            assert np.min(np.abs(full - value)) < 1e-9

    def test_jz_expectation(self):
        n = 6
        ops = build_dicke_sector(n)
        dec = eig_hermitian(ops.hamiltonian(3.0))
        psi = dec.state(0)
        m_mean = psi.amplitudes.conj() @ (ops.jz.entries @ psi.amplitudes)

        _, _, jz_full = collective_spin(n)
        full = embed_even_sector(psi.amplitudes, n)
        expect = full.conj() @ (jz_full @ full)
        assert m_mean.real == pytest.approx(expect.real, abs=1e-10)

    def test_entropy_matches_dense_reduction(self):
        n = 8
        ops = build_dicke_sector(n)
        for gamma in (0.3, 1.0, 4.0):
            psi = ops.ground_state(gamma)
            fast = ops.block_entropy(psi)
            dense = block_entropy_full(embed_even_sector(psi.amplitudes, n), n, n // 2)
            assert fast == pytest.approx(dense, abs=1e-9)


class TestModelPhysics:
    def test_jx2_positive_semidefinite(self):
        ops = build_dicke_sector(32)
        assert np.linalg.eigvalsh(ops.jx2.entries)[0] > -1e-10

    def test_strong_field_ground_state_polarized(self):
        # Gamma >> 1: ground state approaches |m = N/2>, entropy -> 0.
        ops = build_dicke_sector(16)
        psi = ops.ground_state(100.0)
        assert abs(psi.amplitudes[0]) ** 2 > 0.999
        assert ops.block_entropy(psi) < 0.01

    def test_two_term_split(self):
        ops = build_dicke_sector(12)
        tt = ops.two_term()
        for gamma in (0.0, 1.3, 10.0):
            rebuilt = tt.h0 + gamma * tt.h1
            assert np.allclose(rebuilt, ops.hamiltonian(gamma).entries, atol=1e-12)

    def test_eigenstate_indexing(self):
        ops = build_dicke_sector(16)
        dec = eig_hermitian(ops.hamiltonian(10.0))
        assert ops.eigenstate(10.0, 1).survival(dec.state(0)) == pytest.approx(1.0)
        assert ops.eigenstate(10.0, 3).survival(dec.state(2)) == pytest.approx(1.0)
        with pytest.raises(ValueError):
            ops.eigenstate(10.0, 0)
        with pytest.raises(ValueError):
            ops.eigenstate(10.0, ops.dim + 1)

    def test_basis_tag_enforced(self):
        small = build_dicke_sector(8)
        large = build_dicke_sector(10)
        with pytest.raises(ValueError):
            large.block_entropy(small.ground_state(1.0))

    def test_critical_ground_entropy_growth(self):
        # At the critical field the half-block entropy grows with N.
        values = []
        for n in (8, 16, 32, 64):
            ops = build_dicke_sector(n)
            values.append(ops.block_entropy(ops.ground_state(1.0)))
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_spectrum_near_harmonic_at_strong_field(self):
        # Gamma = 10: low excitation gaps are close to 2 * Gamma.
        ops = build_dicke_sector(32)
        e = np.sort(np.linalg.eigvalsh(ops.hamiltonian(10.0).entries))
        gaps = np.diff(e[:4])
        assert np.all(np.abs(gaps - 2 * 10.0) < 1.0)

    def test_scan_rows(self):
        ops = build_dicke_sector(12)
        rows = eigenstate_entropy_scan(ops, 1.8)
        assert len(rows) == ops.dim
        assert [r[0] for r in rows] == list(range(1, ops.dim + 1))
        energies = [r[1] for r in rows]
        assert energies == sorted(energies)
        psi = ops.eigenstate(1.8, 4)
        assert rows[3][2] == pytest.approx(ops.block_entropy(psi), abs=1e-12)


class TestFrozenValues:
    """Spot values computed once with an independent dense construction."""

    def test_n32_central_entropy(self):
        # Median-energy eigenstate entropy at the critical field, N = 32.
        ops = build_dicke_sector(32)
        rows = eigenstate_entropy_scan(ops, 1.0)
        central = rows[(len(rows) + 1) // 2 - 1]
        assert central[0] == 9
        assert central[2] == pytest.approx(2.619734816998675, abs=1e-9)

    def test_n8_ground_energy_strong_field(self):
        # Value from diagonalizing the 2^8 construction directly.
        ops = build_dicke_sector(8)
        e0 = np.linalg.eigvalsh(ops.hamiltonian(10.0).entries)[0]
        assert e0 == pytest.approx(-40.25568280172838, abs=1e-9)

    def test_pair_concurrence_critical(self):
        # Ground-state pair concurrence at Gamma = 1, N = 8.
        ops = build_dicke_sector(8)
        value = ops.pair_concurrence(ops.ground_state(1.0))
        assert value == pytest.approx(0.07358148198311658, abs=1e-9)
