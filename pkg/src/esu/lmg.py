"""Collective spin model with infinite-range x-x coupling in a transverse field.

Everything lives in the maximal-spin Dicke sector (J = N/2) restricted to a
fixed parity of the number of flipped spins.  The Hamiltonian

    H(Gamma) = -(1/N) Jx^2 - Gamma Jz

changes the Jz quantum number m by 0 or +-2 only, so each parity sector is
invariant and has dimension about N/2 instead of 2^N.  Matrix elements come
from the ladder algebra J+- |J, m> = sqrt(J(J+1) - m(m+-1)) |J, m+-1>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from esu.entanglement import pair_density_matrix_symmetric, symmetric_block_entropy
from esu.hilbert import (
    HermitianMatrix,
    StateVector,
    TwoTermHamiltonian,
    eig_hermitian,
)

MIN_SPINS = 4
MAX_SPINS = 1024


@dataclass(frozen=True)
class DickeSector:
    """Maximal-spin sector with fixed parity of the flipped-spin count.

    ``m_values`` lists the Jz eigenvalues, descending in steps of 2 from
    N/2 (even parity) or N/2 - 1 (odd parity).  The flipped-spin count of
    basis state i is k = N/2 - m_values[i].
    """

    n_spins: int
    parity: str
    m_values: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.m_values)

    @property
    def k_values(self) -> np.ndarray:
        return (self.n_spins // 2 - self.m_values).astype(int)

    @property
    def basis_tag(self) -> str:
        return f"dicke-N{self.n_spins}-{self.parity}"


@dataclass(frozen=True)
class LmgOperators:
    """Sector restrictions of Jz and Jx^2, plus the model conventions.

    ``jz`` is diagonal with entries m; ``jx2`` is tridiagonal in the sector
    indexing (Delta m = 2 between neighbours) and positive semidefinite.
    """

    sector: DickeSector
    jz: HermitianMatrix
    jx2: HermitianMatrix

    @property
    def dim(self) -> int:
        return self.sector.dim

    @property
    def basis_tag(self) -> str:
        return self.sector.basis_tag

    @property
    def n_spins(self) -> int:
        return self.sector.n_spins

    def hamiltonian(self, gamma: float) -> HermitianMatrix:
        """H(Gamma) = -(1/N) Jx^2 - Gamma Jz."""
        return lmg_hamiltonian(self, gamma)

    def two_term(self) -> TwoTermHamiltonian:
        """Split H = c * h0 + f * h1 used by pulses and noise: h0 is the
        interaction term -(1/N) Jx^2, h1 the field term -Jz."""
        return TwoTermHamiltonian(
            self.basis_tag,
            -self.jx2.entries / self.n_spins,
            -self.jz.entries,
        )

    def ground_state(self, gamma: float) -> StateVector:
        return eig_hermitian(self.hamiltonian(gamma)).state(0)

    def eigenstate(self, gamma: float, n: int) -> StateVector:
        """Eigenstate number n, 1-based and ascending in energy (n=1 is the
        ground state)."""
        if not 1 <= n <= self.dim:
            raise ValueError(f"eigenstate index {n} outside 1..{self.dim}")
        return eig_hermitian(self.hamiltonian(gamma)).state(n - 1)

    # -- entanglement measures on sector states ---------------------------

    def block_entropy(self, psi: StateVector, block_size: int | None = None) -> float:
        """Half-block entanglement entropy of a sector state (base 2)."""
        self._check_state(psi)
        return symmetric_block_entropy(
            psi.amplitudes,
            self.n_spins,
            block_size=block_size,
            k_values=self.sector.k_values,
        )

    def pair_concurrence(self, psi: StateVector) -> float:
        """Concurrence of any two spins (all pairs are equivalent here)."""
        from esu.entanglement import concurrence

        self._check_state(psi)
        rho = pair_density_matrix_symmetric(
            psi.amplitudes, self.n_spins, self.sector.k_values
        )
        return concurrence(rho)

    def entanglement(self, psi: StateVector) -> float:
        """Default measure for this model: half-block entropy."""
        return self.block_entropy(psi)

    def survival(self, reference: StateVector, psi: StateVector) -> float:
        """Pure-state survival probability against the reference."""
        return reference.survival(psi)

    def _check_state(self, psi: StateVector):
        if psi.basis_tag != self.basis_tag:
            raise ValueError(
                f"state basis {psi.basis_tag} does not match {self.basis_tag}"
            )


def build_dicke_sector(n_spins: int, parity: str = "even") -> LmgOperators:
    """Assemble sector operators for an even number of spins.

    The even sector contains the fully polarized state m = N/2 (zero spins
    flipped) and is the default everywhere; the odd sector is available for
    completeness.
    """
    if n_spins % 2 != 0:
        raise ValueError(
            f"n_spins must be even (half-integer sectors unsupported), got {n_spins}"
        )
    if not MIN_SPINS <= n_spins <= MAX_SPINS:
        raise ValueError(
            f"n_spins must lie in [{MIN_SPINS}, {MAX_SPINS}], got {n_spins}"
        )
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")

    j = n_spins / 2.0
    start = n_spins // 2 if parity == "even" else n_spins // 2 - 1
    m_values = np.arange(start, -n_spins // 2 - 1, -2, dtype=float)
    sector = DickeSector(n_spins, parity, m_values)

    jj = j * (j + 1.0)
    jz = np.diag(m_values)
    # Diagonal of Jx^2 = ((J+ J-) + (J- J+)) / 4 restricted to |m>.
    diag = (jj - m_values**2) / 2.0
    # <m-2| Jx^2 |m> = (1/4) sqrt(jj - m(m-1)) sqrt(jj - (m-1)(m-2)).
    m_upper = m_values[:-1]
    off = 0.25 * np.sqrt(
        (jj - m_upper * (m_upper - 1.0)) * (jj - (m_upper - 1.0) * (m_upper - 2.0))
    )
    jx2 = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)

    tag = sector.basis_tag
    return LmgOperators(
        sector,
        HermitianMatrix(tag, jz),
        HermitianMatrix(tag, jx2),
    )


def lmg_hamiltonian(ops: LmgOperators, gamma: float) -> HermitianMatrix:
    """H(Gamma) = -(1/N) Jx^2 - Gamma Jz in units C = 1."""
    entries = -ops.jx2.entries / ops.n_spins - gamma * ops.jz.entries
    return HermitianMatrix(ops.basis_tag, entries)


def eigenstate_entropy_scan(
    ops: LmgOperators, gamma: float
) -> list[tuple[int, float, float]]:
    """Energy-ordered table of (n, E_n, S_n) for every sector eigenstate.

    n is 1-based with n=1 the ground state; S_n is the half-block entropy.
    """
    dec = eig_hermitian(lmg_hamiltonian(ops, gamma))
    rows = []
    for i in range(ops.dim):
        entropy = ops.block_entropy(dec.state(i))
        rows.append((i + 1, float(dec.eigenvalues[i]), entropy))
    return rows
