"""Open-boundary transverse-field Ising chain in the full product basis.

H(Gamma) = H_coupling + Gamma * H_field with

    H_coupling = -sum_{i=1}^{N-1} sigma^x_i sigma^x_{i+1}
    H_field    = -sum_i sigma^z_i

Site 1 is the most significant bit of the basis index and bit value 0 means
spin up; this convention is fixed because the extremal-spin reduced density
matrix depends on it.  No symmetry reduction: N <= 12 keeps 2^N dense
matrices comfortable and partial traces trivial.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from esu.entanglement import DensityMatrix, chain_block_entropy, concurrence
from esu.hilbert import HermitianMatrix, StateVector, TwoTermHamiltonian, eig_hermitian

MIN_SITES = 2
MAX_SITES = 12


@dataclass(frozen=True)
class IsingOperators:
    """Coupling and field terms of the chain Hamiltonian."""

    n_spins: int
    h_coupling: HermitianMatrix
    h_field: HermitianMatrix

    @property
    def dim(self) -> int:
        return 2**self.n_spins

    @property
    def basis_tag(self) -> str:
        return f"chain-N{self.n_spins}"

    def hamiltonian(self, gamma: float) -> HermitianMatrix:
        return HermitianMatrix(
            self.basis_tag, self.h_coupling.entries + gamma * self.h_field.entries
        )

    def two_term(self) -> TwoTermHamiltonian:
        return TwoTermHamiltonian(
            self.basis_tag, self.h_coupling.entries, self.h_field.entries
        )

    def ground_state(self, gamma: float) -> StateVector:
        return eig_hermitian(self.hamiltonian(gamma)).state(0)

    def eigenstate(self, gamma: float, n: int) -> StateVector:
        if not 1 <= n <= self.dim:
            raise ValueError(f"eigenstate index {n} outside 1..{self.dim}")
        return eig_hermitian(self.hamiltonian(gamma)).state(n - 1)

    # -- measures ---------------------------------------------------------

    def extremal_concurrence(self, psi: StateVector) -> float:
        """Concurrence between the first and last spin of the chain."""
        return concurrence(reduced_two_spin(psi, 1, self.n_spins))

    def block_entropy(self, psi: StateVector, block_size: int | None = None) -> float:
        if block_size is None:
            block_size = self.n_spins // 2
        return chain_block_entropy(psi.amplitudes, self.n_spins, block_size)

    def entanglement(self, psi: StateVector) -> float:
        """Default measure for this model: extremal-spin concurrence."""
        return self.extremal_concurrence(psi)

    def survival(self, reference: StateVector, psi: StateVector) -> float:
        return reference.survival(psi)


def build_ising(n_spins: int) -> IsingOperators:
    """Assemble the chain operators for 2 <= N <= 12 sites."""
    if not MIN_SITES <= n_spins <= MAX_SITES:
        raise ValueError(f"n_spins must lie in [{MIN_SITES}, {MAX_SITES}], got {n_spins}")
    dim = 2**n_spins
    indices = np.arange(dim)

    # Bit value 0 is spin up, so sum sigma^z = N - 2 * popcount.
    popcount = np.array([bin(b).count("1") for b in range(dim)])
    h_field = np.diag(-(n_spins - 2.0 * popcount))

    h_coupling = np.zeros((dim, dim))
    for site in range(1, n_spins):
        # Site i occupies bit N - i counted from the least significant end.
        mask = (1 << (n_spins - site)) | (1 << (n_spins - site - 1))
        h_coupling[indices, indices ^ mask] -= 1.0

    tag = f"chain-N{n_spins}"
    return IsingOperators(
        n_spins,
        HermitianMatrix(tag, h_coupling),
        HermitianMatrix(tag, h_field),
    )


def reduced_two_spin(psi: StateVector, site_i: int, site_j: int) -> DensityMatrix:
    """Trace out all sites except i and j.

    The result is in the basis |s_i s_j> over {00, 01, 10, 11} with 0 spin
    up, i.e. the first index belongs to site i regardless of chain order.
    """
    n_spins = int(round(np.log2(psi.dim)))
    if 2**n_spins != psi.dim:
        raise ValueError("state dimension is not a power of two")
    if site_i == site_j:
        raise ValueError("sites must differ")
    for site in (site_i, site_j):
        if not 1 <= site <= n_spins:
            raise ValueError(f"site {site} outside 1..{n_spins}")

    tensor = psi.amplitudes.reshape((2,) * n_spins)
    kept = np.moveaxis(tensor, (site_i - 1, site_j - 1), (0, 1))
    matrix = kept.reshape(4, -1)
    return DensityMatrix(matrix @ matrix.conj().T)


def parity_operator(n_spins: int) -> HermitianMatrix:
    """Global spin-flip parity, the product of sigma^z over all sites."""
    dim = 2**n_spins
    signs = np.array([(-1.0) ** bin(b).count("1") for b in range(dim)])
    return HermitianMatrix(f"chain-N{n_spins}", np.diag(signs))
