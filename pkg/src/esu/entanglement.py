"""Entanglement and distance measures.

Half-block von Neumann entropy with a fast path for permutation-symmetric
states, Wootters concurrence for two-qubit density matrices, and Uhlmann
fidelity (in its squared, survival-probability form).  All logarithms are
base 2.

The fast path rests on a standard identity: for a symmetric state with
amplitudes c_k over the number of flipped spins k, splitting the chain into
blocks of L and N - L spins gives the amplitude matrix

    A[l, k - l] = c_k sqrt( C(L, l) C(N-L, k-l) / C(N, k) )

whose Gram matrix A A^dag is the reduced block state.  Binomials are
evaluated through log-gamma so sizes up to N = 1024 stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

# Construction-time validation tolerances for density matrices.
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
HERM_TOL = 1e-10

# von_neumann_entropy rejects spectra below this; smaller negative
# eigenvalues count as rounding noise and are clipped to zero.
EIGENVALUE_FLOOR = -1e-8

NORM_TOL = 1e-8


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive-semidefinite, unit-trace operator."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"density matrix must be square, got {entries.shape}")
        herm = np.max(np.abs(entries - entries.conj().T))
        if herm > HERM_TOL:
            raise ValueError(f"density matrix not Hermitian: deviation {herm:.3e}")
        trace = entries.trace()
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {trace!r} deviates from 1")
        lowest = float(np.linalg.eigvalsh(entries)[0])
        if lowest < -PSD_TOL:
            raise ValueError(
                f"density matrix has negative eigenvalue {lowest:.3e}"
            )

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _entropy_base2(probabilities: np.ndarray) -> float:
    """Shannon entropy in bits with the 0 log 0 = 0 convention."""
    p = probabilities[probabilities > 0.0]
    if p.size == 0:
        return 0.0
    return float(-np.sum(p * np.log2(p)))


def _log_binomial(n, r):
    return gammaln(n + 1.0) - gammaln(r + 1.0) - gammaln(n - r + 1.0)


def _resolve_k_values(n_amplitudes: int, n_spins: int, k_values) -> np.ndarray:
    """Map amplitude positions to flipped-spin counts k.

    Explicit ``k_values`` win.  Otherwise the length decides: N + 1 means
    the full symmetric ladder k = 0..N, N/2 + 1 the even-parity sector,
    N/2 the odd-parity sector.
    """
    if k_values is not None:
        ks = np.asarray(k_values, dtype=int)
        if len(ks) != n_amplitudes:
            raise ValueError("k_values length does not match amplitudes")
        return ks
    if n_amplitudes == n_spins + 1:
        return np.arange(n_spins + 1)
    if n_amplitudes == n_spins // 2 + 1:
        return np.arange(0, n_spins + 1, 2)
    if n_amplitudes == n_spins // 2:
        return np.arange(1, n_spins, 2)
    raise ValueError(
        f"cannot infer flipped-spin counts for {n_amplitudes} amplitudes "
        f"over {n_spins} spins; pass k_values"
    )


def symmetric_amplitude_matrix(
    amplitudes: np.ndarray,
    n_spins: int,
    block_size: int,
    k_values=None,
) -> np.ndarray:
    """Block-decomposition amplitude matrix A for a symmetric state.

    Rows index the flipped-spin count l inside the block of ``block_size``
    spins, columns the count k - l in the remainder.  The reduced block
    state is A A^dag.
    """
    c = np.asarray(amplitudes, dtype=complex)
    n = n_spins
    ell = block_size
    if not 1 <= ell <= n - 1:
        raise ValueError(f"block size {ell} outside 1..{n - 1}")
    norm = np.linalg.norm(c)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"amplitudes norm {norm!r} deviates from 1 beyond {NORM_TOL}")
    ks = _resolve_k_values(len(c), n, k_values)

    a = np.zeros((ell + 1, n - ell + 1), dtype=complex)
    for c_k, k in zip(c, ks):
        lo = max(0, k - (n - ell))
        hi = min(ell, k)
        if lo > hi:
            continue
        ls = np.arange(lo, hi + 1)
        log_w = (
            _log_binomial(ell, ls)
            + _log_binomial(n - ell, k - ls)
            - _log_binomial(n, k)
        )
        a[ls, k - ls] = c_k * np.exp(0.5 * log_w)
    return a


def symmetric_block_entropy(
    amplitudes: np.ndarray,
    n_spins: int,
    block_size: int | None = None,
    k_values=None,
) -> float:
    """Entanglement entropy of a block of spins in a symmetric state.

    Defaults to the half-block entropy (block_size = N/2).  The spectrum of
    the reduced state is obtained from the singular values of the amplitude
    matrix, which is equivalent to diagonalizing A A^dag.
    """
    if block_size is None:
        block_size = n_spins // 2
    a = symmetric_amplitude_matrix(amplitudes, n_spins, block_size, k_values)
    singular = np.linalg.svd(a, compute_uv=False)
    return _entropy_base2(singular**2)


def pair_density_matrix_symmetric(
    amplitudes: np.ndarray, n_spins: int, k_values=None
) -> DensityMatrix:
    """Two-spin reduced density matrix of a symmetric state.

    All pairs are equivalent by permutation symmetry.  The rank-3 reduced
    state over {0, 1, 2 flips in the pair} is embedded into the two-qubit
    basis {00, 01, 10, 11} with the single-flip component split evenly.
    """
    a = symmetric_amplitude_matrix(amplitudes, n_spins, 2, k_values)
    rho3 = a @ a.conj().T
    embed = np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, 1.0 / np.sqrt(2.0), 0.0],
            [0.0, 1.0 / np.sqrt(2.0), 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    return DensityMatrix(embed @ rho3 @ embed.T)


def chain_block_entropy(amplitudes: np.ndarray, n_sites: int, block_size: int) -> float:
    """Half-chain entropy of a product-basis state via dense bipartition.

    The state over 2^N amplitudes is reshaped to (2^L, 2^(N-L)); squared
    singular values are the reduced spectrum.  Site 1 is the most
    significant bit, so the block holds sites 1..L.
    """
    if not 1 <= block_size <= n_sites - 1:
        raise ValueError(f"block size {block_size} outside 1..{n_sites - 1}")
    c = np.asarray(amplitudes, dtype=complex)
    if c.shape[0] != 2**n_sites:
        raise ValueError("amplitude count does not match 2^N")
    m = c.reshape(2**block_size, -1)
    singular = np.linalg.svd(m, compute_uv=False)
    return _entropy_base2(singular**2)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Base-2 von Neumann entropy of a density matrix.

    Eigenvalues in [EIGENVALUE_FLOOR, 0) are clipped to zero; anything
    lower means the input is not a state and raises.
    """
    spectrum = np.linalg.eigvalsh(rho.entries)
    if spectrum[0] < EIGENVALUE_FLOOR:
        raise ValueError(
            f"eigenvalue {spectrum[0]:.3e} below {EIGENVALUE_FLOOR}: not a state"
        )
    return _entropy_base2(np.clip(spectrum, 0.0, None))


_SPIN_FLIP = np.array(
    [
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
    ]
)


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    The four roots are the singular values of tau = X^T (sy x sy) X, where
    the columns of X are the eigenvectors of rho scaled by the square roots
    of their populations.  Computing them by SVD avoids taking square roots
    of near-zero eigenvalues of rho * rho_tilde, which would amplify
    roundoff from 1e-16 to 1e-8 and break local-unitary invariance.
    """
    if rho.dim != 4:
        raise ValueError(f"concurrence needs a 4x4 density matrix, got {rho.dim}")
    spectrum, vectors = np.linalg.eigh(rho.entries)
    scaled = vectors * np.sqrt(np.clip(spectrum, 0.0, None))
    tau = scaled.T @ _SPIN_FLIP @ scaled
    roots = np.linalg.svd(tau, compute_uv=False)
    return float(max(0.0, 2.0 * roots[0] - roots.sum()))


def _psd_root(entries: np.ndarray) -> np.ndarray:
    """Hermitian square root with a relative rank cutoff.

    Eigenvalues below 1e-14 of the largest are treated as exact zeros;
    rooting them would turn 1e-16 noise into 1e-8 matrix entries.
    """
    spectrum, vectors = np.linalg.eigh(entries)
    floor = 1e-14 * max(float(spectrum[-1]), 0.0)
    spectrum = np.where(spectrum > floor, spectrum, 0.0)
    return (vectors * np.sqrt(spectrum)) @ vectors.conj().T


def uhlmann_fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Squared Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    This is the survival-probability convention: for pure states it reduces
    to the squared overlap.  The trace equals the nuclear norm of
    sqrt(sigma) sqrt(rho), so it is read off the singular values directly;
    symmetry in the arguments then holds to roundoff.
    """
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch {rho.dim} vs {sigma.dim}")
    product = _psd_root(sigma.entries) @ _psd_root(rho.entries)
    fidelity = float(np.linalg.svd(product, compute_uv=False).sum() ** 2)
    return min(max(fidelity, 0.0), 1.0)
