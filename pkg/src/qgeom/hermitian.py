"""Complex Hermitian linear algebra substrate.

Construction and decomposition of Hermitian matrices, bipartite operations
(partial transpose/trace, Schmidt decomposition), tensor extension of maps,
and seeded random sampling (Haar pure states, traceless GUE directions).

Conventions: a state on C^d (x) C^d is an m x m matrix with m = d^2; the
row index of the (i,k) tensor slot is i*d + k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectralDecomposition",
    "hermitize",
    "assert_hermitian",
    "eigh_sorted",
    "lambda_max",
    "top_eigvec",
    "hs_norm",
    "op_norm",
    "trace_norm",
    "projector",
    "maximally_mixed",
    "partial_transpose",
    "partial_trace",
    "schmidt",
    "haar_pure",
    "haar_product_pure",
    "gue_traceless",
    "random_density",
    "apply_map_tensor_id",
    "hermitian_basis",
    "traceless_basis",
    "traceless_coords",
    "from_traceless_coords",
    "real_vec",
    "matrix_to_json",
    "matrix_from_json",
]


def hermitize(a: np.ndarray) -> np.ndarray:
    """Hermitian part (A + A^dagger)/2."""
    return (a + a.conj().T) / 2


def assert_hermitian(a: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.conj().T).max() > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return hermitize(a)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order; eigenvector columns match."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u, lam = self.eigenvectors, self.eigenvalues
        return (u * lam) @ u.conj().T


def eigh_sorted(h: np.ndarray) -> SpectralDecomposition:
    """Full spectral decomposition, eigenvalues descending."""
    h = assert_hermitian(h)
    lam, u = np.linalg.eigh(h)
    return SpectralDecomposition(lam[::-1].copy(), u[:, ::-1].copy())


def _eig2x2_bounds(h: np.ndarray) -> tuple[float, float]:
    # closed form for 2x2 Hermitian; used in hot loops
    a = h[0, 0].real
    c = h[1, 1].real
    b = h[0, 1]
    r = np.sqrt(((a - c) / 2) ** 2 + (b * b.conjugate()).real)
    mid = (a + c) / 2
    return mid + r, mid - r


def lambda_max(h: np.ndarray) -> float:
    """Top eigenvalue of a Hermitian matrix."""
    if h.shape[0] == 2:
        return _eig2x2_bounds(h)[0]
    return float(np.linalg.eigvalsh(h)[-1])


def top_eigvec(h: np.ndarray) -> np.ndarray:
    """Unit eigenvector for the top eigenvalue."""
    if h.shape[0] == 2:
        top, _ = _eig2x2_bounds(h)
        a, b = h[0, 0].real, h[0, 1]
        # rows of (H - top I) are orthogonal to the top eigenvector
        v = np.array([b, top - a], dtype=complex)
        n = np.linalg.norm(v)
        if n < 1e-14:  # already diagonal
            v = np.array([1.0, 0.0], dtype=complex) if a >= h[1, 1].real else np.array([0.0, 1.0], dtype=complex)
            return v
        return v / n
    _, u = np.linalg.eigh(h)
    return u[:, -1].copy()


def hs_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def op_norm(a: np.ndarray) -> float:
    lam = np.linalg.eigvalsh(hermitize(a))
    return float(np.abs(lam).max())


def trace_norm(a: np.ndarray) -> float:
    lam = np.linalg.eigvalsh(hermitize(a))
    return float(np.abs(lam).sum())


def projector(psi: np.ndarray) -> np.ndarray:
    """Rank-1 projector |psi><psi|."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def maximally_mixed(m: int) -> np.ndarray:
    return np.eye(m, dtype=complex) / m


def _check_bipartite(rho: np.ndarray, d: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (d * d, d * d):
        raise ValueError(f"expected a {d*d}x{d*d} matrix for local dimension d={d}, got {rho.shape}")
    return rho


def partial_transpose(rho: np.ndarray, d: int) -> np.ndarray:
    """Transpose on the second tensor factor of C^d (x) C^d."""
    rho = _check_bipartite(rho, d)
    t = rho.reshape(d, d, d, d)  # [i, k, j, l]
    return t.transpose(0, 3, 2, 1).reshape(d * d, d * d)


def partial_trace(rho: np.ndarray, d: int, which: int) -> np.ndarray:
    """Trace out factor ``which`` (0 = first, 1 = second)."""
    rho = _check_bipartite(rho, d)
    t = rho.reshape(d, d, d, d)
    if which == 1:
        return np.einsum("ikjk->ij", t)
    if which == 0:
        return np.einsum("ikil->kl", t)
    raise ValueError("which must be 0 or 1")


def schmidt(psi: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Schmidt decomposition of a unit vector on C^d (x) C^d.

    Returns (coefficients descending, left basis columns, right basis
    columns) with psi = sum_i coeff[i] * kron(left[:,i], right[:,i]).
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (d * d,):
        raise ValueError(f"expected a vector of length {d*d}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("expected a unit vector")
    mat = psi.reshape(d, d)
    u, s, vh = np.linalg.svd(mat)
    return s, u, vh.conj().T


def haar_pure(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform unit vector in C^m (normalized complex Gaussian)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return z / np.linalg.norm(z)


def haar_pure_batch(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n independent Haar unit vectors, rows of an (n, m) array."""
    z = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_product_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    """kron(psi, phi) for independent Haar psi, phi on C^d."""
    return np.kron(haar_pure(d, rng), haar_pure(d, rng))


def gue_traceless(m: int, rng: np.random.Generator) -> np.ndarray:
    """Standard GUE matrix with the trace removed; trace is exactly zero."""
    if m < 1:
        raise ValueError("m must be >= 1")
    z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    h = hermitize(z) / np.sqrt(2)
    diag = h.diagonal().real.copy()
    diag -= diag.sum() / m
    diag[-1] = -diag[:-1].sum()  # pin the trace to exactly 0.0
    np.fill_diagonal(h, diag)
    return h


def random_density(m: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Hilbert-Schmidt-induced random state (partial trace of a Haar pure
    state on C^m (x) C^rank); rank defaults to m."""
    k = m if rank is None else rank
    g = rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def apply_map_tensor_id(phi, rho: np.ndarray, d: int) -> np.ndarray:
    """(Phi (x) I)(rho) for a map ``phi`` acting on d x d matrices.

    ``phi`` is any callable M_d -> M_d, linear over C (a PositiveMapRep
    qualifies).  rho need not be a state, only a d^2 x d^2 matrix.
    """
    rho = _check_bipartite(rho, d)
    t = rho.reshape(d, d, d, d)  # [i, k, j, l]
    out = np.zeros((d, d, d, d), dtype=complex)
    eij = np.zeros((d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            eij[i, j] = 1.0
            phi_eij = np.asarray(phi(eij), dtype=complex)
            eij[i, j] = 0.0
            # rho = sum_{ij} E_ij (x) block(i, j), block(i, j)[k, l] = t[i, k, j, l]
            out += np.einsum("ab,kl->akbl", phi_eij, t[i, :, j, :])
    return out.reshape(d * d, d * d)


def hermitian_basis(m: int) -> np.ndarray:
    """Orthonormal (HS) basis of Hermitian m x m matrices.

    First element is Id/sqrt(m); the rest are traceless (generalized
    Gell-Mann matrices). Shape (m*m, m, m).
    """
    mats = [np.eye(m, dtype=complex) / np.sqrt(m)]
    # diagonal traceless
    for k in range(1, m):
        v = np.zeros(m)
        v[:k] = 1.0
        v[k] = -k
        v /= np.linalg.norm(v)
        mats.append(np.diag(v).astype(complex))
    # off-diagonal
    for i in range(m):
        for j in range(i + 1, m):
            s = np.zeros((m, m), dtype=complex)
            s[i, j] = s[j, i] = 1 / np.sqrt(2)
            mats.append(s)
            a = np.zeros((m, m), dtype=complex)
            a[i, j] = -1j / np.sqrt(2)
            a[j, i] = 1j / np.sqrt(2)
            mats.append(a)
    return np.array(mats)


def traceless_basis(m: int) -> np.ndarray:
    """Orthonormal basis of the traceless Hermitian matrices, shape (m*m-1, m, m)."""
    return hermitian_basis(m)[1:]


def traceless_coords(a: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Real coordinates of a traceless Hermitian matrix in an HS-orthonormal basis."""
    return np.einsum("kij,ji->k", basis, a).real


def from_traceless_coords(x: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return np.einsum("k,kij->ij", x, basis)


def real_vec(a: np.ndarray) -> np.ndarray:
    """Real embedding with Euclidean inner product = HS inner product
    (valid between Hermitian matrices)."""
    return np.concatenate([a.real.ravel(), a.imag.ravel()])


def matrix_to_json(a: np.ndarray) -> dict:
    """Exchange format: {dim, re, im} with row-major arrays."""
    a = np.asarray(a, dtype=complex)
    return {
        "dim": a.shape[0],
        "re": a.real.ravel().tolist(),
        "im": a.imag.ravel().tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    m = int(obj["dim"])
    re = np.array(obj["re"], dtype=float).reshape(m, m)
    im = np.array(obj["im"], dtype=float).reshape(m, m)
    return re + 1j * im
