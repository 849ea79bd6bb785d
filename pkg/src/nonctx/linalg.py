"""Dense complex linear algebra helpers with a deterministic eigensolver.

Everything downstream (kernels, supports, possibility patterns) hangs off
eigendecompositions, so the solver must give byte-identical output for
identical input on any platform.  We therefore use a fixed-order cyclic
Jacobi iteration instead of delegating to LAPACK.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "dagger",
    "frob_norm",
    "is_hermitian",
    "jacobi_eigh",
    "projector",
    "unit_vector",
]


def dagger(mat: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return mat.conj().T


def frob_norm(mat: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(mat) ** 2)))


def is_hermitian(mat: np.ndarray, tol: float = 1e-9) -> bool:
    """Check M = M^dagger entrywise within tol (absolute)."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        return False
    return bool(np.max(np.abs(mat - dagger(mat))) <= tol) if mat.size else True


def unit_vector(vec: np.ndarray) -> np.ndarray:
    """Normalize a state vector.  Raises on the zero vector."""
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    norm = float(np.sqrt(np.real(np.vdot(vec, vec))))
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return vec / norm


def projector(vec: np.ndarray) -> np.ndarray:
    """Rank-1 projector |v><v| for a (not necessarily normalized) vector."""
    v = unit_vector(vec)
    return np.outer(v, v.conj())


def _rotation(app: float, aqq: float, apq: complex) -> tuple[float, complex]:
    # 2x2 unitary [[c, s], [-conj(s), c]] that diagonalizes the Hermitian
    # block [[app, apq], [conj(apq), aqq]].  c is real and nonnegative.
    r = abs(apq)
    phase = apq / r
    tau = (aqq - app) / (2.0 * r)
    if tau >= 0.0:
        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c * phase
    return c, s


def jacobi_eigh(mat: np.ndarray, *, max_sweeps: int = 60,
                tol: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns (w, V) with real eigenvalues w ascending and orthonormal
    eigenvector columns V, so that mat = V @ diag(w) @ V^dagger.  The sweep
    order, rotation choice and final stable sort are all fixed, so equal
    inputs give bit-equal outputs.

    The caller is responsible for mat being Hermitian; the routine
    symmetrizes once up front to shed roundoff.
    """
    a = np.asarray(mat, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("jacobi_eigh expects a square matrix")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    a = (a + dagger(a)) / 2.0
    v = np.eye(n, dtype=complex)
    if n == 1:
        return np.array([a[0, 0].real]), v

    scale = frob_norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    threshold = tol * scale

    for _ in range(max_sweeps):
        # direct off-diagonal norm; frob(a)^2 - frob(diag)^2 cancels badly
        off = frob_norm(a - np.diag(np.diag(a)))
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= threshold / n:
                    continue
                c, s = _rotation(a[p, p].real, a[q, q].real, apq)
                # right-multiply columns p,q by [[c, s], [-conj(s), c]]
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - np.conj(s) * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = np.conj(s) * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vcol_p = v[:, p].copy()
                vcol_q = v[:, q].copy()
                v[:, p] = c * vcol_p - np.conj(s) * vcol_q
                v[:, q] = s * vcol_p + c * vcol_q

    w = np.real(np.diag(a)).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]
