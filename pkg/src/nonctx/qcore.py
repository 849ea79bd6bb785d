"""Quantum objects for finite scenarios: states, effects, channels, kernels.

All verdicts downstream reduce to kernel and support computations on the
matrices defined here, so construction is strict: every wrapper validates
its defining constraints at build time and is immutable afterwards.

Conventions
-----------
* matrices are dense numpy complex arrays, row-major
* tensor index convention: (i, j) -> i * dim(B) + j, i.e. numpy.kron
* trace_distance is the unnormalized trace norm |rho - sigma|_1, range [0, 2]
* kernel membership is relative: eigenvalues <= tol_kernel * lambda_max
"""

from __future__ import annotations

import numpy as np

from .linalg import dagger, frob_norm, is_hermitian, jacobi_eigh, projector, unit_vector

MAX_DIM = 64

TOL_KERNEL = 1e-9
TOL_PSD = 1e-9
TOL_TRACE = 1e-9
TOL_SUM = 1e-9
TOL_PROB = 1e-9

__all__ = [
    "MAX_DIM",
    "TOL_KERNEL",
    "TOL_PSD",
    "TOL_TRACE",
    "TOL_SUM",
    "TOL_PROB",
    "KernelBasis",
    "DensityMatrix",
    "Effect",
    "Measurement",
    "Channel",
    "born_probability",
    "bloch_state",
    "bloch_projector",
    "basis_measurement",
    "kernel_basis",
    "same_kernel",
    "trace_distance",
    "smooth_state",
    "choi_state",
    "tensor",
    "identity_channel",
    "unitary_channel",
    "dephasing_channel",
    "depolarizing_channel",
]


def _as_matrix(obj) -> np.ndarray:
    mat = getattr(obj, "mat", obj)
    arr = np.array(mat, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("expected a square matrix, got shape %r" % (arr.shape,))
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _check_dim(d: int) -> None:
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if d > MAX_DIM:
        raise ValueError("dimension %d exceeds the cap of %d" % (d, MAX_DIM))


class KernelBasis:
    """Orthonormal basis of the kernel of a Hermitian PSD matrix.

    ``vectors`` has shape (dim, kernel_dim); columns are orthonormal.  ``tol``
    records the relative eigenvalue threshold that defined membership.
    """

    def __init__(self, dim: int, vectors: np.ndarray, tol: float):
        self.dim = int(dim)
        vecs = np.array(vectors, dtype=complex).reshape(self.dim, -1)
        self.vectors = _freeze(vecs)
        self.tol = float(tol)

    @property
    def kernel_dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def rank(self) -> int:
        return self.dim - self.kernel_dim

    def support_projector(self) -> np.ndarray:
        """Projector onto the orthogonal complement of the kernel."""
        return np.eye(self.dim, dtype=complex) - self.vectors @ dagger(self.vectors)

    def __repr__(self) -> str:
        return "KernelBasis(dim=%d, kernel_dim=%d)" % (self.dim, self.kernel_dim)


class DensityMatrix:
    """Unit-trace positive semidefinite operator."""

    def __init__(self, mat, *, tol_psd: float = TOL_PSD, tol_trace: float = TOL_TRACE):
        arr = _as_matrix(mat)
        _check_dim(arr.shape[0])
        if not is_hermitian(arr, tol_psd):
            raise ValueError("density matrix must be Hermitian")
        arr = (arr + dagger(arr)) / 2.0
        eigs, _ = jacobi_eigh(arr)
        if eigs[0] < -tol_psd:
            raise ValueError(
                "density matrix is not PSD: min eigenvalue %.3e" % eigs[0])
        tr = float(np.real(np.trace(arr)))
        if abs(tr - 1.0) > tol_trace:
            raise ValueError("density matrix trace %.12f is not 1" % tr)
        self.mat = _freeze(arr)
        self.d = arr.shape[0]

    def __repr__(self) -> str:
        return "DensityMatrix(d=%d)" % self.d


class Effect:
    """POVM element: Hermitian with 0 <= E <= I."""

    def __init__(self, mat, *, tol_psd: float = TOL_PSD):
        arr = _as_matrix(mat)
        _check_dim(arr.shape[0])
        if not is_hermitian(arr, tol_psd):
            raise ValueError("effect must be Hermitian")
        arr = (arr + dagger(arr)) / 2.0
        eigs, _ = jacobi_eigh(arr)
        if eigs[0] < -tol_psd:
            raise ValueError("effect is not PSD: min eigenvalue %.3e" % eigs[0])
        if eigs[-1] > 1.0 + tol_psd:
            raise ValueError(
                "effect exceeds identity: max eigenvalue %.12f" % eigs[-1])
        self.mat = _freeze(arr)
        self.d = arr.shape[0]

    def __repr__(self) -> str:
        return "Effect(d=%d)" % self.d


class Measurement:
    """Finite POVM: a tuple of effects summing to the identity."""

    def __init__(self, effects, labels=None, *, tol_sum: float = TOL_SUM):
        effs = tuple(e if isinstance(e, Effect) else Effect(e) for e in effects)
        if not effs:
            raise ValueError("measurement needs at least one effect")
        d = effs[0].d
        if any(e.d != d for e in effs):
            raise ValueError("all effects must share a dimension")
        total = sum(e.mat for e in effs)
        if float(np.max(np.abs(total - np.eye(d)))) > tol_sum:
            raise ValueError("effects do not sum to the identity")
        if labels is None:
            labels = tuple(str(k) for k in range(len(effs)))
        labels = tuple(str(x) for x in labels)
        if len(labels) != len(effs) or len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct and match the effect count")
        self.effects = effs
        self.labels = labels
        self.d = d

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    def __repr__(self) -> str:
        return "Measurement(d=%d, outcomes=%d)" % (self.d, self.n_outcomes)


class Channel:
    """Completely positive trace-preserving map given by Kraus operators."""

    def __init__(self, kraus, *, tol_sum: float = TOL_SUM):
        ops = tuple(np.array(getattr(k, "mat", k), dtype=complex) for k in kraus)
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        if any(k.ndim != 2 for k in ops):
            raise ValueError("Kraus operators must be matrices")
        d_out, d_in = ops[0].shape
        if any(k.shape != (d_out, d_in) for k in ops):
            raise ValueError("all Kraus operators must share a shape")
        _check_dim(d_in)
        _check_dim(d_out)
        total = sum(dagger(k) @ k for k in ops)
        if float(np.max(np.abs(total - np.eye(d_in)))) > tol_sum:
            raise ValueError("channel is not trace preserving: sum K^dag K != I")
        self.kraus = tuple(_freeze(k) for k in ops)
        self.d_in = d_in
        self.d_out = d_out

    def apply(self, rho) -> np.ndarray:
        """Apply the channel to a density matrix, returning a raw array."""
        arr = _as_matrix(rho)
        if arr.shape[0] != self.d_in:
            raise ValueError("channel input dimension mismatch")
        out = np.zeros((self.d_out, self.d_out), dtype=complex)
        for k in self.kraus:
            out += k @ arr @ dagger(k)
        return out

    def __repr__(self) -> str:
        return "Channel(d_in=%d, d_out=%d, kraus=%d)" % (
            self.d_in, self.d_out, len(self.kraus))


def born_probability(rho, effect, *, tol: float = TOL_PROB) -> float:
    """Outcome probability tr(E rho).

    Values within tol outside [0, 1] are clamped; anything further out
    raises, since that signals invalid inputs rather than roundoff.
    """
    r = _as_matrix(rho)
    e = _as_matrix(effect)
    if r.shape != e.shape:
        raise ValueError("state and effect dimensions differ")
    p = float(np.real(np.trace(e @ r)))
    if p < -tol or p > 1.0 + tol:
        raise ValueError("probability %.6e outside [0,1] beyond tolerance" % p)
    return min(1.0, max(0.0, p))


def bloch_state(theta: float) -> np.ndarray:
    """Qubit state cos(theta/2)|0> + sin(theta/2)|1> on the X-Z great circle.

    Overlaps satisfy <theta1|theta2> = cos((theta1 - theta2)/2); the
    definition is used for every angle, not just the first quadrant.
    """
    return np.array([np.cos(theta / 2.0), np.sin(theta / 2.0)], dtype=complex)


def bloch_projector(theta: float) -> np.ndarray:
    return projector(bloch_state(theta))


def basis_measurement(states, labels=None) -> Measurement:
    """Rank-1 projective measurement onto the given orthonormal states."""
    return Measurement([projector(s) for s in states], labels)


def kernel_basis(mat, tol_kernel: float = TOL_KERNEL) -> KernelBasis:
    """Orthonormal kernel basis of a Hermitian PSD matrix.

    Eigenvalues at or below tol_kernel * lambda_max count as zero.  A matrix
    with lambda_max <= 0 (the zero matrix up to roundoff) has the full space
    as its kernel by convention.
    """
    arr = _as_matrix(mat)
    if not is_hermitian(arr, 1e-9):
        raise ValueError("kernel_basis expects a Hermitian matrix")
    eigs, vecs = jacobi_eigh(arr)
    lam_max = float(eigs[-1])
    if lam_max <= 0.0:
        return KernelBasis(arr.shape[0], np.eye(arr.shape[0], dtype=complex),
                           tol_kernel)
    keep = eigs <= tol_kernel * lam_max
    return KernelBasis(arr.shape[0], vecs[:, keep], tol_kernel)


def same_kernel(a, b, tol_kernel: float = TOL_KERNEL) -> bool:
    """Mutual-subspace test: ker(A) == ker(B).

    Each kernel basis vector of A must be annihilated by B's support
    projector and vice versa; annihilation means the squared leaked mass is
    at most tol_kernel.
    """
    ka = kernel_basis(a, tol_kernel)
    kb = kernel_basis(b, tol_kernel)
    if ka.dim != kb.dim:
        raise ValueError("dimension mismatch in same_kernel")
    if ka.kernel_dim != kb.kernel_dim:
        return False
    pa = ka.support_projector()
    pb = kb.support_projector()
    for j in range(ka.kernel_dim):
        leak = pb @ ka.vectors[:, j]
        if float(np.real(np.vdot(leak, leak))) > tol_kernel:
            return False
    for j in range(kb.kernel_dim):
        leak = pa @ kb.vectors[:, j]
        if float(np.real(np.vdot(leak, leak))) > tol_kernel:
            return False
    return True


def trace_distance(rho, sigma) -> float:
    """Unnormalized trace distance |rho - sigma|_1 = sum |eig|, range [0, 2]."""
    r = _as_matrix(rho)
    s = _as_matrix(sigma)
    if r.shape != s.shape:
        raise ValueError("dimension mismatch in trace_distance")
    eigs, _ = jacobi_eigh(r - s)
    return float(np.sum(np.abs(eigs)))


def smooth_state(rho, eps: float, tau) -> DensityMatrix:
    """Convex noise mix (1 - eps) rho + eps tau with tau full rank."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie strictly between 0 and 1")
    r = _as_matrix(rho)
    t = _as_matrix(tau)
    if r.shape != t.shape:
        raise ValueError("dimension mismatch in smooth_state")
    if kernel_basis(t).kernel_dim != 0:
        raise ValueError("smoothing state tau must be full rank")
    return DensityMatrix((1.0 - eps) * r + eps * t)


def tensor(a, b) -> np.ndarray:
    """Kronecker product; composite index (i, j) -> i * dim(B) + j."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def choi_state(channel: Channel) -> DensityMatrix:
    """Choi state (id (x) ch) |Phi+><Phi+| with |Phi+> = sum_i |ii>/sqrt(d).

    The reference system is the first tensor factor, the channel output the
    second.  The identity channel maps to |Phi+><Phi+| itself.
    """
    d = channel.d_in
    dim = d * channel.d_out
    out = np.zeros((dim, dim), dtype=complex)
    for k in channel.kraus:
        u = np.zeros(dim, dtype=complex)
        for i in range(d):
            u[i * channel.d_out:(i + 1) * channel.d_out] = k[:, i]
        out += np.outer(u, u.conj())
    return DensityMatrix(out / d)


def identity_channel(d: int) -> Channel:
    return Channel([np.eye(d, dtype=complex)])


def unitary_channel(u) -> Channel:
    mat = np.array(getattr(u, "mat", u), dtype=complex)
    if float(np.max(np.abs(dagger(mat) @ mat - np.eye(mat.shape[0])))) > TOL_SUM:
        raise ValueError("matrix is not unitary")
    return Channel([mat])


def dephasing_channel(strength: float) -> Channel:
    """Qubit phase damping: rho -> (1 - p) rho + p Z rho Z."""
    if not 0.0 <= strength <= 1.0:
        raise ValueError("dephasing strength must lie in [0, 1]")
    z = np.diag([1.0, -1.0]).astype(complex)
    ops = []
    if strength < 1.0:
        ops.append(np.sqrt(1.0 - strength) * np.eye(2, dtype=complex))
    if strength > 0.0:
        ops.append(np.sqrt(strength) * z)
    return Channel(ops)


def depolarizing_channel(strength: float, d: int = 2) -> Channel:
    """rho -> (1 - p) rho + p I/d, valid for any dimension."""
    if not 0.0 <= strength <= 1.0:
        raise ValueError("depolarizing strength must lie in [0, 1]")
    ops = []
    if strength < 1.0:
        ops.append(np.sqrt(1.0 - strength) * np.eye(d, dtype=complex))
    if strength > 0.0:
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d), dtype=complex)
                e[i, j] = np.sqrt(strength / d)
                ops.append(e)
    return Channel(ops)
