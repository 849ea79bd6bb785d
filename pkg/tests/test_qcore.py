import math

import numpy as np
import pytest

from nonctx import qcore
from nonctx.linalg import dagger, projector
from nonctx.qcore import (
    Channel,
    DensityMatrix,
    Effect,
    Measurement,
    basis_measurement,
    bloch_projector,
    bloch_state,
    born_probability,
    choi_state,
    dephasing_channel,
    depolarizing_channel,
    identity_channel,
    kernel_basis,
    same_kernel,
    smooth_state,
    tensor,
    trace_distance,
    unitary_channel,
)


def random_density(rng, d):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = x @ x.conj().T
    return m / np.trace(m)


# ---------------------------------------------------------------- wrappers

def test_density_matrix_validation():
    DensityMatrix(np.eye(2) / 2)
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5]))        # not PSD
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.7, 0.7]))         # trace 1.4
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 0.5], [0.0, 0.5]]))  # not Hermitian


def test_effect_validation():
    Effect(np.diag([1.0, 0.0]))
    Effect(np.eye(3))
    with pytest.raises(ValueError):
        Effect(np.diag([1.2, 0.0]))                # exceeds identity
    with pytest.raises(ValueError):
        Effect(np.diag([-0.1, 0.5]))               # negative part


def test_measurement_completeness():
    m = Measurement([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], ["up", "down"])
    assert m.labels == ("up", "down")
    with pytest.raises(ValueError):
        Measurement([np.diag([1.0, 0.0]), np.diag([0.0, 0.9])])
    with pytest.raises(ValueError):
        Measurement([np.eye(2) / 2, np.eye(2) / 2], ["a", "a"])


def test_channel_validation():
    identity_channel(3)
    dephasing_channel(0.3)
    with pytest.raises(ValueError):
        Channel([np.eye(2) * 0.9])
    with pytest.raises(ValueError):
        unitary_channel(np.ones((2, 2)))


def test_dimension_cap():
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(65) / 65)


# ---------------------------------------------------------------- born rule

def test_born_probability_basic():
    # oracle: <0| rho |0> for rho = diag(p, 1-p)
    rho = np.diag([0.3, 0.7])
    assert born_probability(rho, np.diag([1.0, 0.0])) == pytest.approx(0.3)


def test_born_probability_half_angle_oracle():
    # overlap rule <t1|t2> = cos((t1-t2)/2), so the probability is
    # cos^2((t1-t2)/2); checked over a grid of angle pairs
    for t1 in np.linspace(-np.pi, np.pi, 9):
        for t2 in np.linspace(-np.pi, np.pi, 9):
            p = born_probability(bloch_projector(t1), bloch_projector(t2))
            assert p == pytest.approx(math.cos((t1 - t2) / 2.0) ** 2, abs=1e-12)


def test_born_probability_frozen_values():
    # state at pi/2 against the |0> projector: cos^2(pi/4) = 1/2
    assert born_probability(bloch_projector(np.pi / 2), np.diag([1.0, 0.0])
                            ) == pytest.approx(0.5, abs=1e-12)
    # state at pi/2 against the projector at pi + pi/4: cos^2(3 pi / 8),
    # exactly (2 - sqrt(2))/4
    p = born_probability(bloch_projector(np.pi / 2),
                         bloch_projector(np.pi + np.pi / 4))
    assert p == pytest.approx((2.0 - math.sqrt(2.0)) / 4.0, abs=1e-12)
    assert p == pytest.approx(0.14644660940672627, abs=1e-12)


def test_born_probability_errors():
    with pytest.raises(ValueError):
        born_probability(np.eye(2) / 2, np.eye(3))
    with pytest.raises(ValueError):
        born_probability(np.diag([2.0, -1.0]), np.diag([1.0, 0.0]))


def test_bloch_state_overlaps():
    assert np.allclose(bloch_state(0.0), [1.0, 0.0])
    assert np.allclose(bloch_state(np.pi), [0.0, 1.0], atol=1e-15)
    v1 = bloch_state(0.7)
    v2 = bloch_state(-0.9)
    assert np.vdot(v1, v2) == pytest.approx(math.cos((0.7 + 0.9) / 2.0))


# ---------------------------------------------------------------- kernels

def test_kernel_basis_rank1():
    kb = kernel_basis(bloch_projector(np.pi / 3))
    assert kb.kernel_dim == 1
    # kernel vector is the antipodal state
    anti = bloch_state(np.pi / 3 + np.pi)
    overlap = abs(np.vdot(anti, kb.vectors[:, 0]))
    assert overlap == pytest.approx(1.0, abs=1e-10)


def test_kernel_basis_full_rank_mixture():
    rho = 0.5 * bloch_projector(np.pi / 4) + 0.5 * bloch_projector(-np.pi / 2)
    kb = kernel_basis(rho)
    assert kb.kernel_dim == 0
    assert kb.rank == 2


def test_kernel_basis_zero_matrix_is_full_space():
    kb = kernel_basis(np.zeros((3, 3)))
    assert kb.kernel_dim == 3
    assert np.allclose(kb.support_projector(), 0.0)


def test_kernel_basis_orthonormal_columns():
    rng = np.random.default_rng(11)
    for _ in range(20):
        d = int(rng.integers(2, 8))
        r = int(rng.integers(1, d + 1))
        vecs = np.linalg.qr(rng.normal(size=(d, d))
                            + 1j * rng.normal(size=(d, d)))[0][:, :r]
        mat = vecs @ np.diag(rng.uniform(0.2, 1.0, size=r)) @ dagger(vecs)
        kb = kernel_basis(mat)
        assert kb.rank == r
        if kb.kernel_dim:
            gram = dagger(kb.vectors) @ kb.vectors
            assert np.max(np.abs(gram - np.eye(d - r))) < 1e-10
        # oracle: numpy-computed kernel dimension
        assert d - int(np.sum(np.linalg.eigvalsh(mat) > 1e-9)) == kb.kernel_dim


def test_kernel_basis_requires_hermitian():
    with pytest.raises(ValueError):
        kernel_basis(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_same_kernel():
    rng = np.random.default_rng(12)
    p1 = bloch_projector(0.3)
    p2 = bloch_projector(0.3 + np.pi / 2)
    assert same_kernel(p1, p1)
    assert not same_kernel(p1, p2)
    # two full-rank states always share the empty kernel
    assert same_kernel(random_density(rng, 3), random_density(rng, 3))
    # shared support, different weights
    v = np.linalg.qr(rng.normal(size=(4, 4)))[0][:, :2]
    a = v @ np.diag([0.4, 0.6]) @ dagger(v)
    b = v @ np.diag([0.9, 0.1]) @ dagger(v)
    assert same_kernel(a, b)
    with pytest.raises(ValueError):
        same_kernel(np.eye(2) / 2, np.eye(3) / 3)


# ---------------------------------------------------------------- distances

def test_trace_distance_frozen_value():
    assert trace_distance(np.diag([0.75, 0.25]), np.eye(2) / 2
                          ) == pytest.approx(0.5, abs=1e-12)


def test_trace_distance_range_and_symmetry():
    rng = np.random.default_rng(13)
    for _ in range(20):
        a = random_density(rng, 3)
        b = random_density(rng, 3)
        d1 = trace_distance(a, b)
        assert 0.0 <= d1 <= 2.0
        assert d1 == pytest.approx(trace_distance(b, a), abs=1e-12)
        assert trace_distance(a, a) < 1e-12
    # orthogonal pure states sit at the top of the unnormalized range
    assert trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
                          ) == pytest.approx(2.0)


def test_smooth_state():
    rho = bloch_projector(0.4)
    tau = np.eye(2) / 2
    sm = smooth_state(rho, 0.1, tau)
    assert np.allclose(sm.mat, 0.9 * rho + 0.1 * tau)
    with pytest.raises(ValueError):
        smooth_state(rho, 0.0, tau)
    with pytest.raises(ValueError):
        smooth_state(rho, 0.1, np.diag([1.0, 0.0]))   # tau not full rank


# ---------------------------------------------------------------- channels

def test_choi_identity_is_maximally_entangled():
    phi = np.zeros(4, dtype=complex)
    phi[0] = phi[3] = 1.0 / math.sqrt(2.0)
    expected = np.outer(phi, phi.conj())
    assert np.max(np.abs(choi_state(identity_channel(2)).mat - expected)) < 1e-12


def test_choi_fully_depolarizing_is_maximally_mixed():
    ch = depolarizing_channel(1.0, 2)
    assert np.max(np.abs(choi_state(ch).mat - np.eye(4) / 4)) < 1e-12


def test_choi_dephasing_strengths_share_kernel():
    j1 = choi_state(dephasing_channel(0.3)).mat
    j2 = choi_state(dephasing_channel(0.7)).mat
    assert same_kernel(j1, j2)
    assert not same_kernel(j1, choi_state(identity_channel(2)).mat)


def test_choi_of_unitary_composition():
    rng = np.random.default_rng(14)
    u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    v = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    composed = unitary_channel(v @ u)
    j = choi_state(composed).mat
    # oracle: apply the two-step channel to half of |Phi+>
    step = unitary_channel(u)
    step2 = unitary_channel(v)
    raw = choi_state(step).mat
    lifted = np.kron(np.eye(2), step2.kraus[0]) @ raw @ dagger(
        np.kron(np.eye(2), step2.kraus[0]))
    assert np.max(np.abs(j - lifted)) < 1e-12


def test_channel_apply_matches_kraus_sum():
    ch = dephasing_channel(0.25)
    rho = bloch_projector(1.1)
    z = np.diag([1.0, -1.0])
    expected = 0.75 * rho + 0.25 * z @ rho @ z
    assert np.max(np.abs(ch.apply(rho) - expected)) < 1e-12


def test_tensor_index_convention():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.eye(2)
    t = tensor(a, b)
    assert t.shape == (4, 4)
    assert t[0, 2] == 2.0   # (i=0,j=0),(i=1,j=0) block entry = a[0,1]


def test_basis_measurement():
    m = basis_measurement([bloch_state(0.3), bloch_state(0.3 + np.pi)],
                          ["plus", "minus"])
    assert m.n_outcomes == 2
    p = born_probability(bloch_projector(0.3), m.effects[0].mat)
    assert p == pytest.approx(1.0)


def test_kernel_determinism():
    rho = 0.5 * bloch_projector(0.2) + 0.5 * bloch_projector(2.0)
    k1 = kernel_basis(rho)
    k2 = kernel_basis(rho)
    assert np.array_equal(k1.vectors, k2.vectors)
