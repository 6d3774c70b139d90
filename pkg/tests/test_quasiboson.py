import numpy as np
import pytest

from fermigas.lattice import fermi_ball, lune, neg, nonzero_k_vectors
from fermigas.numerics import sym_matrix_function
from fermigas.potential import coulomb, from_table, zero
from fermigas.quasiboson import (build_K, build_mode, cosh2k_minus_one_diag,
                                 csk_pair, exp_pm2K, q_of_s, sandwich_bounds)

TWO_PI_CUBED = (2.0 * np.pi) ** 3


def dim1_mode(lam_target=1.0, vsq_target=1.0):
    """A one-dimensional mode with prescribed gap and coupling weight."""
    cfg = fermi_ball(0.5)
    assert cfg.n_particles == 1
    k = {1.0: (1, 1, 0), 0.5: (1, 0, 0), 2.0: (2, 0, 0)}[lam_target]
    vhat = vsq_target * 2.0 * TWO_PI_CUBED * cfg.k_f
    pot = from_table({k: vhat, neg(k): vhat})
    mode = build_mode(k, cfg, pot)
    assert mode.dim == 1 and mode.h[0] == lam_target
    return mode


def test_build_mode_zero_potential():
    cfg = fermi_ball(1.0)
    mode = build_mode((1, 0, 0), cfg, zero())
    assert np.all(mode.v == 0.0) and np.all(mode.u == 0.0)


def test_build_mode_coupling_weight():
    cfg = fermi_ball(1.0)
    mode = build_mode((1, 0, 0), cfg, coulomb(1.0))
    assert mode.dim == 5
    assert mode.vsq == pytest.approx(1.0 / (2.0 * TWO_PI_CUBED), rel=1e-15)
    assert mode.u**2 == pytest.approx(mode.h * mode.vsq, rel=1e-15)


def test_build_mode_far_k_dim():
    cfg = fermi_ball(1.0)
    assert build_mode((3, 0, 0), cfg, coulomb(1.0)).dim == cfg.n_particles


def test_build_K_scalar_oracle():
    mode = dim1_mode(lam_target=1.0, vsq_target=1.0)
    k_mat = build_K(mode)
    assert k_mat[0, 0] == pytest.approx(-0.25 * np.log(3.0), rel=1e-14)


def test_build_K_zero_potential_is_zero():
    cfg = fermi_ball(1.0)
    mode = build_mode((1, 0, 0), cfg, zero())
    assert np.all(build_K(mode) == 0.0)


def test_build_K_sandwich_bounds():
    cfg = fermi_ball(1.0)
    for g in (0.1, 1.0, 10.0):
        mode = build_mode((1, 0, 0), cfg, coulomb(g))
        lower, upper, _ = sandwich_bounds(mode)
        neg_k = -build_K(mode)
        assert np.all(neg_k <= upper + 1e-10)
        assert np.all(neg_k >= lower - 1e-10)


def test_exp_pm2K_scalar():
    mode = dim1_mode(lam_target=1.0, vsq_target=1.0)
    a, a_inv = exp_pm2K(mode)
    assert a[0, 0] == pytest.approx(np.sqrt(3.0), rel=1e-14)
    assert a_inv[0, 0] == pytest.approx(1.0 / np.sqrt(3.0), rel=1e-14)


def test_exp_pm2K_inverse_pair_and_roundtrip():
    cfg = fermi_ball(1.0)
    for k in ((1, 0, 0), (2, 0, 0), (1, 1, 1)):
        mode = build_mode(k, cfg, coulomb(1.0))
        a, a_inv = exp_pm2K(mode)
        eye = np.eye(mode.dim)
        assert np.max(np.abs(a @ a_inv - eye)) < 1e-10
        k_mat = build_K(mode)
        assert np.max(np.abs(sym_matrix_function(-2.0 * k_mat, "exp") - a)) < 1e-9


def test_cosh_diag_matches_exp_pair():
    cfg = fermi_ball(1.0)
    mode = build_mode((1, 1, 0), cfg, coulomb(2.0))
    a, a_inv = exp_pm2K(mode)
    want = 0.5 * (np.diag(a) + np.diag(a_inv)) - 1.0
    assert cosh2k_minus_one_diag(mode) == pytest.approx(want, rel=1e-12)


def test_csk_pair_tau_zero():
    mode = dim1_mode()
    c, s = csk_pair(build_K(mode), 0.0)
    assert np.all(c == 0.0) and np.all(s == 0.0)


def test_csk_hyperbolic_identity():
    cfg = fermi_ball(1.0)
    k_mat = build_K(build_mode((1, 0, 0), cfg, coulomb(1.0)))
    eye = np.eye(k_mat.shape[0])
    for tau in (0.25, 0.5, 1.0):
        c, s = csk_pair(k_mat, tau)
        assert np.max(np.abs((c + eye) @ (c + eye) - s @ s - eye)) < 1e-10


def test_csk_sandwich_scaled_by_tau():
    cfg = fermi_ball(1.0)
    mode = build_mode((1, 0, 0), cfg, coulomb(1.0))
    lower, upper, _ = sandwich_bounds(mode)
    k_mat = build_K(mode)
    for tau in (0.0, 0.5, 1.0):
        _, s = csk_pair(k_mat, tau)
        assert np.all(s <= tau * upper + 1e-10)
        assert np.all(s >= tau * lower - 1e-10)


def test_q_of_s_example_and_zero():
    cfg = fermi_ball(1.0)
    mode = build_mode((1, 0, 0), cfg, coulomb(1.0))
    assert q_of_s(mode, 0.0) == pytest.approx((26.0 / 3.0) / TWO_PI_CUBED,
                                              rel=1e-13)
    assert q_of_s(mode, 0.0) == pytest.approx(0.034940, abs=1e-6)
    assert q_of_s(build_mode((1, 0, 0), cfg, zero()), 1.3) == 0.0


def test_q_of_s_decreasing_with_vanishing_limit():
    cfg = fermi_ball(2.0)
    mode = build_mode((1, 1, 0), cfg, coulomb(1.0))
    s = np.linspace(0.0, 50.0, 40)
    q = q_of_s(mode, s)
    assert np.all(np.diff(q) < 0.0)
    assert q_of_s(mode, 1e6) < 1e-10


def test_q_matches_resolvent_pairing():
    cfg = fermi_ball(1.0)
    rng = np.random.default_rng(2)
    for k in ((1, 0, 0), (2, 1, 0)):
        mode = build_mode(k, cfg, coulomb(1.0))
        for s in rng.uniform(0.0, 10.0, size=6):
            pairing = 2.0 * float(np.dot(mode.u, mode.u / (mode.h**2 + s * s)))
            assert 1.0 + pairing == pytest.approx(1.0 + q_of_s(mode, float(s)),
                                                  rel=1e-12)


def test_kernel_reflection_and_nsd():
    for k_f in (1.0, 2.0):
        cfg = fermi_ball(k_f)
        for k in nonzero_k_vectors(int(2 * k_f)):
            mode = build_mode(k, cfg, coulomb(1.0))
            k_mat = build_K(mode)
            assert np.linalg.eigvalsh(k_mat).max() <= 1e-10
            mirror = build_mode(neg(k), cfg, coulomb(1.0))
            perm = [mirror.lune.index_of(neg(p)) for p in mode.lune.points]
            assert np.max(np.abs(k_mat - build_K(mirror)[np.ix_(perm, perm)])) < 1e-10
