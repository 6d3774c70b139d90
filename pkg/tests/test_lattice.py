import math

import numpy as np
import pytest

from fermigas.lattice import (TailPolicy, ball_points, d_intersection,
                              fermi_ball, is_sum_of_three_squares, k_support,
                              kappa_and_weight, lambda_of, lune, neg,
                              nonzero_k_vectors, norm2, orbit_reduce,
                              signed_perm_group, truncated_k_vectors)


def brute_ball(r2):
    r = math.isqrt(r2) if r2 >= 0 else -1
    out = []
    for x in range(-r, r + 1):
        for y in range(-r, r + 1):
            for z in range(-r, r + 1):
                if x * x + y * y + z * z <= r2:
                    out.append((x, y, z))
    return sorted(out)


def brute_lune(k, cfg):
    kf2 = cfg.r2
    out = []
    rng = int(math.ceil(cfg.k_f)) + max(abs(c) for c in k) + 1
    for x in range(-rng, rng + 1):
        for y in range(-rng, rng + 1):
            for z in range(-rng, rng + 1):
                p = (x, y, z)
                pk = (x - k[0], y - k[1], z - k[2])
                if norm2(pk) <= kf2 < norm2(p):
                    out.append(p)
    return sorted(out)


def test_fermi_ball_counts():
    cfg = fermi_ball(1.0)
    assert cfg.n_particles == 7
    assert cfg.kappa == 1.5
    cfg = fermi_ball(2.0)
    assert cfg.n_particles == 33
    assert cfg.kappa == 4.5
    cfg = fermi_ball(0.5)
    assert cfg.n_particles == 1
    assert cfg.kappa == 0.5


@pytest.mark.parametrize("k_f", [0.5, 1.0, 1.5, 2.0, 2.7, 3.0])
def test_ball_matches_brute_force(k_f):
    cfg = fermi_ball(k_f)
    assert list(cfg.ball) == brute_ball(cfg.r2)
    assert cfg.n_particles == len(cfg.ball)


def test_fermi_ball_rejects_nonpositive():
    with pytest.raises(ValueError):
        fermi_ball(0.0)


def test_kappa_skips_unattainable_norms():
    # for k_f^2 = 7 the extremes are 6 and 8 (7 is not a sum of 3 squares)
    cfg = fermi_ball(math.sqrt(7.0))
    assert not is_sum_of_three_squares(7)
    assert cfg.kappa == 7.0
    for p in nonzero_k_vectors(4):
        assert abs(norm2(p) - cfg.kappa) >= 0.5


def test_lune_example_unit_ball():
    cfg = fermi_ball(1.0)
    basis = lune((1, 0, 0), cfg)
    assert basis.points == ((1, -1, 0), (1, 0, -1), (1, 0, 1), (1, 1, 0), (2, 0, 0))
    assert list(basis.lambdas) == [0.5, 0.5, 0.5, 0.5, 1.5]
    basis2 = lune((2, 0, 0), cfg)
    assert basis2.dim == 6
    assert sorted(basis2.lambdas) == [2.0, 2.0, 2.0, 2.0, 2.0, 4.0]


def test_lune_far_k_is_whole_shifted_ball():
    cfg = fermi_ball(1.0)
    for k in ((3, 0, 0), (2, 2, 1), (0, 0, 5)):
        assert lune(k, cfg).dim == cfg.n_particles


@pytest.mark.parametrize("k_f", [1.0, 2.0])
def test_lune_matches_brute_force(k_f):
    cfg = fermi_ball(k_f)
    for k in ((1, 0, 0), (1, 1, 0), (2, 1, 0), (0, 0, 3)):
        basis = lune(k, cfg)
        assert list(basis.points) == brute_lune(k, cfg)
        for p, lam in zip(basis.points, basis.lambdas):
            assert lam == (norm2(p) - norm2(tuple(a - b for a, b in zip(p, k)))) / 2


def test_lune_rejects_zero_k():
    with pytest.raises(ValueError):
        lune((0, 0, 0), fermi_ball(1.0))


def test_lambda_of_examples():
    assert lambda_of((1, 0, 0), (2, 0, 0)) == 1.5
    assert lambda_of((1, 0, 0), (1, 1, 0)) == 0.5
    for k in ((1, 2, 3), (2, 0, 0)):
        assert lambda_of(k, k) == norm2(k) / 2


def test_gap_lower_bound_exhaustive():
    for k_f in (1.0, 2.0, 3.0):
        cfg = fermi_ball(k_f)
        for k in nonzero_k_vectors(int(math.ceil(2 * k_f)) + 2):
            basis = lune(k, cfg)
            assert basis.dim > 0
            assert basis.lambdas.min() >= 0.5


def test_reflection_symmetry_exhaustive():
    for k_f in (1.0, 2.0, 3.0):
        cfg = fermi_ball(k_f)
        for k in nonzero_k_vectors(int(math.ceil(2 * k_f))):
            basis = lune(k, cfg)
            mirror = lune(neg(k), cfg)
            assert tuple(sorted(neg(p) for p in basis.points)) == mirror.points
            lam = dict(zip(basis.points, basis.lambdas))
            for p, l in zip(mirror.points, mirror.lambdas):
                assert lam[neg(p)] == l


def test_four_point_identity_random():
    cfg = fermi_ball(2.0)
    rng = np.random.Generator(np.random.Philox(key=5))
    tested = 0
    while tested < 300:
        k = tuple(int(c) for c in rng.integers(-4, 5, size=3))
        if k == (0, 0, 0):
            continue
        basis = lune(k, cfg)
        i, j = rng.integers(0, basis.dim, size=2)
        p, q = basis.points[int(i)], basis.points[int(j)]
        l = tuple(pc + qc - kc for pc, qc, kc in zip(p, q, k))
        if l == (0, 0, 0) or not (cfg.in_lune(l, p) and cfg.in_lune(l, q)):
            continue
        assert lambda_of(k, p) + lambda_of(k, q) == lambda_of(l, p) + lambda_of(l, q)
        tested += 1


def test_d_intersection_examples():
    cfg = fermi_ball(1.0)
    assert d_intersection((1, 0, 0), (1, 1, 0), cfg) == [(1, 1, 0)]
    # xi = 0: +-xi and k+-xi coincide pairwise, multiplicity 2 kept
    assert d_intersection((2, 0, 0), (0, 0, 0), cfg) == [(2, 0, 0), (2, 0, 0)]
    assert d_intersection((1, 0, 0), (0, 0, 0), cfg) == []
    assert d_intersection((2, 0, 0), (0, 0, 0), cfg,
                          collapse_coincident=True) == [(2, 0, 0)]
    # xi inside, both k+-xi inside the ball: nothing clears |zeta| > k_F
    assert d_intersection((1, 0, 0), (0, 0, 1), fermi_ball(2.0)) == []


def test_d_intersection_membership_is_exact():
    cfg = fermi_ball(2.0)
    for k in ((1, 0, 0), (2, 1, 0)):
        basis = lune(k, cfg)
        for xi in ((1, 1, 0), (2, 0, 0), (0, 0, 0), (3, 1, 0)):
            got = d_intersection(k, xi, cfg)
            cands = [xi, neg(xi),
                     tuple(a + b for a, b in zip(k, xi)),
                     tuple(a - b for a, b in zip(k, xi))]
            assert got == [z for z in cands if z in basis]


def test_k_support_outside_is_exactly_finite():
    cfg = fermi_ball(1.0)
    sup = k_support((2, 0, 0), cfg)
    assert sup.exact
    assert len(sup.finite_part) == 14
    for k in sup.finite_part:
        assert cfg.in_lune(k, (2, 0, 0)) or cfg.in_lune(k, (-2, 0, 0))
    # support does not depend on the policy cutoff
    sup2 = k_support((2, 0, 0), cfg, TailPolicy(k_max=50))
    assert sup2.finite_part == sup.finite_part


def test_k_support_inside_is_truncated():
    cfg = fermi_ball(1.0)
    sup = k_support((0, 0, 0), cfg)
    assert not sup.exact and sup.finite_part == ()
    ks = truncated_k_vectors((0, 0, 0), cfg, 3)
    assert ks == [k for k in nonzero_k_vectors(3) if norm2(k) > 1]
    # shell split covers the ball exactly once
    lo = truncated_k_vectors((0, 0, 0), cfg, 2)
    hi = truncated_k_vectors((0, 0, 0), cfg, 3, k_min_excl=2)
    assert sorted(lo + hi) == sorted(ks)


def test_k_support_far_outside_sits_near_xi():
    cfg = fermi_ball(1.0)
    xi = (7, 0, 0)
    sup = k_support(xi, cfg)
    assert sup.exact
    for k in sup.finite_part:
        assert min(norm2(tuple(a - b for a, b in zip(k, xi))),
                   norm2(tuple(a + b for a, b in zip(k, xi)))) <= cfg.r2


def test_kappa_and_weight_examples():
    cfg = fermi_ball(1.0)
    m_inv, m = kappa_and_weight((0, 0, 0), cfg)
    assert m_inv == 1.5 and m == pytest.approx(2.0 / 3.0)
    m_inv, m = kappa_and_weight((1, 1, 0), cfg)
    assert m_inv == 0.5 and m == 2.0


def test_orbit_reduce_reconstructs_full_sum():
    cfg = fermi_ball(1.0)
    ks = truncated_k_vectors((1, 0, 0), cfg, 4)
    for symmetry in ("radial", "even", "none"):
        pairs = orbit_reduce(ks, (1, 0, 0), symmetry)
        assert sum(w for _, w in pairs) == len(ks)
        # weighted sum of an invariant function matches the plain sum
        def f(k):
            return norm2(k) ** -1.5
        assert sum(w * f(k) for k, w in pairs) == pytest.approx(
            sum(f(k) for k in ks), rel=1e-13)
    assert len(orbit_reduce(ks, (1, 0, 0), "none")) == len(ks)
    with pytest.raises(ValueError):
        orbit_reduce(ks, (1, 0, 0), "bogus")


def test_signed_perm_group_is_the_48_element_point_group():
    g = signed_perm_group()
    assert g.shape == (48, 3, 3)
    assert len({m.tobytes() for m in g}) == 48
    for m in g:
        assert abs(round(float(np.linalg.det(m)))) == 1


def test_lattice_sum_trend_bounded():
    # fitted constant for sum lambda^beta <= c k_F^(2+beta) |k|^(1+beta)
    for beta in (-1.0, -0.5):
        ratios = []
        for k_f in (1.0, 2.0, 3.0):
            cfg = fermi_ball(k_f)
            for k in nonzero_k_vectors(int(2 * k_f)):
                kn = math.sqrt(norm2(k))
                basis = lune(k, cfg)
                bound = k_f ** (2.0 + beta) * kn ** (1.0 + beta)
                ratios.append(float(np.sum(basis.lambdas ** beta)) / bound)
        c = max(ratios)
        assert np.isfinite(c) and c > 0
        # single fitted constant works across the whole swept set
        assert all(r <= c for r in ratios)
