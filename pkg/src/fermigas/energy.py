"""Ground-state-energy pieces of the mean-field electron gas.

The Fermi-state energy is a finite exact sum.  The two correlation
pieces are

    E_corr,bos = (1/pi) sum_k int_0^inf F(q_k(s)) ds,  F(x) = log(1+x) - x,
    E_corr,ex  = 1 / (4 (2pi)^6 k_F^2)
                 * sum_k sum_{p,q in lune(k)} V_k V_{p+q-k} / (lam_p + lam_q),

with the k-sums truncated by cutoff doubling.  For radial potentials the
k-sum is reduced to octahedral orbit representatives, which is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import (LatticeConfig, TailPolicy, lune, nonzero_k_vectors,
                      norm2, orbit_reduce)
from .numerics import QuadratureResult, integrate_semi_infinite
from .parallel import ordered_map
from .potential import Potential, evaluate
from .quasiboson import build_mode, q_of_s

TWO_PI_CUBED = (2.0 * np.pi) ** 3
TWO_PI_6 = (2.0 * np.pi) ** 6


def stable_log1p_minus_x(x):
    """log(1+x) - x without cancellation for small x.

    Below 1e-4 the three-term series -x^2/2 + x^3/3 - x^4/4 is used; the
    truncation error is then below x^5 ~ 1e-20.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, x, 0.0)
    series = -0.5 * xs**2 + xs**3 / 3.0 - 0.25 * xs**4
    big = np.log1p(np.where(small, 0.0, x)) - np.where(small, 0.0, x)
    out = np.where(small, series, big)
    return out if out.shape else float(out)


@dataclass
class EnergyReport:
    e_fs_kinetic: float
    e_fs_interaction: float
    e_corr_bos: float
    e_corr_ex: float
    k_cutoff: int
    tail_flags: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "e_fs_kinetic": self.e_fs_kinetic,
            "e_fs_interaction": self.e_fs_interaction,
            "e_corr_bos": self.e_corr_bos,
            "e_corr_ex": self.e_corr_ex,
            "k_cutoff": self.k_cutoff,
            "tail_flags": self.tail_flags,
        }


def e_fs(cfg: LatticeConfig, pot: Potential) -> tuple[float, float]:
    """Kinetic and interaction energy of the filled Fermi state.

    The kinetic part is the integer sum of squared norms over the ball.
    The interaction k-sum is exactly finite: beyond |k| > 2 k_F the lune
    is the whole shifted ball and the summand V_k (|L_k| - N) vanishes.
    """
    kinetic = float(sum(norm2(p) for p in cfg.ball))
    two_kf_r2 = math.floor(4.0 * cfg.k_f * cfg.k_f)
    interaction = 0.0
    for k in nonzero_k_vectors(math.isqrt(two_kf_r2) + 1):
        if norm2(k) > two_kf_r2:
            continue
        vhat = evaluate(pot, k)
        if vhat == 0.0:
            continue
        deficit = lune(k, cfg).dim - cfg.n_particles
        interaction += vhat * deficit
    return kinetic, interaction / (2.0 * TWO_PI_CUBED)


def _bos_term(k, cfg: LatticeConfig, pot: Potential,
              quad_tol: float) -> tuple[float, float, bool]:
    """(1/pi) int_0^inf F(q_k(s)) ds for one k, with error and flag."""
    if evaluate(pot, k) == 0.0:
        return 0.0, 0.0, True
    mode = build_mode(k, cfg, pot)
    lam_min = float(np.min(mode.h))

    def integrand(s):
        return stable_log1p_minus_x(q_of_s(mode, s))

    res = integrate_semi_infinite(integrand, tol=quad_tol,
                                  seeds=(lam_min, 10.0 * lam_min))
    return res.value / np.pi, res.abs_error_estimate / np.pi, res.converged


def _ex_term(k, cfg: LatticeConfig, pot: Potential) -> float:
    """Exact pair sum V_k V_{p+q-k} / (lam_p + lam_q) over one lune squared."""
    vhat = evaluate(pot, k)
    if vhat == 0.0:
        return 0.0
    basis = lune(k, cfg)
    pts = np.array(basis.points, dtype=np.int64)
    kv = np.array(k, dtype=np.int64)
    lam = basis.lambdas
    # |p + q - k|^2 for all pairs from the expansion |a + b|^2 with a = p - k
    a = pts - kv
    an2 = np.einsum("ij,ij->i", a, a).astype(float)
    bn2 = np.einsum("ij,ij->i", pts, pts).astype(float)
    cross = 2.0 * (a @ pts.T).astype(float)
    n2 = an2[:, None] + bn2[None, :] + cross
    if pot.is_radial:
        vmat = pot.from_norm2(n2)
    else:
        vmat = np.empty_like(n2)
        for i in range(pts.shape[0]):
            for j in range(pts.shape[0]):
                arg = tuple(int(c) for c in a[i] + pts[j])
                vmat[i, j] = evaluate(pot, arg)
    denom = lam[:, None] + lam[None, :]
    return vhat * float(np.sum(vmat / denom))


def _truncated_k_sum(term_fn, cfg: LatticeConfig, pot: Potential,
                     policy: TailPolicy, threads: int | None,
                     symmetry: str | None = None):
    """Cutoff-doubled sum of a per-k scalar (plus diagnostics) over k != 0.

    term_fn(k) must return (value, quad_err, converged).  The
    enumeration collapses to orbit representatives with multiplicity
    weights, exact because every per-k summand here is invariant under
    the potential's symmetry class (full point group for radial
    potentials, k -> -k for merely even ones).
    """
    symmetry = pot.symmetry if symmetry is None else symmetry

    def shell(k_hi, k_lo):
        items = orbit_reduce(nonzero_k_vectors(k_hi, k_min_excl=k_lo),
                             (0, 0, 0), symmetry)
        results = ordered_map(lambda kw: term_fn(kw[0]), items, threads)
        val = sum(w * r[0] for (_, w), r in zip(items, results))
        qerr = sum(w * r[1] for (_, w), r in zip(items, results))
        ok = all(r[2] for r in results)
        count = sum(w for _, w in items)
        return val, qerr, ok, count

    k_cut = policy.initial_k_max(cfg)
    total, qerr, ok, n_k = shell(k_cut, 0)
    tail = np.inf
    converged = False
    for _ in range(policy.max_doublings):
        new_cut = 2 * k_cut
        inc, inc_err, inc_ok, inc_n = shell(new_cut, k_cut)
        total += inc
        qerr += inc_err
        ok = ok and inc_ok
        n_k += inc_n
        k_cut = new_cut
        tail = abs(inc)
        if tail <= policy.tail_tol * max(abs(total), 1e-300):
            converged = True
            break
    return total, tail, qerr, k_cut, n_k, converged and ok


def e_corr_bos(cfg: LatticeConfig, pot: Potential,
               policy: TailPolicy | None = None, quad_tol: float = 1e-9,
               threads: int | None = 1):
    """Bosonization correlation energy; <= 0 since F <= 0.

    Returns (value, tail_estimate, quad_error, k_cutoff, converged).
    """
    policy = policy or TailPolicy()
    total, tail, qerr, k_cut, _, ok = _truncated_k_sum(
        lambda k: _bos_term(k, cfg, pot, quad_tol), cfg, pot, policy, threads)
    return total, tail, qerr, k_cut, ok


def e_corr_ex(cfg: LatticeConfig, pot: Potential,
              policy: TailPolicy | None = None, threads: int | None = 1):
    """Exchange correlation energy; >= 0 for nonnegative potentials.

    Returns (value, tail_estimate, k_cutoff, converged).
    """
    policy = policy or TailPolicy()
    pref = 1.0 / (4.0 * TWO_PI_6 * cfg.k_f**2)
    total, tail, _, k_cut, _, ok = _truncated_k_sum(
        lambda k: (_ex_term(k, cfg, pot), 0.0, True), cfg, pot, policy, threads)
    return pref * total, pref * tail, k_cut, ok


def single_k_exchange_term(k, cfg: LatticeConfig, pot: Potential) -> float:
    """One k-term of E_corr,ex including its prefactor (for diagnostics)."""
    return _ex_term(k, cfg, pot) / (4.0 * TWO_PI_6 * cfg.k_f**2)


def energy_report(cfg: LatticeConfig, pot: Potential,
                  policy: TailPolicy | None = None, quad_tol: float = 1e-9,
                  threads: int | None = 1) -> EnergyReport:
    policy = policy or TailPolicy()
    kin, inter = e_fs(cfg, pot)
    bos, bos_tail, bos_qerr, bos_cut, bos_ok = e_corr_bos(
        cfg, pot, policy, quad_tol, threads)
    ex, ex_tail, ex_cut, ex_ok = e_corr_ex(cfg, pot, policy, threads)
    return EnergyReport(
        e_fs_kinetic=kin,
        e_fs_interaction=inter,
        e_corr_bos=bos,
        e_corr_ex=ex,
        k_cutoff=max(bos_cut, ex_cut),
        tail_flags={
            "bos_tail_estimate": bos_tail,
            "bos_quad_error": bos_qerr,
            "bos_converged": bos_ok,
            "ex_tail_estimate": ex_tail,
            "ex_converged": ex_ok,
        },
    )
