"""Shared numerical kernels.

Three independent pieces live here:

* adaptive Gauss-Kronrod quadrature on [0, inf) via the rational map
  s = t/(1-t), with optional seed points to pre-split panels at known
  scales of the integrand;
* matrix functions of real symmetric matrices through a single
  eigendecomposition backend;
* the O(n) diagonal of a rank-one-updated resolvent (h^2 + 2 u u^T + s^2)^-1.

All kernels are pure and reentrant.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

# 15-point Kronrod extension of 7-point Gauss on [-1, 1].  Nodes are
# strictly interior, so panel endpoints (in particular the mapped point
# at infinity) are never evaluated.
_GK_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_GK_WEIGHTS = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_G7_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
_G7_WEIGHTS = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])


@dataclass
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int
    converged: bool = True

    def __post_init__(self):
        assert self.abs_error_estimate >= 0.0
        assert self.evaluations >= 1


def _gk_panel(g: Callable[[np.ndarray], np.ndarray], a: float, b: float):
    """Kronrod value, |K15 - G7| error estimate, and eval count on [a, b]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    t = mid + half * _GK_NODES
    y = np.asarray(g(t), dtype=float)
    vk = half * float(np.dot(_GK_WEIGHTS, y))
    vg = half * float(np.dot(_G7_WEIGHTS, y[_G7_IDX]))
    return vk, abs(vk - vg), t.size


def integrate_panels(g: Callable[[np.ndarray], np.ndarray],
                     edges: Iterable[float], tol: float,
                     max_subdivisions: int = 2000) -> QuadratureResult:
    """Adaptive bisection over initial panels given by ``edges``.

    The worst panel (largest Kronrod-Gauss discrepancy) is split first;
    refinement is deterministic and independent of ``tol``, so loosening
    the tolerance can only stop the same refinement sequence earlier.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    edges = sorted(set(float(e) for e in edges))
    if len(edges) < 2:
        raise ValueError("need at least two panel edges")
    heap = []
    counter = 0
    total_v = 0.0
    total_e = 0.0
    nev = 0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e, n = _gk_panel(g, a, b)
        heapq.heappush(heap, (-e, counter, a, b, v))
        counter += 1
        total_v += v
        total_e += e
        nev += n
    splits = 0
    while total_e > tol and splits < max_subdivisions:
        neg_e, _, a, b, v = heapq.heappop(heap)
        total_v -= v
        total_e += neg_e  # neg_e is -err
        mid = 0.5 * (a + b)
        for lo, hi in ((a, mid), (mid, b)):
            v2, e2, n2 = _gk_panel(g, lo, hi)
            heapq.heappush(heap, (-e2, counter, lo, hi, v2))
            counter += 1
            total_v += v2
            total_e += e2
            nev += n2
        splits += 1
    # recompute sums in deterministic (position) order to avoid heap-order noise
    panels = sorted(heap, key=lambda item: item[2])
    value = sum(p[4] for p in panels)
    err = sum(-p[0] for p in panels)
    return QuadratureResult(value=value, abs_error_estimate=err,
                            evaluations=nev, converged=err <= tol)


def integrate_interval(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                       tol: float = 1e-9, seeds: Iterable[float] = (),
                       max_subdivisions: int = 2000) -> QuadratureResult:
    """Adaptive quadrature of a vectorized integrand on the finite [a, b]."""
    edges = [a, b] + [s for s in seeds if a < s < b]
    return integrate_panels(f, edges, tol, max_subdivisions)


def integrate_semi_infinite(f: Callable[[np.ndarray], np.ndarray],
                            tol: float = 1e-9, seeds: Iterable[float] = (),
                            max_subdivisions: int = 2000) -> QuadratureResult:
    """Integrate a vectorized f over [0, inf) to absolute tolerance ``tol``.

    Substituting s = t/(1-t) maps the half line onto [0, 1); the mapped
    integrand f(s) / (1-t)^2 is then integrated adaptively.  ``seeds``
    are s-values (e.g. known peak scales) that seed the initial panel
    edges.  Non-convergence after ``max_subdivisions`` splits is flagged
    on the result, never silent.
    """
    def g(t):
        omt = 1.0 - t
        s = t / omt
        return np.asarray(f(s), dtype=float) / omt**2

    edges = [0.0, 1.0] + [s / (1.0 + s) for s in seeds if s > 0.0]
    return integrate_panels(g, edges, tol, max_subdivisions)


def integrate_semi_infinite_batch(f: Callable[[np.ndarray], np.ndarray],
                                  n: int, tol: float = 1e-9,
                                  seeds: Iterable[float] = (),
                                  max_subdivisions: int = 2000):
    """Integrate a family of integrands over [0, inf) on shared panels.

    f maps an array of m quadrature nodes to an (n, m) array of values.
    Panels are refined (worst first, by the largest per-integrand
    discrepancy) until every integrand's accumulated error estimate is
    below ``tol``.  Returns (values, errors, evaluations, converged)
    with values and errors of shape (n,).

    Sharing panels is conservative: each per-integrand error estimate is
    a valid Kronrod-Gauss bound on its own panel sums.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")

    def g(t):
        omt = 1.0 - t
        s = t / omt
        return np.asarray(f(s), dtype=float) / omt**2

    def panel(a, b):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        t = mid + half * _GK_NODES
        y = g(t)
        vk = half * (y @ _GK_WEIGHTS)
        vg = half * (y[:, _G7_IDX] @ _G7_WEIGHTS)
        return vk, np.abs(vk - vg)

    edges = sorted({0.0, 1.0} | {s / (1.0 + s) for s in seeds if s > 0.0})
    panels = []
    nev = 0
    for a, b in zip(edges[:-1], edges[1:]):
        vk, err = panel(a, b)
        panels.append((a, b, vk, err))
        nev += _GK_NODES.size
    splits = 0
    while splits < max_subdivisions:
        total_err = np.sum([p[3] for p in panels], axis=0)
        if float(np.max(total_err)) <= tol:
            break
        worst = max(range(len(panels)),
                    key=lambda i: (float(np.max(panels[i][3])), -panels[i][0]))
        a, b, _, _ = panels.pop(worst)
        mid = 0.5 * (a + b)
        for lo, hi in ((a, mid), (mid, b)):
            vk, err = panel(lo, hi)
            panels.append((lo, hi, vk, err))
            nev += _GK_NODES.size
        splits += 1
    panels.sort(key=lambda p: p[0])
    values = np.sum([p[2] for p in panels], axis=0)
    errors = np.sum([p[3] for p in panels], axis=0)
    return values, errors, nev, bool(np.max(errors) <= tol)


class MatrixFunctionDomainError(ValueError):
    """Spectrum outside the domain of the requested matrix function."""

    def __init__(self, fn: str, min_eigenvalue: float):
        self.fn = fn
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"matrix function {fn!r} needs a positive definite argument; "
            f"minimum eigenvalue is {min_eigenvalue:.6e}"
        )


def symmetry_defect(a: np.ndarray) -> float:
    """max |A - A^T| relative to max |A| (0 for the zero matrix)."""
    if a.size == 0:
        return 0.0
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a - a.T))) / scale


def assert_symmetric(a: np.ndarray, rel: float = 1e-12) -> None:
    defect = symmetry_defect(a)
    if defect > rel:
        raise ValueError(f"matrix is not symmetric (relative defect {defect:.3e})")


_SCALAR_FN = {
    "sqrt": np.sqrt,
    "inv_sqrt": lambda w: 1.0 / np.sqrt(w),
    "log": np.log,
    "exp": np.exp,
    "cosh": np.cosh,
}
_NEEDS_POSITIVE = {"sqrt", "inv_sqrt", "log"}


def sym_matrix_function(a: np.ndarray, fn: str) -> np.ndarray:
    """Apply fn in {sqrt, inv_sqrt, log, exp, cosh} to a symmetric matrix.

    Computed as U f(diag) U^T from one eigendecomposition and
    re-symmetrized.  sqrt, inv_sqrt and log raise
    MatrixFunctionDomainError (naming the offending eigenvalue) unless
    the matrix is positive definite.
    """
    if fn not in _SCALAR_FN:
        raise ValueError(f"unknown matrix function {fn!r}")
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return a.copy()
    assert_symmetric(a)
    w, u = np.linalg.eigh(a)
    if fn in _NEEDS_POSITIVE and w[0] <= 0.0:
        raise MatrixFunctionDomainError(fn, float(w[0]))
    b = (u * _SCALAR_FN[fn](w)) @ u.T
    return 0.5 * (b + b.T)


def sym_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix (ascending eigenvalues)."""
    assert_symmetric(a)
    return np.linalg.eigh(np.asarray(a, dtype=float))


def rank1_resolvent_diag(h_diag: np.ndarray, u: np.ndarray, s: float,
                         index: int) -> float:
    """(index, index) entry of (diag(h)^2 + 2 u u^T + s^2)^-1, in O(n).

    Uses the rank-one update of the diagonal resolvent: with
    r_i = 1/(h_i^2 + s^2) and w = r * u,

        entry = r_index - 2 w_index^2 / (1 + 2 <u, w>).

    The denominator is >= 1, so no cancellation can blow up.
    """
    h = np.asarray(h_diag, dtype=float)
    u = np.asarray(u, dtype=float)
    if h.shape != u.shape:
        raise ValueError("h_diag and u must have the same length")
    r = 1.0 / (h**2 + s * s)
    w = r * u
    denom = 1.0 + 2.0 * float(np.dot(u, w))
    return float(r[index] - 2.0 * w[index] ** 2 / denom)


def rank1_resolvent_diag_all(h_diag: np.ndarray, u: np.ndarray,
                             s: float) -> np.ndarray:
    """Full diagonal of (diag(h)^2 + 2 u u^T + s^2)^-1 in one pass."""
    h = np.asarray(h_diag, dtype=float)
    u = np.asarray(u, dtype=float)
    r = 1.0 / (h**2 + s * s)
    w = r * u
    denom = 1.0 + 2.0 * float(np.dot(u, w))
    return r - 2.0 * w**2 / denom
