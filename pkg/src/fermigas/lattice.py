"""Integer-lattice geometry of the filled Fermi ball.

Everything here is exact: membership tests compare integer squared norms
against an integer threshold, and the excitation gaps are half-integers
(hence exactly representable as floats).  All containers are immutable
and ordered lexicographically so repeated builds are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

Vec3 = tuple[int, int, int]


def norm2(p: Sequence[int]) -> int:
    """Squared Euclidean norm of an integer vector, as a Python int."""
    return int(p[0]) * int(p[0]) + int(p[1]) * int(p[1]) + int(p[2]) * int(p[2])


def as_vec3(p: Sequence[int]) -> Vec3:
    return (int(p[0]), int(p[1]), int(p[2]))


def neg(p: Vec3) -> Vec3:
    return (-p[0], -p[1], -p[2])


def add(p: Vec3, q: Vec3) -> Vec3:
    return (p[0] + q[0], p[1] + q[1], p[2] + q[2])


def sub(p: Vec3, q: Vec3) -> Vec3:
    return (p[0] - q[0], p[1] - q[1], p[2] - q[2])


def is_sum_of_three_squares(n: int) -> bool:
    """Legendre criterion: n is a sum of three squares iff not 4^a(8b+7)."""
    if n < 0:
        return False
    while n % 4 == 0 and n > 0:
        n //= 4
    return n % 8 != 7


def ball_points(r2: int) -> tuple[Vec3, ...]:
    """All integer points with squared norm <= r2, lexicographically sorted."""
    return tuple(map(tuple, ball_array(r2).tolist()))


def ball_array(r2: int, r2_min_excl: int = -1) -> np.ndarray:
    """Integer points with r2_min_excl < |p|^2 <= r2 as a lex-sorted (n, 3) array."""
    if r2 < 0:
        return np.zeros((0, 3), dtype=np.int64)
    r = math.isqrt(r2)
    axis = np.arange(-r, r + 1, dtype=np.int64)
    x, y, z = np.meshgrid(axis, axis, axis, indexing="ij")
    pts = np.column_stack([x.ravel(), y.ravel(), z.ravel()])
    n2 = np.einsum("ij,ij->i", pts, pts)
    pts = pts[(n2 <= r2) & (n2 > r2_min_excl)]
    order = np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0]))
    return pts[order]


@dataclass(frozen=True)
class LatticeConfig:
    """Filled Fermi ball at radius k_F.

    N is the exact count of integer points with |p| <= k_F, never the
    continuum idealization 4*pi*k_F^3/3.  ``r2`` is the integer threshold
    floor(k_F^2); membership is the exact test |p|^2 <= r2.  ``kappa`` is
    the midpoint of the squared-norm gap across the Fermi surface and
    bounds ||p|^2 - kappa| >= 1/2 for every integer p.
    """

    k_f: float
    r2: int
    n_particles: int
    kappa: float
    ball: tuple[Vec3, ...] = field(repr=False)
    _ball_set: frozenset = field(repr=False)

    def in_ball(self, p: Sequence[int]) -> bool:
        return norm2(p) <= self.r2

    def in_lune(self, k: Vec3, p: Vec3) -> bool:
        """Exact test for |p - k| <= k_F < |p|."""
        return norm2(sub(p, k)) <= self.r2 and norm2(p) > self.r2


def fermi_ball(k_f: float) -> LatticeConfig:
    """Enumerate the Fermi ball and derive N and kappa exactly.

    Any k_f > 0 is valid; the closed shell at radius k_f is taken, i.e.
    all integer points with |p|^2 <= floor(k_f^2).
    """
    if k_f <= 0:
        raise ValueError(f"k_f must be positive, got {k_f}")
    r2 = math.floor(k_f * k_f)
    ball = ball_points(r2)

    sup_inside = max(n for n in range(r2, -1, -1) if is_sum_of_three_squares(n))
    inf_outside = r2 + 1
    while not is_sum_of_three_squares(inf_outside):
        inf_outside += 1
    kappa = (inf_outside + sup_inside) / 2.0
    # kappa sits strictly between two attainable squared norms, so no
    # integer point can have |p|^2 == kappa
    assert inf_outside - sup_inside >= 1
    return LatticeConfig(
        k_f=float(k_f),
        r2=r2,
        n_particles=len(ball),
        kappa=kappa,
        ball=ball,
        _ball_set=frozenset(ball),
    )


def lambda_of(k: Sequence[int], p: Sequence[int]) -> float:
    """Excitation gap (|p|^2 - |p-k|^2)/2, exact as a dyadic rational."""
    d = norm2(p) - norm2(sub(as_vec3(p), as_vec3(k)))
    return d / 2.0


@dataclass(frozen=True)
class LuneBasis:
    """Ordered basis of the excitation lune for a momentum transfer k.

    ``points`` are the integer vectors p with |p - k| <= k_F < |p| in
    lexicographic order; ``lambdas`` is the parallel array of gaps.  The
    fixed order makes the lune the index space of all per-mode matrices.
    """

    k: Vec3
    points: tuple[Vec3, ...]
    lambdas: np.ndarray = field(repr=False)
    _index: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.points)

    def index_of(self, p: Vec3) -> int:
        """Position of p in the basis; KeyError if p is not in the lune."""
        return self._index[p]

    def __contains__(self, p) -> bool:
        return as_vec3(p) in self._index


def lune(k: Sequence[int], cfg: LatticeConfig) -> LuneBasis:
    """Enumerate the lune of k: the slab of the shifted ball poking out.

    Candidates are exactly the shifted ball points k + B_F, filtered by
    |p| > k_F.  Nonempty for every k != 0.
    """
    kv = as_vec3(k)
    if kv == (0, 0, 0):
        raise ValueError("lune is undefined for k = 0")
    pts = []
    for q in cfg.ball:
        p = add(kv, q)
        if norm2(p) > cfg.r2:
            pts.append(p)
    pts.sort()
    lambdas = np.array([lambda_of(kv, p) for p in pts], dtype=float)
    return LuneBasis(
        k=kv,
        points=tuple(pts),
        lambdas=lambdas,
        _index={p: i for i, p in enumerate(pts)},
    )


def d_intersection(k: Sequence[int], xi: Sequence[int], cfg: LatticeConfig,
                   collapse_coincident: bool = False) -> list[Vec3]:
    """Members of {xi, -xi, k+xi, k-xi} that lie in the lune of k.

    Multiplicity is preserved: for xi = 0 the four candidates collapse
    pairwise and a lune hit is returned twice.  Pass
    ``collapse_coincident=True`` to deduplicate instead.
    """
    kv, xv = as_vec3(k), as_vec3(xi)
    if kv == (0, 0, 0):
        raise ValueError("k = 0 has no lune")
    candidates = [xv, neg(xv), add(kv, xv), sub(kv, xv)]
    if collapse_coincident:
        seen = []
        for c in candidates:
            if c not in seen:
                seen.append(c)
        candidates = seen
    return [z for z in candidates if cfg.in_lune(kv, z)]


def kappa_and_weight(p: Sequence[int], cfg: LatticeConfig) -> tuple[float, float]:
    """Distance of |p|^2 from the spectral midpoint and its inverse.

    Returns (m(p)^-1, m(p)) with m(p)^-1 = ||p|^2 - kappa| >= 1/2.
    """
    m_inv = abs(norm2(p) - cfg.kappa)
    assert m_inv >= 0.5
    return m_inv, 1.0 / m_inv


@dataclass(frozen=True)
class TailPolicy:
    """Truncation policy for lattice sums without finite support.

    ``k_max`` is the starting cutoff radius (None picks ceil(2 k_F) + 2);
    the cutoff is doubled until the relative change of the sum drops
    below ``tail_tol`` or ``max_doublings`` is exhausted.  The reported
    tail estimate is the last observed increment.
    """

    k_max: int | None = None
    tail_tol: float = 1e-6
    max_doublings: int = 5

    def initial_k_max(self, cfg: LatticeConfig) -> int:
        if self.k_max is not None:
            return max(1, int(self.k_max))
        return int(math.ceil(2.0 * cfg.k_f)) + 2


@dataclass(frozen=True)
class KSupport:
    """Split of the k-sum for one observable point xi.

    For xi outside the Fermi ball only the candidates +-xi can sit in a
    lune, which confines k to the two shifted balls +-xi + B_F: the
    support is exactly finite and ``finite_part`` lists it.  For xi
    inside the ball the hits are k +- xi and the support is infinite;
    ``finite_part`` is empty and shells must be enumerated up to a
    cutoff.
    """

    xi: Vec3
    exact: bool
    finite_part: tuple[Vec3, ...]
    policy: TailPolicy

    @property
    def truncated(self) -> bool:
        return not self.exact


def k_support(xi: Sequence[int], cfg: LatticeConfig,
              policy: TailPolicy | None = None) -> KSupport:
    """Classify the k-support of the point xi (exact outside, cut inside)."""
    policy = policy or TailPolicy()
    xv = as_vec3(xi)
    if norm2(xv) > cfg.r2:
        ks = set()
        for q in cfg.ball:
            for base in (xv, neg(xv)):
                k = add(base, q)
                if k != (0, 0, 0):
                    ks.add(k)
        # keep only k whose lune actually meets {xi, -xi}
        ks = [k for k in sorted(ks)
              if cfg.in_lune(k, xv) or cfg.in_lune(k, neg(xv))]
        return KSupport(xi=xv, exact=True, finite_part=tuple(ks), policy=policy)
    return KSupport(xi=xv, exact=False, finite_part=(), policy=policy)


def truncated_k_vectors(xi: Vec3, cfg: LatticeConfig, k_max: int,
                        k_min_excl: int = 0) -> list[Vec3]:
    """k with k_min_excl < |k| <= k_max whose lune meets {k+xi, k-xi}.

    Used to enumerate truncated supports shell by shell; results are
    lexicographically sorted.
    """
    ks = ball_array(k_max * k_max, max(0, k_min_excl * k_min_excl))
    if norm2(xi) > cfg.r2:
        return []
    xv = np.asarray(xi, dtype=np.int64)
    keep = np.zeros(ks.shape[0], dtype=bool)
    for sign in (1, -1):
        zeta = ks + sign * xv
        keep |= np.einsum("ij,ij->i", zeta, zeta) > cfg.r2
    return list(map(tuple, ks[keep].tolist()))


def nonzero_k_vectors(k_max: int, k_min_excl: int = 0) -> list[Vec3]:
    """All k != 0 with k_min_excl < |k| <= k_max, lexicographically sorted."""
    ks = ball_array(k_max * k_max, max(0, k_min_excl * k_min_excl))
    return list(map(tuple, ks.tolist()))


_OCTAHEDRAL_PERMS = (
    (0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0),
)


def signed_perm_group() -> np.ndarray:
    """The 48 signed permutation matrices, the point group of Z^3."""
    mats = []
    for perm in _OCTAHEDRAL_PERMS:
        for sx in (1, -1):
            for sy in (1, -1):
                for sz in (1, -1):
                    m = np.zeros((3, 3), dtype=np.int64)
                    for row, (col, sign) in enumerate(zip(perm, (sx, sy, sz))):
                        m[row, col] = sign
                    mats.append(m)
    return np.array(mats)


def stabilizer_group(xi: Vec3, symmetry: str) -> np.ndarray:
    """Point-group elements usable for orbit reduction of k-sums at xi.

    ``symmetry`` names the invariance class of the per-mode summand:
    "radial" allows the full stabilizer {R : R xi = +-xi} of the point
    group, "even" only the pair {1, -1} (an even potential guarantees
    the k -> -k pairing and nothing more), "none" just the identity.
    """
    eye = np.eye(3, dtype=np.int64)
    if symmetry == "none":
        return eye[None, :, :]
    if symmetry == "even":
        return np.array([eye, -eye])
    if symmetry != "radial":
        raise ValueError(f"unknown symmetry class {symmetry!r}")
    group = signed_perm_group()
    xv = np.array(xi, dtype=np.int64)
    images = group @ xv
    keep = np.all(images == xv, axis=1) | np.all(images == -xv, axis=1)
    return group[keep]


def orbit_reduce(ks: list[Vec3], xi: Vec3,
                 symmetry: str) -> list[tuple[Vec3, int]]:
    """Collapse a k-list to stabilizer-orbit representatives with weights.

    Summing weight * f(rep) equals summing f(k) over the full list for
    any f invariant under the stabilizer of xi (all per-mode observables
    at the point xi are, when the potential has the matching symmetry
    class).  The input list must itself be stabilizer-invariant as a
    set.
    """
    if not ks:
        return []
    group = stabilizer_group(xi, symmetry)
    if group.shape[0] == 1:
        return [(k, 1) for k in ks]
    arr_all = np.array(ks, dtype=np.int64)
    bound = int(np.max(np.abs(arr_all))) + 1
    base = 2 * bound + 1

    def encode(pts):
        return ((pts[..., 0] + bound) * base + (pts[..., 1] + bound)) * base \
            + (pts[..., 2] + bound)

    out = []
    # canonicality and weight are per-element, so chunking is exact
    for start in range(0, arr_all.shape[0], 65536):
        arr = arr_all[start:start + 65536]
        images = np.einsum("gij,mj->gmi", group, arr)
        keys = encode(images)              # (g, m)
        own = encode(arr)                  # (m,)
        keep = own == keys.min(axis=0)
        sorted_keys = np.sort(keys[:, keep], axis=0)
        distinct = 1 + np.count_nonzero(np.diff(sorted_keys, axis=0) != 0,
                                        axis=0)
        out.extend((tuple(int(c) for c in k), int(w))
                   for k, w in zip(arr[keep].tolist(), distinct.tolist()))
    return out


def lambda_power_sum(basis: LuneBasis, beta: float) -> float:
    """Sum of gap powers over the lune, the basic lattice-sum diagnostic."""
    return float(np.sum(basis.lambdas ** beta))
