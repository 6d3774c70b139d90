"""Interaction potentials in Fourier space.

Supported families are the bare Coulomb kernel g/|k|^2, its Yukawa
screening g/(|k|^2 + mu^2), explicit tables, and the zero interaction.
All of them vanish at k = 0 and are expected to be even and nonnegative;
``validate`` checks those hypotheses exhaustively up to a cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .lattice import Vec3, as_vec3, ball_points, neg, norm2


@dataclass(frozen=True)
class Potential:
    kind: str  # "coulomb" | "yukawa" | "table" | "zero"
    g: float = 0.0
    mu: float = 0.0
    table: Mapping[Vec3, float] | None = field(default=None, repr=False)

    @property
    def is_radial(self) -> bool:
        """True when V only depends on |k| (enables orbit-reduced sums)."""
        return self.kind in ("coulomb", "yukawa", "zero")

    @property
    def is_even(self) -> bool:
        """True when V(-k) = V(k) holds exactly (checked for tables)."""
        if self.is_radial:
            return True
        return all(self.table.get(neg(k), 0.0) == v
                   for k, v in self.table.items())

    @property
    def symmetry(self) -> str:
        """Symmetry class for lattice-sum reduction: radial, even, or none."""
        if self.is_radial:
            return "radial"
        return "even" if self.is_even else "none"

    def __call__(self, k: Sequence[int]) -> float:
        return evaluate(self, k)

    def from_norm2(self, n2) -> np.ndarray:
        """Vectorized evaluation from integer squared norms (radial kinds only)."""
        n2 = np.asarray(n2, dtype=float)
        if self.kind == "coulomb":
            return np.where(n2 > 0, self.g / np.where(n2 > 0, n2, 1.0), 0.0)
        if self.kind == "yukawa":
            return np.where(n2 > 0, self.g / (n2 + self.mu**2), 0.0)
        if self.kind == "zero":
            return np.zeros_like(n2)
        raise ValueError(f"potential kind {self.kind!r} is not radial")

    def l2_norm_estimate(self, cutoff_radius: int = 10) -> float:
        """Partial l2 norm over |k| <= cutoff (square-summability estimate)."""
        return validate(self, cutoff_radius).partial_l2

    def spec_string(self) -> str:
        if self.kind == "coulomb":
            return f"coulomb:g={self.g:g}"
        if self.kind == "yukawa":
            return f"yukawa:g={self.g:g},mu={self.mu:g}"
        if self.kind == "zero":
            return "zero"
        return "table"


def evaluate(pot: Potential, k: Sequence[int]) -> float:
    """Fourier mode of the interaction at integer k; exactly 0 at k = 0."""
    kv = as_vec3(k)
    n2 = norm2(kv)
    if n2 == 0:
        return 0.0
    if pot.kind == "coulomb":
        return pot.g / n2
    if pot.kind == "yukawa":
        return pot.g / (n2 + pot.mu**2)
    if pot.kind == "zero":
        return 0.0
    if pot.kind == "table":
        return float(pot.table.get(kv, 0.0))
    raise ValueError(f"unknown potential kind {pot.kind!r}")


def evaluate_many(pot: Potential, ks: np.ndarray) -> np.ndarray:
    """Evaluate on an (n, 3) integer array; vectorized for radial kinds."""
    ks = np.asarray(ks)
    n2 = np.einsum("ij,ij->i", ks.astype(float), ks.astype(float))
    if pot.is_radial:
        return pot.from_norm2(n2)
    return np.array([evaluate(pot, tuple(int(c) for c in k)) for k in ks])


def coulomb(g: float) -> Potential:
    if g < 0:
        raise ValueError("coupling g must be nonnegative")
    return Potential(kind="coulomb", g=float(g))


def yukawa(g: float, mu: float) -> Potential:
    if g < 0:
        raise ValueError("coupling g must be nonnegative")
    return Potential(kind="yukawa", g=float(g), mu=float(mu))


def zero() -> Potential:
    return Potential(kind="zero")


def from_table(values: Mapping[Sequence[int], float]) -> Potential:
    table = {as_vec3(k): float(v) for k, v in values.items()}
    return Potential(kind="table", table=table)


def load_table(path) -> Potential:
    """Read a table potential from a text file of lines "kx ky kz value".

    Whitespace separated; blank lines and '#' comments are skipped.
    Unlisted modes evaluate to 0.
    """
    table: dict[Vec3, float] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 'kx ky kz value', got {raw!r}")
            kx, ky, kz = (int(p) for p in parts[:3])
            table[(kx, ky, kz)] = float(parts[3])
    return Potential(kind="table", table=table)


@dataclass(frozen=True)
class ValidationReport:
    symmetric: bool
    nonnegative: bool
    zero_at_origin: bool
    partial_l2: float
    offenders: tuple[Vec3, ...]

    @property
    def ok(self) -> bool:
        return self.symmetric and self.nonnegative and self.zero_at_origin


def validate(pot: Potential, cutoff_radius: int = 10) -> ValidationReport:
    """Exhaustively check evenness, nonnegativity, and V(0)=0 for |k| <= cutoff.

    Table entries outside the cutoff are checked too.  The partial l2
    norm (sum of squares inside the cutoff, square-rooted) is reported
    as the square-summability estimate.
    """
    if cutoff_radius < 1:
        raise ValueError("cutoff_radius must be >= 1")
    ks = set(ball_points(cutoff_radius * cutoff_radius))
    if pot.kind == "table" and pot.table:
        ks.update(pot.table.keys())
        ks.update(neg(k) for k in pot.table.keys())
    offenders = []
    sq = 0.0
    symmetric = True
    nonnegative = True
    zero_at_origin = True
    if pot.kind == "table" and pot.table and pot.table.get((0, 0, 0), 0.0) != 0.0:
        zero_at_origin = False
        offenders.append((0, 0, 0))
    for k in sorted(ks):
        v = evaluate(pot, k)
        if v < 0:
            nonnegative = False
            offenders.append(k)
        if evaluate(pot, neg(k)) != v:
            symmetric = False
            offenders.append(neg(k))
        sq += v * v
    seen = set()
    uniq = [o for o in offenders if not (o in seen or seen.add(o))]
    return ValidationReport(
        symmetric=symmetric,
        nonnegative=nonnegative,
        zero_at_origin=zero_at_origin,
        partial_l2=float(np.sqrt(sq)),
        offenders=tuple(uniq),
    )
