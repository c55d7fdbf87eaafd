"""Lattice geometry of R^k: directions, tubes around lines, lattice windows.

Rational directions carry an integer generator and every membership test for
them is done in exact integer/rational arithmetic.  Irrational directions are
declared by the caller; nothing here tries to decide irrationality of floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInput, ZeroVector


def _normalize_sign(n):
    for c in n:
        if c != 0:
            return tuple(n) if c > 0 else tuple(-x for x in n)
    return tuple(n)


@dataclass(frozen=True)
class Direction:
    """A line L_v in R^k, tagged rational (with integer data) or irrational."""

    generator: tuple
    rational: bool
    integer_generator: Optional[tuple] = None

    def __post_init__(self):
        g = tuple(float(c) for c in self.generator)
        object.__setattr__(self, "generator", g)
        if not any(g):
            raise ZeroVector("direction generator is zero")
        if self.rational:
            if self.integer_generator is None:
                raise InvalidInput("rational direction needs integer data")
            n = tuple(int(c) for c in self.integer_generator)
            if not any(n):
                raise ZeroVector("integer generator is zero")
            d = reduce(math.gcd, (abs(c) for c in n))
            n = _normalize_sign(tuple(c // d for c in n))
            # real generator must be parallel to the integer one
            gv, nv = np.array(g), np.array(n, dtype=float)
            cross = np.linalg.norm(np.outer(gv, nv) - np.outer(nv, gv))
            if cross > 1e-12 * np.linalg.norm(gv) * np.linalg.norm(nv):
                raise InvalidInput("integer generator is not parallel to the generator")
            object.__setattr__(self, "integer_generator", n)
        else:
            if self.integer_generator is not None:
                raise InvalidInput("irrational direction cannot carry integer data")
            if all(float(c).is_integer() for c in g):
                raise InvalidInput(f"direction {g} has integer entries; declare it rational")

    @classmethod
    def from_integers(cls, n: Sequence[int]) -> "Direction":
        n = tuple(int(c) for c in n)
        return cls(tuple(float(c) for c in n), True, n)

    @classmethod
    def irrational(cls, v: Sequence[float]) -> "Direction":
        return cls(tuple(float(c) for c in v), False)

    @property
    def k(self) -> int:
        return len(self.generator)

    @property
    def unit(self) -> np.ndarray:
        if self.rational:
            g = np.array(self.integer_generator, dtype=float)
        else:
            g = np.array(self.generator)
        return g / np.linalg.norm(g)

    def to_json(self) -> dict:
        out = {"generator": list(self.generator), "rational": self.rational}
        if self.rational:
            out["integer_generator"] = list(self.integer_generator)
        return out

    @classmethod
    def from_json(cls, d: dict) -> "Direction":
        if d.get("rational"):
            ig = d.get("integer_generator", d["generator"])
            return cls(tuple(d.get("generator", ig)), True, tuple(ig))
        return cls(tuple(d["generator"]), False)


def project(v, direction: Direction):
    """Return (pi_V(v), pi_{V-perp}(v))."""
    v = np.asarray(v, dtype=float)
    u = direction.unit
    par = np.dot(v, u) * u
    return par, v - par


def smallest_integer_generator(direction: Direction):
    if not direction.rational:
        return None
    return direction.integer_generator


@dataclass(frozen=True)
class Tube:
    direction: Direction
    t: float
    R: float
    center: tuple = ()

    def __post_init__(self):
        if self.t < 0 or self.R <= 0:
            raise InvalidInput("tube needs t >= 0 and R > 0")
        if not self.center:
            object.__setattr__(self, "center", (0,) * self.direction.k)

    def contains(self, n) -> bool:
        return _member(self.direction, self.t, self.R, np.asarray(n) - np.asarray(self.center))


def _member(direction, t, R, w):
    if direction.rational:
        g = direction.integer_generator
        w = [int(c) for c in w]
        gg = sum(c * c for c in g)
        wg = sum(a * b for a, b in zip(w, g))
        ww = sum(c * c for c in w)
        tt, RR = Fraction(t) ** 2, Fraction(R) ** 2
        # |pi_perp w|^2 = ww - wg^2/gg ; |pi_V w|^2 = wg^2/gg
        return ww * gg - wg * wg <= tt * gg and wg * wg <= RR * gg
    u = direction.unit
    w = np.asarray(w, dtype=float)
    s = float(np.dot(w, u))
    perp2 = float(np.dot(w, w)) - s * s
    return perp2 <= t * t * (1 + 1e-12) and abs(s) <= R * (1 + 1e-12)


@dataclass
class LatticeWindow:
    """Integer points of a tube, ordered by line parameter, with axis neighbours.

    ``plus[a, i]`` / ``minus[a, i]`` index the nearest window point from point
    ``a`` in the positive / negative i-th axis direction (``a`` itself if none).
    """

    points: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    direction: Optional[Direction] = None
    _index: dict = field(default=None, repr=False)

    def __len__(self):
        return len(self.points)

    @property
    def index(self) -> dict:
        if self._index is None:
            self._index = {tuple(int(c) for c in p): a for a, p in enumerate(self.points)}
        return self._index

    @property
    def k(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_points(cls, points, direction=None) -> "LatticeWindow":
        pts = np.asarray(points, dtype=np.int64).reshape(len(points), -1)
        n, k = pts.shape
        plus = np.tile(np.arange(n)[:, None], (1, k))
        minus = plus.copy()
        for i in range(k):
            others = [j for j in range(k) if j != i]
            groups: dict = {}
            for a in range(n):
                groups.setdefault(tuple(pts[a, others]), []).append(a)
            for members in groups.values():
                members.sort(key=lambda a: pts[a, i])
                for b, c in zip(members, members[1:]):
                    plus[b, i] = c
                    minus[c, i] = b
        return cls(pts, plus, minus, direction)

    def edges(self):
        """Distinct directed neighbour pairs (a, b) with b = a_{i+}, b != a."""
        out = []
        for i in range(self.k):
            for a in range(len(self.points)):
                b = self.plus[a, i]
                if b != a:
                    out.append((a, int(b)))
        return out


def tube_lattice_points(direction: Direction, t: float, R: float, center=None) -> LatticeWindow:
    """All n in Z^k with |pi_perp(n - c)| <= t and |pi_V(n - c)| <= R."""
    tube = Tube(direction, t, R, tuple(center) if center is not None else ())
    u = direction.unit
    c = np.asarray(tube.center, dtype=np.int64)
    # |n_i - c_i| <= R|u_i| + t
    bounds = [int(math.floor(R * abs(ui) + t + 1e-9)) for ui in u]
    axes = [range(-b, b + 1) for b in bounds]
    if len(u) <= 3 and np.prod([2 * b + 1 for b in bounds]) > 50_000:
        cand = _cylinder_candidates(u, t, R)
    else:
        cand = np.array(list(product(*axes)), dtype=np.int64).reshape(-1, len(u))
    if direction.rational:
        keep = [w for w in cand if _member(direction, t, R, w)]
    else:
        s = cand @ u
        perp2 = np.einsum("ij,ij->i", cand, cand) - s * s
        mask = (perp2 <= t * t * (1 + 1e-12)) & (np.abs(s) <= R * (1 + 1e-12))
        keep = list(cand[mask])
    pts = np.array(keep, dtype=np.int64).reshape(-1, len(u))
    if len(pts):
        s = pts @ u
        order = sorted(range(len(pts)), key=lambda a: (round(float(s[a]), 12), tuple(pts[a])))
        pts = pts[order] + c
    return LatticeWindow.from_points(pts, direction)


def _cylinder_candidates(u, t, R):
    # walk the line in unit steps and collect the integer box around each sample
    k = len(u)
    r = int(math.ceil(t)) + 1
    seen = set()
    steps = int(math.ceil(R)) + 1
    offsets = list(product(range(-r, r + 1), repeat=k))
    for s in range(-steps, steps + 1):
        base = np.rint(s * u).astype(np.int64)
        for o in offsets:
            seen.add(tuple(int(b + x) for b, x in zip(base, o)))
    return np.array(sorted(seen), dtype=np.int64)
