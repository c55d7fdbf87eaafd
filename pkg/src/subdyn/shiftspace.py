"""Full Z^k shift on a finite alphabet, finite-window shadowing, Ledrappier's subshift.

Configurations are stored on the box |i|_inf <= W as integer arrays indexed
by i + W.  The metric weights a disagreement at i by 2^{-|i|} with the
Euclidean norm; anything outside a window is unknown and is accounted for by
an explicit tail term, so every inequality below is a finite computation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import Inconsistent, InvalidInput, MissingLatticePoint, WindowExhausted, WindowMismatch


@dataclass(frozen=True, eq=False)
class Configuration:
    k: int
    W: int
    alphabet: int
    cells: np.ndarray  # shape (2W+1,)*k

    def __post_init__(self):
        c = np.asarray(self.cells, dtype=np.int8)
        if c.shape != (2 * self.W + 1,) * self.k:
            raise InvalidInput(f"cells must have shape {(2 * self.W + 1,) * self.k}")
        if c.size and (c.min() < 0 or c.max() >= self.alphabet):
            raise InvalidInput("symbol outside the alphabet")
        object.__setattr__(self, "cells", c)

    def __getitem__(self, i):
        return int(self.cells[tuple(int(a) + self.W for a in i)])

    def restrict(self, W: int) -> "Configuration":
        if W > self.W:
            raise WindowExhausted(f"cannot restrict radius {self.W} to {W}")
        s = self.W - W
        sl = tuple(slice(s, s + 2 * W + 1) for _ in range(self.k))
        return Configuration(self.k, W, self.alphabet, self.cells[sl])

    def __eq__(self, other):
        return (
            isinstance(other, Configuration)
            and (self.k, self.W, self.alphabet) == (other.k, other.W, other.alphabet)
            and np.array_equal(self.cells, other.cells)
        )

    def to_json(self) -> dict:
        cells = {}
        for idx in np.ndindex(self.cells.shape):
            cells[",".join(str(a - self.W) for a in idx)] = int(self.cells[idx])
        return {"k": self.k, "W": self.W, "alphabet": self.alphabet, "cells": cells}

    @classmethod
    def from_json(cls, d) -> "Configuration":
        k, W = int(d["k"]), int(d["W"])
        arr = np.zeros((2 * W + 1,) * k, dtype=np.int8)
        seen = 0
        for key, s in d["cells"].items():
            i = tuple(int(a) + W for a in key.split(","))
            if len(i) != k or any(not 0 <= a <= 2 * W for a in i):
                raise InvalidInput(f"cell {key} outside the window")
            arr[i] = s
            seen += 1
        if seen != arr.size:
            raise InvalidInput("configuration must populate its whole window")
        return cls(k, W, int(d["alphabet"]), arr)


@lru_cache(maxsize=64)
def weights(W: int, k: int) -> np.ndarray:
    """2^{-|i|_2} on the box |i|_inf <= W."""
    ax = np.arange(-W, W + 1, dtype=float)
    grids = np.meshgrid(*([ax] * k), indexing="ij")
    r = np.sqrt(sum(g * g for g in grids))
    return np.exp2(-r)


def box_tail(W: int, k: int) -> float:
    """sum_{s>W} ((2s+1)^k - (2s-1)^k) 2^{-s}, a bound for sum over |i|_inf > W."""
    total, s = 0.0, W + 1
    while True:
        term = ((2 * s + 1) ** k - (2 * s - 1) ** k) * 2.0 ** (-s)
        total += term
        if term < 1e-18 * max(total, 1e-300) and s > W + 10:
            return total
        s += 1


def _ring_pad(k: int) -> int:
    return {1: 60, 2: 40, 3: 16}.get(k, 0)


@lru_cache(maxsize=256)
def tail_outside(W: int, k: int) -> float:
    """Upper bound for sum_{|i|_inf > W} 2^{-|i|_2} (exact ring sum plus box tail)."""
    pad = _ring_pad(k)
    if pad == 0:
        return box_tail(W, k)
    R = W + pad
    w = weights(R, k)
    inner = float(np.sum(weights(W, k)))
    return float(np.sum(w)) - inner + box_tail(R, k)


@lru_cache(maxsize=256)
def tail_bound(r: float, k: int) -> float:
    """Upper bound for sum over |i|_2 >= r of 2^{-|i|_2}."""
    R = max(int(math.ceil(r)), 0) + max(_ring_pad(k), 1)
    ax = np.arange(-R, R + 1, dtype=float)
    grids = np.meshgrid(*([ax] * k), indexing="ij")
    norm = np.sqrt(sum(g * g for g in grids))
    return float(np.sum(np.exp2(-norm[norm >= r]))) + tail_outside(R, k)


def agreement_radius(delta: float) -> float:
    """r(delta) = log2(1/delta): below it a disagreement alone costs more than delta."""
    if not 0 < delta < 1:
        raise InvalidInput("delta must lie in (0, 1)")
    return math.log2(1.0 / delta)


def epsilon_for(delta: float, k: int) -> float:
    return tail_bound(agreement_radius(delta), k)


def metric_d(x: Configuration, y: Configuration):
    """(truncated sum over the window, tail bound for the unseen cells)."""
    if (x.k, x.W) != (y.k, y.W):
        raise WindowMismatch(f"windows differ: (k={x.k}, W={x.W}) vs (k={y.k}, W={y.W})")
    val = float(np.sum(weights(x.W, x.k)[x.cells != y.cells]))
    return val, tail_outside(x.W, x.k)


def shift_apply(n, x: Configuration) -> Configuration:
    """(alpha^n x)(i) = x(n + i), on the radius W - |n|_inf that remains known."""
    n = [int(a) for a in n]
    r = max((abs(a) for a in n), default=0)
    if len(n) != x.k:
        raise InvalidInput("shift vector has the wrong length")
    if r > x.W:
        raise WindowExhausted(f"|n|_inf = {r} exceeds the window radius {x.W}")
    W2 = x.W - r
    sl = tuple(slice(x.W + a - W2, x.W + a + W2 + 1) for a in n)
    return Configuration(x.k, W2, x.alphabet, x.cells[sl])


# --- pseudo-orbits ------------------------------------------------------------


@dataclass
class SymbolicPseudoOrbit:
    """Configurations x_n of radius W for every n in the box |n|_inf <= R."""

    k: int
    R: int
    W: int
    alphabet: int
    configs: np.ndarray  # shape (2R+1,)*k + (2W+1,)*k

    def config(self, n) -> Configuration:
        idx = tuple(int(a) + self.R for a in n)
        if any(not 0 <= a <= 2 * self.R for a in idx):
            raise MissingLatticePoint(f"lattice point {tuple(n)} outside the outer window")
        return Configuration(self.k, self.W, self.alphabet, self.configs[idx])

    def defect(self):
        """(max truncated defect over axis edges, tail bound on the shared window)."""
        k, W = self.k, self.W
        w = weights(W - 1, k)
        worst = 0.0
        C = self.configs
        for a in range(k):
            nxt = tuple(slice(1, None) if b == a else slice(None) for b in range(k))
            cur = tuple(slice(None, -1) if b == a else slice(None) for b in range(k))
            # x_{n+e_a}(i) against x_n(i + e_a) for |i|_inf <= W - 1
            lhs_i = tuple(slice(1, 2 * W) for _ in range(k))
            rhs_i = tuple(slice(2, 2 * W + 1) if b == a else slice(1, 2 * W) for b in range(k))
            lhs = C[nxt + lhs_i]
            rhs = C[cur + rhs_i]
            if lhs.size:
                worst = max(worst, float(_weighted_sums(lhs != rhs, w).max()))
        return worst, tail_outside(W - 1, k)


def _weighted_sums(diff: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted mismatch count per leading index, rounded upward.

    Single precision is several times faster here; a sum of n nonnegative
    float32 terms is off by at most n * 2^-24 relative, so scaling by that
    factor keeps every value an upper bound.
    """
    n = w.size
    vals = diff.reshape(-1, n).astype(np.float32) @ w.ravel().astype(np.float32)
    return vals.astype(float) * (1.0 + (n + 2) * 2.0**-23)


def shadow_shift(orbit: SymbolicPseudoOrbit) -> Configuration:
    """x*(i) = x_i(0) on the outer window."""
    origin = (orbit.W,) * orbit.k
    idx = (slice(None),) * orbit.k + origin
    return Configuration(orbit.k, orbit.R, orbit.alphabet, orbit.configs[idx])


@dataclass
class ShiftShadowCheck:
    delta_bound: float  # measured defect including tail
    epsilon: float  # tail bound at the agreement radius of delta
    worst: float  # max over checked n of truncated d(x_n, alpha^n x*) plus tail
    checked: int
    radius: int

    @property
    def passed(self) -> bool:
        return self.worst <= self.epsilon

    def to_json(self):
        return dict(self.__dict__, passed=self.passed)


def check_shadow(orbit: SymbolicPseudoOrbit, x_star: Configuration, inner: int, delta: float) -> ShiftShadowCheck:
    """Cell-by-cell comparison of x_n with alpha^n x* for |n|_inf <= inner."""
    k, W, R = orbit.k, orbit.W, orbit.R
    if inner + W > R:
        raise WindowExhausted("outer window too small for the requested check radius")
    d_meas, d_tail = orbit.defect()
    eps = epsilon_for(delta, k)
    view = sliding_window_view(x_star.cells, (2 * W + 1,) * k)
    # window of view at index n + R - W is alpha^n x* restricted to radius W
    lo = R - W - inner
    shifted = view[tuple(slice(lo, lo + 2 * inner + 1) for _ in range(k))]
    mine = orbit.configs[tuple(slice(R - inner, R + inner + 1) for _ in range(k))]
    vals = _weighted_sums(shifted != mine, weights(W, k))
    worst = float(vals.max()) + tail_outside(W, k)
    return ShiftShadowCheck(d_meas + d_tail, eps, worst, int(vals.size), inner)


def random_pseudo_orbit(k: int, R: int, W: int, alphabet: int, flips: int, min_norm: float,
                        seed: int = 0, ground=None) -> SymbolicPseudoOrbit:
    """x_n = (alpha^n G) on radius W with a few symbols changed at |i|_2 >= min_norm."""
    rng = np.random.default_rng(seed)
    size = 2 * (R + W) + 1
    if ground is None:
        ground = rng.integers(0, alphabet, size=(size,) * k, dtype=np.int8)
    configs = np.ascontiguousarray(sliding_window_view(ground, (2 * W + 1,) * k))
    far = np.argwhere(np.sqrt(((np.indices((2 * W + 1,) * k) - W) ** 2).sum(axis=0)) >= min_norm)
    if flips and len(far):
        flat = configs.reshape((-1,) + configs.shape[k:])
        count = flat.shape[0]
        if flips > len(far):
            raise InvalidInput("more flips requested than far cells available")
        # distinct far cells per window: a random start plus positive gaps
        # whose total stays below the number of candidates
        gaps = rng.integers(1, len(far) // flips + 1, size=(count, flips))
        gaps[:, 0] = rng.integers(0, len(far), size=count)
        picks = np.cumsum(gaps, axis=1) % len(far)
        cells = far[picks]  # count x flips x k
        rows = np.repeat(np.arange(count), flips)
        idx = (rows,) + tuple(cells.reshape(-1, k).T)
        flat[idx] = (flat[idx] + rng.integers(1, alphabet, size=rows.size)) % alphabet
    return SymbolicPseudoOrbit(k, R, W, alphabet, configs)


# --- Ledrappier three-dot system ----------------------------------------------


def _check_ledrappier(x: Configuration):
    if x.k != 2 or x.alphabet != 2:
        raise InvalidInput("the three-dot system lives on k = 2 with alphabet Z/2")


def ledrappier_validate(x: Configuration) -> bool:
    """x(i,j) + x(i+1,j) + x(i,j+1) = 0 mod 2 wherever all three cells are known."""
    _check_ledrappier(x)
    return bool(np.all(_three_dot_ok(x.cells)))


def _three_dot_ok(c: np.ndarray) -> np.ndarray:
    """Relation check over the last two axes; leading axes are batched."""
    s = c[..., :-1, :-1] ^ c[..., 1:, :-1] ^ c[..., :-1, 1:]
    return ~np.any(s.astype(bool), axis=(-2, -1))


def ledrappier_validate_orbit(orbit: SymbolicPseudoOrbit) -> bool:
    if orbit.k != 2 or orbit.alphabet != 2:
        raise InvalidInput("the three-dot system lives on k = 2 with alphabet Z/2")
    return bool(np.all(_three_dot_ok(orbit.configs)))


def ledrappier_complete(W: int, bottom, right) -> Configuration:
    """Fill the box from its bottom row j = -W and right column i = W.

    Row j + 1 follows from row j through x(i, j+1) = x(i, j) + x(i+1, j),
    except the last cell, which the right column supplies.
    """
    bottom = np.asarray(bottom, dtype=np.int8) % 2
    right = np.asarray(right, dtype=np.int8) % 2
    n = 2 * W + 1
    if bottom.shape != (n,) or right.shape != (n,):
        raise InvalidInput(f"boundary rows must have length {n}")
    if bottom[-1] != right[0]:
        raise Inconsistent("bottom row and right column disagree at the corner")
    c = np.zeros((n, n), dtype=np.int8)  # c[i + W, j + W]
    c[:, 0] = bottom
    c[n - 1, :] = right
    for j in range(n - 1):
        c[:-1, j + 1] = (c[:-1, j] + c[1:, j]) % 2
    x = Configuration(2, W, 2, c)
    if not ledrappier_validate(x):
        raise Inconsistent("completion violates the three-dot relation")
    return x


def ledrappier_random(W: int, seed: int = 0) -> Configuration:
    rng = np.random.default_rng(seed)
    n = 2 * W + 1
    bottom = rng.integers(0, 2, size=n)
    right = rng.integers(0, 2, size=n)
    right[0] = bottom[-1]
    return ledrappier_complete(W, bottom, right)


@lru_cache(maxsize=16)
def _corner_patterns(W: int, corner: int) -> np.ndarray:
    """All valid configurations whose boundary data sit in the top corner cells of the right column."""
    n = 2 * W + 1
    out = []
    for bits in product((0, 1), repeat=corner):
        right = np.zeros(n, dtype=np.int8)
        right[n - corner:] = bits
        out.append(ledrappier_complete(W, np.zeros(n, dtype=np.int8), right).cells)
    arr = np.array(out)
    arr.flags.writeable = False
    return arr


def ledrappier_pseudo_orbit(R: int, W: int, seed: int = 0, corner: int = 6) -> SymbolicPseudoOrbit:
    """Pseudo-orbit of valid configurations: a valid ground, each window XORed
    with a random valid pattern seeded in the top `corner` cells of the right column."""
    rng = np.random.default_rng(seed)
    G = ledrappier_random(R + W, seed=int(rng.integers(1 << 31))).cells
    configs = np.ascontiguousarray(sliding_window_view(G, (2 * W + 1, 2 * W + 1)))
    patterns = _corner_patterns(W, corner)
    pick = rng.integers(0, len(patterns), size=configs.shape[:2])
    configs ^= patterns[pick]
    return SymbolicPseudoOrbit(2, R, W, 2, configs)
