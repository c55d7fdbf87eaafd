"""Exact integer matrix arithmetic and fixed-point torus coordinates.

Torus points are carried as integers X with x = X / 2^B mod 1; an integer
matrix then acts exactly by X -> M X mod 2^B, so long products never lose
precision.  Every finite double in [0, 1) is k / 2^1074 for an integer k,
hence B >= 1074 makes the float -> fixed conversion lossless.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

FLOAT_BITS = 1074


def as_tuple(a) -> tuple:
    if isinstance(a, tuple):
        return a
    return tuple(tuple(int(x) for x in row) for row in np.asarray(a, dtype=object))


def matmul(a: tuple, b: tuple) -> tuple:
    bt = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def matvec(a: tuple, v) -> list:
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def identity(m: int) -> tuple:
    return tuple(tuple(int(i == j) for j in range(m)) for i in range(m))


def inverse(a: tuple) -> tuple:
    """Inverse of a unimodular integer matrix (Gauss-Jordan over Q)."""
    m = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(m)] for i, row in enumerate(a)]
    for col in range(m):
        piv = next(r for r in range(col, m) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(m):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    inv = [row[m:] for row in aug]
    if any(x.denominator != 1 for row in inv for x in row):
        raise ValueError("matrix is not unimodular")
    return tuple(tuple(int(x) for x in row) for row in inv)


@lru_cache(maxsize=4096)
def matpow(a: tuple, n: int) -> tuple:
    if n < 0:
        return matpow(inverse(a), -n)
    result, base = identity(len(a)), a
    while n:
        if n & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        n >>= 1
    return result


@lru_cache(maxsize=1 << 16)
def action_matrix(gens: tuple, n: tuple) -> tuple:
    """prod_i A_i^{n_i} (order irrelevant: the generators commute)."""
    out = identity(len(gens[0]))
    for g, e in zip(gens, n):
        if e:
            out = matmul(out, matpow(g, int(e)))
    return out


@lru_cache(maxsize=1 << 16)
def inf_norm(a: tuple) -> int:
    return max(sum(abs(x) for x in row) for row in a)


def to_fixed(x, bits: int) -> list:
    """Exact fixed-point integers floor(x * 2^bits) (exact when bits >= 1074)."""
    out = []
    for c in x:
        num, den = float(c).as_integer_ratio()
        e = den.bit_length() - 1  # den is a power of two
        out.append(num << (bits - e) if bits >= e else num >> (e - bits))
    return out


def fixed_to_float(X, bits: int) -> np.ndarray:
    mod = 1 << bits
    drop = max(0, bits - 64)
    return np.array([math.ldexp((v % mod) >> drop, drop - bits) for v in X])


def fixed_dist(X, Y, bits: int) -> float:
    """Flat torus max-distance between two fixed-point points."""
    mod, half = 1 << bits, 1 << (bits - 1)
    worst = 0
    for a, b in zip(X, Y):
        d = (a - b + half) % mod - half
        worst = max(worst, abs(d))
    # keep 64 significant bits; relative rounding below 2^-52 after conversion
    drop = max(0, worst.bit_length() - 64)
    return math.ldexp(worst >> drop, drop - bits)


def mp_matrix_to_fixed(P, bits: int) -> tuple:
    scale = mpmath.mpf(2) ** bits
    return tuple(tuple(int(mpmath.nint(P[i, j] * scale)) for j in range(P.cols)) for i in range(P.rows))
