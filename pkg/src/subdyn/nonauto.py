"""Lattice step sequences inside a tube around an irrational line.

An irrational line contains no lattice point besides 0, so the action is
followed along a walk n^(0) = 0, n^(1), ... that stays in the tube of radius
t0 and moves by steps whose sup-norm lies in [N, 2N].  The induced maps
g_p = alpha^{n^(p+1) - n^(p)} form a nonautonomous system; once its rates
are separated from zero the hyperbolic solver applies verbatim.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np

from . import _exact as ex
from .errors import CannotAdvance, InvalidInput, RangeExceeded, RatesFailed
from .geometry import Direction
from .shadowing import quasi_shadow, shadow_hyperbolic
from .spectrum import ActionSpec, LyapunovSpectrum, gap_constants, splitting_for
from .toral import action_matrix, apply_matrix, wrap

DEFAULT_NS = tuple(2**i for i in range(9))


@dataclass(frozen=True)
class StepSequence:
    direction: Direction
    points: tuple  # n^(0) = 0, n^(1), ..., n^(P)
    t0: float
    N: int

    @property
    def P(self) -> int:
        return len(self.points) - 1

    @property
    def deltas(self) -> list:
        return [tuple(b - a for a, b in zip(p, q)) for p, q in zip(self.points, self.points[1:])]

    @classmethod
    def from_steps(cls, direction: Direction, steps, t0: float, N: int) -> "StepSequence":
        pts = [tuple(0 for _ in range(direction.k))]
        for d in steps:
            pts.append(tuple(a + int(b) for a, b in zip(pts[-1], d)))
        return cls(direction, tuple(pts), float(t0), int(N))

    def check(self) -> dict:
        """Mechanical check of tube containment, sign condition and step bounds."""
        u = direction_unit(self.direction)
        v = np.array(self.direction.generator)
        tube = all(_perp(np.array(n, dtype=float), u) <= self.t0 * (1 + 1e-12) for n in self.points)
        sign = all(all(np.sign(d[i]) == np.sign(v[i]) for i in range(len(d))) for d in self.deltas)
        bounds = all(self.N <= max(abs(c) for c in d) <= 2 * self.N for d in self.deltas)
        return {"tube": tube, "sign": sign, "step_bounds": bounds, "origin": not any(self.points[0])}

    def to_json(self):
        return {
            "direction": self.direction.to_json(),
            "t0": self.t0,
            "N": self.N,
            "points": [list(p) for p in self.points],
        }

    @classmethod
    def from_json(cls, d):
        return cls(Direction.from_json(d["direction"]), tuple(tuple(p) for p in d["points"]), d["t0"], d["N"])


def direction_unit(direction: Direction) -> np.ndarray:
    return direction.unit


def _perp(n: np.ndarray, u: np.ndarray) -> float:
    return float(np.linalg.norm(n - np.dot(n, u) * u))


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def build_step_sequence(direction: Direction, t0: float, N: int, P: int) -> StepSequence:
    """Greedy walk along an irrational line.

    At each step the target is the projection of the current point moved by
    N * v / |v|_inf along the line; candidates are the lattice points within
    one unit (two, if none qualifies) of the rounded target, and the
    admissible candidate closest to the line wins, ties broken
    lexicographically.
    """
    if direction.rational:
        raise InvalidInput("step sequences are built for irrational directions")
    k = direction.k
    if not math.sqrt(k) <= t0 < 2 * math.sqrt(k):
        raise InvalidInput(f"t0 must lie in [sqrt(k), 2 sqrt(k)) = [{math.sqrt(k)}, {2 * math.sqrt(k)})")
    if N < 1 or P < 0:
        raise InvalidInput("need N >= 1 and P >= 0")
    v = np.array(direction.generator)
    u = direction.unit
    stride = N * v / np.max(np.abs(v))
    sgn = np.sign(v).astype(int)
    cur = np.zeros(k, dtype=np.int64)
    pts = [tuple(int(c) for c in cur)]
    for p in range(P):
        target = np.dot(cur, u) * u + stride
        base = _round_half_away(target)
        best = None
        for reach in (1, 2):
            for off in product(range(-reach, reach + 1), repeat=k):
                cand = base + np.array(off)
                d = cand - cur
                if np.any(np.sign(d) != sgn):
                    continue
                if not N <= np.max(np.abs(d)) <= 2 * N:
                    continue
                dist = _perp(cand.astype(float), u)
                if dist > t0:
                    continue
                key = (dist, tuple(int(c) for c in cand))
                if best is None or key < best:
                    best = key
            if best is not None:
                break
        if best is None:
            blocking = int(np.argmax(np.abs((target - cur) - stride)))
            raise CannotAdvance(p, blocking)
        cur = np.array(best[1], dtype=np.int64)
        pts.append(best[1])
    return StepSequence(direction, tuple(pts), float(t0), int(N))


def compose(spec: ActionSpec, seq: StepSequence, p: int, m: int) -> tuple:
    """g_{p+m-1} ... g_p as an exact integer matrix."""
    if p < 0 or m < 0 or p + m > seq.P:
        raise RangeExceeded(f"steps {p}..{p + m} outside 0..{seq.P}")
    out = ex.identity(spec.m)
    for d in seq.deltas[p:p + m]:
        out = ex.matmul(action_matrix(spec, d), out)
    return out


@dataclass
class RateReport:
    lam1: float
    lam2: float
    lam3: Optional[float]
    a: float
    J1: list
    J2: list
    J3: list

    @property
    def passed(self) -> bool:
        ok = self.lam1 < 0 < self.lam2
        if self.J3:
            ok = ok and self.lam3 <= min(-self.lam1, self.lam2)
        return ok

    @property
    def b(self) -> float:
        return min(-self.lam1, self.lam2)

    def to_json(self):
        return {
            "lambda1": self.lam1,
            "lambda2": self.lam2,
            "lambda3": self.lam3,
            "a": self.a,
            "rate": self.b,
            "passed": self.passed,
            "lambda1_negative": self.lam1 < 0,
            "lambda2_positive": self.lam2 > 0,
            "lambda3_dominated": None if not self.J3 else self.lam3 <= min(-self.lam1, self.lam2),
        }


def verify_rates(spectrum: LyapunovSpectrum, seq: StepSequence, a: Optional[float] = None) -> RateReport:
    """Extreme per-step exponents over the sequence, widened by the margin a."""
    v = np.array(seq.direction.generator)
    split = splitting_for(spectrum, v)
    if a is None:
        a = gap_constants(spectrum, v).a
    D = np.array(seq.deltas, dtype=float).reshape(-1, spectrum.k)
    C = D @ spectrum.exponents  # P x s
    widen = a * np.sum(np.abs(D), axis=1)
    lam1 = float(np.max(C[:, split.J1] + widen[:, None])) if split.J1 else -math.inf
    lam2 = float(np.min(C[:, split.J2] - widen[:, None])) if split.J2 else math.inf
    lam3 = float(np.max(np.abs(C[:, split.J3]) + widen[:, None])) if split.J3 else None
    return RateReport(lam1, lam2, lam3, float(a), split.J1, split.J2, split.J3)


@dataclass
class NSearch:
    N: Optional[int]
    sequence: Optional[StepSequence]
    report: Optional[RateReport]
    trace: list = field(default_factory=list)

    def to_json(self):
        return {"N": self.N, "trace": self.trace, "rates": None if self.report is None else self.report.to_json()}


def search_N(spectrum: LyapunovSpectrum, direction: Direction, t0: float, P: int,
             a: Optional[float] = None, Ns=DEFAULT_NS) -> NSearch:
    """Smallest N in Ns whose sequence passes all invariants and rate checks."""
    trace = []
    for N in Ns:
        try:
            seq = build_step_sequence(direction, t0, N, P)
        except CannotAdvance as exc:
            trace.append({"N": N, "built": False, "reason": str(exc)})
            continue
        checks = seq.check()
        rep = verify_rates(spectrum, seq, a)
        ok = all(checks.values()) and rep.passed
        trace.append({"N": N, "built": True, "checks": checks, "rates": rep.to_json()})
        if ok:
            return NSearch(N, seq, rep, trace)
    return NSearch(None, None, None, trace)


def sequence_pseudo_orbit(spec: ActionSpec, seq: StepSequence, x0, delta: float, seed: int = 0) -> np.ndarray:
    """x_{p+1} = g_p x_p + xi_p with xi_p uniform in [-delta, delta]^m."""
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-1.0, 1.0, size=(seq.P, spec.m)) * delta
    X = np.zeros((seq.P + 1, spec.m))
    X[0] = wrap(x0)
    for p, d in enumerate(seq.deltas):
        X[p + 1] = wrap(apply_matrix(action_matrix(spec, d), X[p]) + xi[p])
    return X


def tube_inflation(spec: ActionSpec, seq: StepSequence) -> float:
    """L2-type constant: 1 + max ||alpha^r|| over lattice r between 0 and a step.

    Every tube point between n^(p) and n^(p+1) is reached from n^(p) by some
    such r, so a delta-shadow along the sequence gives a (1 + ...)-scaled
    estimate on the whole tube.
    """
    worst = 0
    for d in set(seq.deltas):
        ranges = [range(min(0, c), max(0, c) + 1) for c in d]
        for r in product(*ranges):
            worst = max(worst, ex.inf_norm(action_matrix(spec, r)))
    return 1.0 + worst


def shadow_along_sequence(spec: ActionSpec, spectrum: LyapunovSpectrum, seq: StepSequence, X,
                          a: Optional[float] = None, anchor: int = 0):
    """Shadow (or quasi-shadow) a pseudo-orbit over the sequence points.

    Returns (result, rate report, tube inflation constant).
    """
    rep = verify_rates(spectrum, seq, a)
    if not rep.passed:
        raise RatesFailed(f"rate conditions fail: {rep.to_json()}")
    split = splitting_for(spectrum, np.array(seq.direction.generator))
    mats = [action_matrix(spec, d) for d in seq.deltas]
    if split.J3:
        res = quasi_shadow(mats, X, split, rate=rep.b)
    else:
        res = shadow_hyperbolic(mats, X, split, rate=rep.b, anchor=anchor)
    return res, rep, tube_inflation(spec, seq)
