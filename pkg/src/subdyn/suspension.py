"""The suspension R^k-action on S = R^k x T^m / Z^k and chains along a line.

Z^k acts on R^k x T^m by n.(u, x) = (u - n, alpha^n x); R^k translates the
first factor and descends to the quotient.  Points are stored with u in the
fundamental domain [0,1)^k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np

from . import _exact as ex
from .errors import InvalidInput, JumpOffLine, RatesFailed
from .geometry import Direction
from .shadowing import hyperbolic_rate, lipschitz_bound, quasi_shadow, shadow_hyperbolic
from .spectrum import ActionSpec, LyapunovSpectrum, splitting_for
from .toral import MAX_DELTA, action_matrix, apply_matrix, lift, torus_dist, wrap

LINE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SuspensionPoint:
    u: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if np.any(u < 0) or np.any(u >= 1):
            raise InvalidInput("u must lie in [0,1)^k; call normalize first")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "x", wrap(self.x))

    def to_json(self):
        return {"u": [float(c) for c in self.u], "x": [float(c) for c in self.x]}

    @classmethod
    def from_json(cls, d):
        return cls(d["u"], d["x"])


def normalize(spec: Optional[ActionSpec], u, x) -> SuspensionPoint:
    """Representative with u in [0,1)^k: (u, x) ~ (u - n, alpha^n x), n = floor(u)."""
    u = np.asarray(u, dtype=float)
    n = np.floor(u).astype(np.int64)
    frac = u - n
    # a tiny negative u gives frac == 1.0 after rounding: it belongs to the next cell
    up = frac >= 1.0
    n[up] += 1
    frac[up] = 0.0
    if not np.any(n):
        return SuspensionPoint(frac, x)
    if spec is None:
        raise InvalidInput("an action is needed to move x across fundamental domains")
    return SuspensionPoint(frac, apply_matrix(action_matrix(spec, n), x))


def flow(spec: ActionSpec, w, pt: SuspensionPoint) -> SuspensionPoint:
    """alpha~^w (u, x) = [(u + w, x)]."""
    w = np.asarray(w, dtype=float)
    if w.shape != (spec.k,):
        raise InvalidInput("flow vector has the wrong length")
    return normalize(spec, pt.u + w, pt.x)


def fiber_at(spec: ActionSpec, w, x) -> np.ndarray:
    """pi_M alpha~^w (0, x) = alpha^{floor(w)} x."""
    return flow(spec, w, SuspensionPoint(np.zeros(spec.k), x)).x


# --- chains -------------------------------------------------------------------


@dataclass
class Chain:
    nodes: list  # SuspensionPoint
    jumps: np.ndarray  # (len(nodes) - 1) x k
    delta: float
    a: float

    def __post_init__(self):
        self.jumps = np.asarray(self.jumps, dtype=float).reshape(-1, self.nodes[0].u.size if self.nodes else 0)
        if len(self.nodes) and len(self.jumps) != len(self.nodes) - 1:
            raise InvalidInput("a chain with P+1 nodes needs P jumps")

    @property
    def k(self) -> int:
        return self.nodes[0].u.size

    def times(self) -> np.ndarray:
        """t_p = sum_{q<p} v_q, with t_0 = 0."""
        t = np.zeros((len(self.nodes), self.k))
        if len(self.jumps):
            t[1:] = np.cumsum(self.jumps, axis=0)
        return t

    def to_json(self):
        return {
            "nodes": [n.to_json() for n in self.nodes],
            "jumps": [[float(c) for c in v] for v in self.jumps],
            "delta": float(self.delta),
            "a": float(self.a),
        }

    @classmethod
    def from_json(cls, d):
        nodes = [SuspensionPoint(n["u"], n["x"]) for n in d["nodes"]]
        if not nodes:
            raise InvalidInput("a chain needs at least one node")
        return cls(nodes, d["jumps"], float(d["delta"]), float(d["a"]))


@dataclass
class ChainCheck:
    defect: float
    min_jump: float
    per_step: np.ndarray

    def to_json(self):
        return {"defect": self.defect, "min_jump": self.min_jump}


def verify_chain(spec: ActionSpec, chain: Chain) -> ChainCheck:
    """Recompute sup_p d(pi_M alpha~^{v_p}(u_p, x_p), x_{p+1}) and min_p |v_p|."""
    errs = np.array([
        torus_dist(flow(spec, v, nd).x, nxt.x)
        for nd, v, nxt in zip(chain.nodes, chain.jumps, chain.nodes[1:])
    ])
    defect = float(errs.max()) if errs.size else 0.0
    lengths = np.linalg.norm(chain.jumps, axis=1)
    return ChainCheck(defect, float(lengths.min()) if lengths.size else math.inf, errs)


def check_jumps(chain: Chain, direction: Direction):
    u = direction.unit
    for p, v in enumerate(chain.jumps):
        off = v - np.dot(v, u) * u
        if np.max(np.abs(off)) > LINE_TOL * max(1.0, float(np.max(np.abs(v)))):
            raise JumpOffLine(f"jump {p} = {v.tolist()} leaves the line")


def perturbed_chain(spec: ActionSpec, direction: Direction, x0, jumps: int, delta: float, a: float,
                    seed: int = 0, u0=None, spread: float = 1.0) -> Chain:
    """(delta, a)-chain: exact flow segments of length in (a, a + spread) along
    the line, each landing point moved by a uniform perturbation of size < delta."""
    if not 0 <= delta < MAX_DELTA:
        raise InvalidInput(f"delta must lie in [0, {MAX_DELTA})")
    rng = np.random.default_rng(seed)
    u = direction.unit
    lengths = a + spread * rng.uniform(0.0, 1.0, size=jumps)
    lengths[lengths <= a] = a + 0.5 * spread
    signs = np.ones(jumps)
    V = lengths[:, None] * signs[:, None] * u[None, :]
    nodes = [normalize(spec, np.zeros(spec.k) if u0 is None else u0, x0)]
    for v in V:
        nxt = flow(spec, v, nodes[-1])
        xi = rng.uniform(-1.0, 1.0, size=spec.m) * delta
        nodes.append(SuspensionPoint(nxt.u, nxt.x + xi))
    return Chain(nodes, V, float(delta), float(a))


# --- shadowing ----------------------------------------------------------------


def modulus_constant(spec: ActionSpec) -> float:
    """C = max ||alpha^n||_inf over |n|_inf <= ceil(sqrt k): the time-w flow
    maps with |w| <= sqrt k are C-Lipschitz on the fiber."""
    r = math.ceil(math.sqrt(spec.k))
    return float(max(ex.inf_norm(action_matrix(spec, n)) for n in product(range(-r, r + 1), repeat=spec.k)))


@dataclass
class ChainShadowResult:
    kind: str  # "shadow" or "quasi-shadow"
    u0: np.ndarray
    point: np.ndarray  # fiber coordinate of the shadow at node 0
    sup_error: float  # recomputed closed loop
    chain_defect: float
    lattice_defect: float
    L: float
    C: float
    rate: float
    lattice_points: np.ndarray
    hyperbolic_error: Optional[float] = None
    center_max: Optional[float] = None
    recurrence_residual: Optional[float] = None
    per_node_errors: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    @property
    def bound(self) -> float:
        return self.L * self.chain_defect * self.C

    @property
    def passed(self) -> bool:
        err = self.sup_error if self.kind == "shadow" else self.hyperbolic_error
        return err <= self.bound and self.lattice_defect <= self.chain_defect * self.C

    def to_json(self):
        d = {
            "kind": self.kind,
            "u0": [float(c) for c in self.u0],
            "point": [float(c) for c in self.point],
            "sup_error": self.sup_error,
            "chain_defect": self.chain_defect,
            "lattice_defect": self.lattice_defect,
            "theoretical_L": self.L,
            "modulus_constant": self.C,
            "bound": self.bound,
            "rate": self.rate,
            "passed": self.passed,
            "per_step_errors": [float(e) for e in self.per_node_errors],
        }
        if self.kind != "shadow":
            d.update(
                hyperbolic_error=self.hyperbolic_error,
                center_translation_max=self.center_max,
                recurrence_residual=self.recurrence_residual,
            )
        return d


def reduce_chain(chain: Chain) -> np.ndarray:
    """Lattice points n_p = floor(u_0 + t_p) bracketing the accumulated flow time."""
    return np.floor(chain.nodes[0].u[None, :] + chain.times()).astype(np.int64)


def shadow_chain(spec: ActionSpec, spectrum: LyapunovSpectrum, chain: Chain, direction: Direction) -> ChainShadowResult:
    """Shadow a chain along a line by shadowing the fiber points at the lattice
    points n_p; the fractional part u_0 is carried along as a fixed offset.

    The shadow is the suspension point (u_0, x): the error reported is
    sup_p d(x_p, pi_M alpha~^{t_p}(u_0, x)), recomputed from scratch.
    """
    check_jumps(chain, direction)
    chk = verify_chain(spec, chain)
    n = reduce_chain(chain)
    steps = [tuple(int(c) for c in d) for d in np.diff(n, axis=0)]
    if any(not any(s) for s in steps):
        raise InvalidInput("a jump stays inside one fundamental domain; increase a")
    mats = [action_matrix(spec, s) for s in steps]
    X = np.array([nd.x for nd in chain.nodes])
    split = splitting_for(spectrum, np.array(direction.generator, dtype=float))
    rate = hyperbolic_rate(mats, split) if (split.J1 or split.J2) and mats else math.inf
    if rate <= 0:
        raise RatesFailed(f"lattice steps along the chain are not hyperbolic (rate {rate})")
    C = modulus_constant(spec)
    L = lipschitz_bound(split, rate)
    u0 = chain.nodes[0].u
    if split.J3:
        q = quasi_shadow(mats, X, split, rate=rate)
        errs = np.max(np.abs(lift(q.points - X)), axis=1)
        return ChainShadowResult(
            "quasi-shadow", u0, q.points[0], float(errs.max()), chk.defect, q.defect, L, C, rate, n,
            hyperbolic_error=q.hyperbolic_error, center_max=q.center_max,
            recurrence_residual=q.recurrence_residual, per_node_errors=errs,
        )
    res = shadow_hyperbolic(mats, X, split, rate=rate)
    errs = _closed_loop(spec, chain, res.point_fixed, res.bits)
    return ChainShadowResult(
        "shadow", u0, res.point, float(errs.max()), chk.defect, res.defect, L, C, rate, n,
        per_node_errors=errs,
    )


def _closed_loop(spec: ActionSpec, chain: Chain, Y0: tuple, bits: int) -> np.ndarray:
    """d(x_p, pi_M alpha~^{t_p}(u_0, y)) with y carried exactly in fixed point."""
    mod = 1 << bits
    n = reduce_chain(chain)
    Y, prev = list(Y0), n[0]
    errs = []
    for p, nd in enumerate(chain.nodes):
        if p:
            M = action_matrix(spec, n[p] - prev)
            Y = [v % mod for v in ex.matvec(M, Y)]
            prev = n[p]
        errs.append(ex.fixed_dist(ex.to_fixed(nd.x, bits), Y, bits))
    return np.array(errs)


def separation_along_line(spec: ActionSpec, direction: Direction, x, y, horizon: float, a: float) -> float:
    """sup over sampled v = j (a/4) u, |v| <= horizon, of d(pi_M alpha~^v(0,x), pi_M alpha~^v(0,y)).

    The sampling resolution a/4 makes this an empirical lower estimate of the
    supremum over the whole line.
    """
    u = direction.unit
    h = a / 4.0
    J = int(math.floor(horizon / h))
    worst, seen = 0.0, set()
    for j in range(-J, J + 1):
        nvec = tuple(int(c) for c in np.floor(j * h * u))
        if nvec in seen:
            continue
        seen.add(nvec)
        M = action_matrix(spec, nvec)
        worst = max(worst, torus_dist(apply_matrix(M, x), apply_matrix(M, y)))
    return worst
