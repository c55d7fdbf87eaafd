"""Linear Z^k actions on T^m: evaluation, pseudo-orbit generation and checking."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _exact as ex
from .errors import DefectTooLarge, DisconnectedWindow, InvalidInput
from .geometry import Direction, LatticeWindow
from .spectrum import ActionSpec

MAX_DELTA = 0.25
# matrices with max row sum below this act on doubles with error < 2^-45
FLOAT_SAFE_NORM = 1 << 8


def wrap(x) -> np.ndarray:
    y = np.mod(np.asarray(x, dtype=float), 1.0)
    y[y >= 1.0] = 0.0
    return y


def lift(d) -> np.ndarray:
    """Representative of d mod 1 in [-1/2, 1/2)."""
    d = np.asarray(d, dtype=float)
    return d - np.floor(d + 0.5)


def torus_dist(x, y) -> float:
    return float(np.max(np.abs(lift(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))))


def action_matrix(spec: ActionSpec, n) -> tuple:
    """Exact integer matrix of alpha^n."""
    return ex.action_matrix(spec.int_generators, tuple(int(c) for c in n))


def apply_matrix(M: tuple, x) -> np.ndarray:
    """M x mod 1, exact in integer arithmetic on the binary value of x."""
    X = ex.to_fixed(x, ex.FLOAT_BITS)
    return ex.fixed_to_float(ex.matvec(M, X), ex.FLOAT_BITS)


def apply(spec: ActionSpec, n, x) -> np.ndarray:
    if len(n) != spec.k:
        raise InvalidInput("lattice vector has the wrong length")
    return apply_matrix(action_matrix(spec, n), x)


def _step(M: tuple, x) -> np.ndarray:
    if ex.inf_norm(M) < FLOAT_SAFE_NORM:
        return wrap(np.array(M, dtype=float) @ x)
    return apply_matrix(M, x)


@dataclass
class PseudoOrbit:
    window: LatticeWindow
    points: np.ndarray  # len(window) x m, coordinates in [0, 1)
    delta: float

    def __len__(self):
        return len(self.points)

    def to_json(self) -> dict:
        return {
            "delta": float(self.delta),
            "orbit": [
                {"n": [int(c) for c in n], "x": [float(c) for c in x]}
                for n, x in zip(self.window.points, self.points)
            ],
            "direction": None if self.window.direction is None else self.window.direction.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "PseudoOrbit":
        direction = Direction.from_json(d["direction"]) if d.get("direction") else None
        ns = [e["n"] for e in d["orbit"]]
        xs = np.array([e["x"] for e in d["orbit"]], dtype=float)
        return cls(LatticeWindow.from_points(ns, direction), xs, float(d["delta"]))


def _undirected(window: LatticeWindow):
    adj = [set() for _ in range(len(window))]
    for a, b in window.edges():
        adj[a].add(b)
        adj[b].add(a)
    return adj


def _root(window: LatticeWindow) -> int:
    norms = np.einsum("ij,ij->i", window.points, window.points)
    return min(range(len(window)), key=lambda a: (norms[a], tuple(window.points[a])))


def perturbed_pseudo_orbit(spec: ActionSpec, window: LatticeWindow, x0, delta: float, seed: int = 0) -> PseudoOrbit:
    """delta-pseudo-orbit through x0 at the window point nearest the origin.

    On a tree-shaped window each point is placed so that the forward defect
    on the edge to its parent is a uniform perturbation in [-delta, delta]^m.
    When the neighbour graph has cycles (thick tubes) every point is the exact
    orbit point plus its own perturbation, and the claimed defect becomes
    delta * (1 + max ||alpha^D||).
    With delta = 0 the exact orbit is produced point by point.
    """
    return perturbed_pseudo_orbits(spec, window, x0, delta, [seed])[0]


def _walk_order(window: LatticeWindow):
    adj = _undirected(window)
    root = _root(window)
    order, parent = [root], {root: None}
    queue = deque([root])
    while queue:
        a = queue.popleft()
        for b in sorted(adj[a]):
            if b not in parent:
                parent[b] = a
                order.append(b)
                queue.append(b)
    if len(order) != len(window):
        raise DisconnectedWindow(f"{len(window) - len(order)} window points unreachable from the root")
    n_edges = sum(len(s) for s in adj) // 2
    return root, order, parent, n_edges == len(window) - 1


def perturbed_pseudo_orbits(spec: ActionSpec, window: LatticeWindow, x0, delta: float, seeds) -> list:
    """perturbed_pseudo_orbit for several rng seeds, walking the window once."""
    if not 0 <= delta < MAX_DELTA:
        raise DefectTooLarge(f"delta={delta} must lie in [0, {MAX_DELTA})")
    m, n, nb = spec.m, len(window), len(seeds)
    if n == 0:
        return [PseudoOrbit(window, np.zeros((0, m)), float(delta)) for _ in seeds]
    root, order, parent, tree = _walk_order(window)
    xi = np.stack([np.random.default_rng(s).uniform(-1.0, 1.0, size=(n, m)) * delta for s in seeds])
    xi[:, root] = 0.0
    x0 = wrap(x0)
    pts = np.zeros((nb, n, m))
    pts[:, root] = x0
    claimed = float(delta)
    if tree and delta > 0:
        forward = set(window.edges())
        pts_l = window.points.tolist()
        step_cache: dict = {}
        for b in order[1:]:
            a = parent[b]
            key = tuple(u - v for u, v in zip(pts_l[b], pts_l[a]))
            if key not in step_cache:
                M = action_matrix(spec, key)
                step_cache[key] = (M, ex.inf_norm(M) < FLOAT_SAFE_NORM)
            M, small = step_cache[key]
            back = (b, a) in forward
            # when b precedes a, solve alpha^{a-b} x_b = x_a - xi_b instead
            src = pts[:, a] - xi[:, b] if back else pts[:, a]
            if small:
                y = np.stack([sum(float(c) * src[:, j] for j, c in enumerate(row)) for row in M], axis=1)
            else:
                y = np.array([apply_matrix(M, v) for v in src])
            if not back:
                y = y + xi[:, b]
            pts[:, b] = y - np.floor(y)
        pts[pts >= 1.0] = 0.0
    else:
        base = window.points[root]
        exact = np.array([apply(spec, window.points[b] - base, x0) for b in range(n)])
        pts = wrap(exact[None, :, :] + xi)
        pts[:, root] = x0
        if delta > 0:
            worst = max(
                ex.inf_norm(action_matrix(spec, window.points[b] - window.points[a])) for a, b in window.edges()
            )
            claimed = float(delta) * (1 + worst)
    return [PseudoOrbit(window, pts[i], claimed) for i in range(nb)]


def verify_pseudo_orbit(spec: ActionSpec, orbit: PseudoOrbit) -> float:
    """Max over window edges of d(alpha^{b-a} x_a, x_b), recomputed from scratch."""
    win, X = orbit.window, orbit.points
    groups: dict = {}
    for a, b in win.edges():
        groups.setdefault(tuple(int(c) for c in win.points[b] - win.points[a]), []).append((a, b))
    worst = 0.0
    for step, pairs in groups.items():
        M = action_matrix(spec, step)
        ia = np.array([p[0] for p in pairs])
        ib = np.array([p[1] for p in pairs])
        if ex.inf_norm(M) < FLOAT_SAFE_NORM:
            d = np.abs(lift(X[ia] @ np.array(M, dtype=float).T - X[ib]))
            worst = max(worst, float(np.max(d)))
        else:
            for a, b in zip(ia, ib):
                worst = max(worst, torus_dist(apply_matrix(M, X[a]), X[b]))
    return worst


def as_sequence(spec: ActionSpec, orbit: PseudoOrbit):
    """Steps D_p, exact matrices alpha^{D_p} and points along the window order."""
    pts = orbit.window.points
    steps = [tuple(int(c) for c in pts[p + 1] - pts[p]) for p in range(len(pts) - 1)]
    mats = [action_matrix(spec, s) for s in steps]
    return steps, mats, orbit.points
