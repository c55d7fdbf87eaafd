"""Shadowing and quasi-shadowing of pseudo-orbits for sequences of toral maps.

Conventions.  Along a sequence x_0, ..., x_P with integer step matrices M_p
the lifted errors are e_p = lift(M_p x_p - x_{p+1}).  A true orbit
y_p = x_p + v_p needs v_{p+1} = M_p v_p + e_p.  The bounded solution on a
finite window anchors the stable part at p = 0 and the unstable part at
p = P:

    v^s_{p+1} = M_p v^s_p + Pi^s e_p,        v^s_0 = 0
    v^u_p     = M_p^{-1} (v^u_{p+1} - Pi^u e_p),  v^u_P = 0

Every reported error is recomputed by pushing the returned point through the
exact integer action (fixed-point arithmetic with enough bits to absorb the
growth of the products) and comparing with the pseudo-orbit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath
import numpy as np

from . import _exact as ex
from .errors import DefectTooLarge, DegenerateDecomposition, InvalidInput, NotHyperbolic
from .geometry import Direction
from .spectrum import ActionSpec, LyapunovSpectrum, Splitting, Tag, classify_direction, splitting_for
from .toral import MAX_DELTA, FLOAT_SAFE_NORM, action_matrix, apply_matrix, lift, wrap

GUARD_BITS = 128


# --- shared pieces ------------------------------------------------------------


def lifted_errors(mats: Sequence[tuple], X: np.ndarray) -> np.ndarray:
    """e_p = lift(M_p x_p - x_{p+1}) for p = 0..P-1."""
    P = len(mats)
    E = np.zeros((P, X.shape[1]))
    groups: dict = {}
    for p, M in enumerate(mats):
        groups.setdefault(M, []).append(p)
    for M, idx in groups.items():
        idx = np.array(idx)
        if ex.inf_norm(M) < FLOAT_SAFE_NORM:
            E[idx] = lift(X[idx] @ np.array(M, dtype=float).T - X[idx + 1])
        else:
            for p in idx:
                E[p] = lift(apply_matrix(M, X[p]) - X[p + 1])
    return E


def step_rates(mats: Sequence[tuple], splitting: Splitting) -> np.ndarray:
    """Per-step log-moduli of each M_p on each block (P x s)."""
    sp = splitting.spectrum
    W, Wi = splitting.W, splitting.Winv
    out = np.zeros((len(mats), sp.s))
    cache: dict = {}
    for p, M in enumerate(mats):
        if M not in cache:
            Mf = np.array(M, dtype=float)
            row = []
            for j in range(sp.s):
                c = sp.block_columns(j)
                ev = np.linalg.eigvals(Wi[c, :] @ Mf @ W[:, c])
                row.append(float(np.mean(np.log(np.abs(ev)))))
            cache[M] = row
        out[p] = cache[M]
    return out


def hyperbolic_rate(mats, splitting) -> float:
    """min over steps of the contraction/expansion margin on E^s and E^u."""
    r = step_rates(mats, splitting)
    worst = math.inf
    if splitting.J1:
        worst = min(worst, float(-np.max(r[:, splitting.J1])))
    if splitting.J2:
        worst = min(worst, float(np.min(r[:, splitting.J2])))
    return worst


def lipschitz_bound(splitting: Splitting, rate: float) -> float:
    if rate <= 0:
        return math.inf
    return splitting.norm_constant(("s", "u")) / (1.0 - math.exp(-rate))


def _hp_projector(splitting: Splitting, part: str, bits: int) -> tuple:
    """Fixed-point integers round(Pi_part * 2^bits) from a high-precision eigensolve."""
    sp = splitting.spectrum
    if not sp.semisimple or sp.eig_values is None:
        raise DegenerateDecomposition("high-precision projector needs a diagonalisable action")
    labels = {"s": splitting.J1, "u": splitting.J2, "c": splitting.J3}[part]
    bits = -(-bits // 512) * 512
    key = ("proj", part, tuple(labels), bits)
    if key in sp._cache:
        return sp._cache[key]
    gens = sp._cache["generators"]
    with mpmath.workprec(bits + 64):
        C = mpmath.matrix(sum(c * np.array(g, dtype=object) for c, g in zip(sp.combination, gens)).tolist())
        vals, V = mpmath.eig(C)
        Vi = mpmath.inverse(V)
        free = list(range(len(sp.eig_values)))
        chosen = []
        for a in range(len(vals)):
            z = complex(vals[a])
            b = min(free, key=lambda t: abs(sp.eig_values[t] - z))
            free.remove(b)
            if sp.eig_labels[b] in labels:
                chosen.append(a)
        m = C.rows
        Pm = mpmath.matrix(m, m)
        for a in chosen:
            for i in range(m):
                for j in range(m):
                    Pm[i, j] += V[i, a] * Vi[a, j]
        Pr = mpmath.matrix(m, m)
        for i in range(m):
            for j in range(m):
                Pr[i, j] = mpmath.re(Pm[i, j])
        out = ex.mp_matrix_to_fixed(Pr, bits)
    sp._cache[key] = out
    return out


def _log2_norm(M) -> float:
    return math.log2(max(1, ex.inf_norm(M)))


# --- results ------------------------------------------------------------------


@dataclass
class ShadowResult:
    point: np.ndarray  # shadow point at the anchor index
    anchor: int
    sup_error: float
    defect: float
    lipschitz_ratio: float
    corrections: np.ndarray  # v_p = lift(y_p - x_p) from the closed loop
    per_step_errors: np.ndarray
    rate: float
    bound: float  # theoretical L
    kappa: float
    bits: int
    point_fixed: tuple = field(repr=False, default=())

    def to_json(self):
        return {
            "point": [float(c) for c in self.point],
            "anchor_index": self.anchor,
            "sup_error": self.sup_error,
            "defect": self.defect,
            "lipschitz_ratio": self.lipschitz_ratio,
            "theoretical_L": self.bound,
            "rate": self.rate,
            "splitting_constant": self.kappa,
            "precision_bits": self.bits,
            "per_step_errors": [float(x) for x in self.per_step_errors],
        }


@dataclass
class QuasiShadowResult:
    points: np.ndarray  # y_p
    translations: np.ndarray  # u_p (u_0 = 0)
    corrections: np.ndarray  # v_p in E^s + E^u
    sup_error: float  # max_p d(y_p, x_p)
    hyperbolic_error: float  # max_p |v_p|
    center_max: float  # max_p |u_p|
    defect: float
    recurrence_residual: float
    center_residual: float  # max |u_{p+1} + Pi^c e_p|
    membership_residual: float
    rate: float
    bound: float
    kappa: float

    def to_json(self):
        return {
            "sup_error": self.sup_error,
            "hyperbolic_error": self.hyperbolic_error,
            "center_translation_max": self.center_max,
            "defect": self.defect,
            "lipschitz_ratio": self.hyperbolic_error / self.defect if self.defect else 0.0,
            "theoretical_L": self.bound,
            "rate": self.rate,
            "splitting_constant": self.kappa,
            "recurrence_residual": self.recurrence_residual,
            "center_residual": self.center_residual,
            "per_step_errors": [float(x) for x in np.max(np.abs(self.corrections), axis=1)],
        }


# --- solvers ------------------------------------------------------------------


def solve_corrections(mats, E, splitting, anchor_s=None, anchor_u=None):
    """Float forward/backward recursion for v_p (P+1 x m).

    Runs in block coordinates of E^s and E^u so that rounding cannot leak
    into the growing directions.
    """
    P, m = E.shape
    W, Wi = splitting.W, splitting.Winv
    out = np.zeros((P + 1, m))
    cs, cu = splitting.cols["s"], splitting.cols["u"]
    cache: dict = {}

    def restricted(M, cols, invert):
        key = (M, tuple(cols), invert)
        if key not in cache:
            Mf = np.array(ex.inverse(M) if invert else M, dtype=float)
            cache[key] = Wi[cols, :] @ Mf @ W[:, cols]
        return cache[key]

    if cs:
        Es = E @ Wi[cs, :].T
        c = np.zeros(len(cs)) if anchor_s is None else Wi[cs, :] @ anchor_s
        out[0] += W[:, cs] @ c
        for p in range(P):
            c = restricted(mats[p], cs, False) @ c + Es[p]
            out[p + 1] += W[:, cs] @ c
    if cu:
        Eu = E @ Wi[cu, :].T
        c = np.zeros(len(cu)) if anchor_u is None else Wi[cu, :] @ anchor_u
        out[P] += W[:, cu] @ c
        for p in range(P - 1, -1, -1):
            c = restricted(mats[p], cu, True) @ (c - Eu[p])
            out[p] += W[:, cu] @ c
    return out


def _check_inputs(mats, X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) != len(mats) + 1:
        raise InvalidInput("need P step matrices and P+1 points")
    return wrap(X)


def _fixed_cols(X: np.ndarray, bits: int) -> np.ndarray:
    """Exact fixed-point object array of doubles in X, last two axes swapped."""
    f, e = np.frexp(np.swapaxes(X, -1, -2))
    mant = (f * float(1 << 53)).astype(np.int64).astype(object)
    sh = e.astype(np.int64) - 53 + bits
    return (mant << np.maximum(sh, 0).astype(object)) >> np.maximum(-sh, 0).astype(object)


def _obj(M: tuple) -> np.ndarray:
    return np.array(M, dtype=object)


def _to_float(D: np.ndarray, bits: int) -> np.ndarray:
    """Signed fixed-point object array -> float (truncated to 2^-(bits) * 2^(bits-64))."""
    drop = max(0, bits - 64)
    return (D >> drop).astype(float) * math.ldexp(1.0, drop - bits)


def _hp_batch(mats, Xs, splitting):
    """Exact shadow points and closed-loop differences for a batch of orbits.

    Xs has shape (nb, P+1, m).  Returns (Y0 fixed, D floats (nb, P+1, m),
    bits).  D[b, p] = lift(y_p - x_p) for the shadow y of orbit b.
    """
    nb, P1, m = Xs.shape
    P = P1 - 1
    F = ex.FLOAT_BITS
    b_fwd = sum(_log2_norm(M) for M in mats)
    inv = {M: ex.inverse(M) for M in set(mats)}
    b_bwd = sum(_log2_norm(inv[M]) for M in mats)
    B = max(int(math.ceil(b_fwd)) + GUARD_BITS, F)
    fwd = {M: _obj(M) for M in set(mats)}
    bwd = {M: _obj(inv[M]) for M in set(mats)}
    mod_f, half_f = 1 << F, 1 << (F - 1)
    XF = _fixed_cols(np.swapaxes(Xs, 0, 1), F)  # (P+1) x m x nb
    # S = sum_q M_0^{-1} ... M_q^{-1} E_q, exact at scale 2^F
    T = np.zeros((m, nb), dtype=object)
    for q in range(P - 1, -1, -1):
        Eq = (fwd[mats[q]].dot(XF[q]) - XF[q + 1] + half_f) % mod_f - half_f
        T = bwd[mats[q]].dot(Eq + T)
    if splitting.J2 and P:
        Pb = B + int(math.ceil(b_bwd)) + 64
        Pu = _hp_projector(splitting, "u", Pb)
        Pb = -(-Pb // 512) * 512
        V0 = -(_obj(Pu).dot(T) >> (Pb + F - B))
    else:
        V0 = np.zeros((m, nb), dtype=object)
    mod, half = 1 << B, 1 << (B - 1)
    up = B - F
    Y = ((XF[0] << up) + V0) % mod
    Y0 = Y.copy()
    D = np.zeros((nb, P1, m))
    D[:, 0, :] = _to_float((Y - (XF[0] << up) + half) % mod - half, B).T
    for p in range(P):
        Y = fwd[mats[p]].dot(Y) % mod
        D[:, p + 1, :] = _to_float((Y - (XF[p + 1] << up) + half) % mod - half, B).T
    return Y0, D, B


def _prepare(mats, X, splitting):
    if splitting.J3:
        raise NotHyperbolic("splitting has a centre; use quasi_shadow")
    mats = [ex.as_tuple(M) for M in mats]
    X = _check_inputs(mats, X)
    E = lifted_errors(mats, X)
    delta = float(np.max(np.abs(E))) if len(mats) else 0.0
    if delta >= MAX_DELTA:
        raise DefectTooLarge(f"measured defect {delta} >= {MAX_DELTA}")
    return mats, X, delta


def shadow_hyperbolic_batch(mats, Xs, splitting: Splitting, rate: Optional[float] = None, anchor: int = 0):
    """shadow_hyperbolic for many pseudo-orbits over the same step matrices."""
    mats = [ex.as_tuple(M) for M in mats]
    prepared = [_prepare(mats, X, splitting) for X in Xs]
    if rate is None:
        rate = hyperbolic_rate(mats, splitting) if mats else math.inf
    kappa = splitting.norm_constant(("s", "u"))
    bound = lipschitz_bound(splitting, rate)
    Xarr = np.array([p[1] for p in prepared])
    Y0, D, B = _hp_batch(mats, Xarr, splitting)
    out = []
    mod = 1 << B
    for b, (_, X, delta) in enumerate(prepared):
        errs = np.max(np.abs(D[b]), axis=1)
        sup = float(np.max(errs))
        Yfix = [int(v) for v in Y0[:, b]]
        for p in range(anchor):
            Yfix = [v % mod for v in ex.matvec(mats[p], Yfix)]
        out.append(ShadowResult(
            point=ex.fixed_to_float(Yfix, B),
            anchor=anchor,
            sup_error=sup,
            defect=delta,
            lipschitz_ratio=sup / delta if delta > 0 else 0.0,
            corrections=D[b],
            per_step_errors=errs,
            rate=rate,
            bound=bound,
            kappa=kappa,
            bits=B,
            point_fixed=tuple(Yfix),
        ))
    return out


def shadow_hyperbolic(mats, X, splitting: Splitting, rate: Optional[float] = None, anchor: int = 0) -> ShadowResult:
    """Shadow point of a pseudo-orbit for a hyperbolic sequence of maps.

    ``rate`` is the per-step hyperbolicity margin used for the theoretical
    constant L; by default it is measured from the step matrices.  The
    returned point is the shadow at index ``anchor``.
    """
    return shadow_hyperbolic_batch(mats, [X], splitting, rate, anchor)[0]


def quasi_shadow(mats, X, splitting: Splitting, rate: Optional[float] = None) -> QuasiShadowResult:
    """Points y_p and centre translations u_p with y_{p+1} = M_p y_p + u_{p+1}."""
    mats = [ex.as_tuple(M) for M in mats]
    X = _check_inputs(mats, X)
    P, m = len(mats), X.shape[1]
    E = lifted_errors(mats, X)
    delta = float(np.max(np.abs(E))) if P else 0.0
    if delta >= MAX_DELTA:
        raise DefectTooLarge(f"measured defect {delta} >= {MAX_DELTA}")
    Pc = splitting.Pc
    U = np.zeros((P + 1, m))
    U[1:] = -(E @ Pc.T)
    V = solve_corrections(mats, E, splitting)
    Y = wrap(X + V)
    # recurrence y_{p+1} = M_p y_p + u_{p+1} mod 1, in lifted coordinates
    rec = 0.0
    for p, M in enumerate(mats):
        rec = max(rec, float(np.max(np.abs(lift(apply_matrix(M, Y[p]) + U[p + 1] - Y[p + 1])))))
    E2 = lifted_errors(mats, X)
    cres = float(np.max(np.abs(U[1:] + E2 @ Pc.T))) if P else 0.0
    mem = max(
        float(np.max(np.abs(U @ Pc.T - U))) if P else 0.0,
        float(np.max(np.abs(V @ Pc.T))) if P else 0.0,
    )
    if rate is None:
        rate = hyperbolic_rate(mats, splitting) if P and (splitting.J1 or splitting.J2) else math.inf
    dists = np.max(np.abs(lift(Y - X)), axis=1)
    return QuasiShadowResult(
        points=Y,
        translations=U,
        corrections=V,
        sup_error=float(np.max(dists)),
        hyperbolic_error=float(np.max(np.abs(V))),
        center_max=float(np.max(np.abs(U))),
        defect=delta,
        recurrence_residual=rec,
        center_residual=cres,
        membership_residual=mem,
        rate=rate,
        bound=lipschitz_bound(splitting, rate),
        kappa=splitting.kappa,
    )


def boundary_decay(mats, X, splitting, scale: float = 1e-3, seed: int = 0):
    """Change of v_p caused by replacing the zero anchors with random ones.

    Returns (distance to the nearest end, |difference|) arrays; the
    difference decays like exp(-rate * distance).
    """
    mats = [ex.as_tuple(M) for M in mats]
    X = _check_inputs(mats, X)
    E = lifted_errors(mats, X)
    rng = np.random.default_rng(seed)
    m = X.shape[1]
    v0 = solve_corrections(mats, E, splitting)
    v1 = solve_corrections(mats, E, splitting, rng.uniform(-scale, scale, m), rng.uniform(-scale, scale, m))
    P = len(mats)
    dist = np.minimum(np.arange(P + 1), P - np.arange(P + 1))
    return dist, np.max(np.abs(v1 - v0), axis=1)


# --- expansiveness ------------------------------------------------------------


@dataclass
class ExpansivenessCertificate:
    rho: float
    rate: float
    kappa: float
    doubling_steps: int
    horizon: int
    pairs: int
    separated: int
    worst_steps: int

    @property
    def passed(self) -> bool:
        return self.separated == self.pairs

    def to_json(self):
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def expansiveness_certificate(spec: ActionSpec, spectrum: LyapunovSpectrum, direction: Direction,
                              horizon: int = 64, pairs: int = 1000, seed: int = 0,
                              min_sep: float = 1e-6) -> Optional[ExpansivenessCertificate]:
    """rho for a rational regular line plus an empirical separation test.

    With M = alpha^{n} for the primitive lattice vector n on the line, any
    pair whose orbits stay rho = 1/(2(1+||M||)) close has lifted differences
    w_p obeying w_{p+1} = M w_p exactly, a bounded orbit of a hyperbolic
    matrix, so w = 0.
    """
    if not direction.rational:
        return None
    n = direction.integer_generator
    if classify_direction(spectrum, n).tag is not Tag.REGULAR:
        return None
    split = splitting_for(spectrum, n)
    M = action_matrix(spec, n)
    Mi = ex.inverse(M)
    rho = 1.0 / (2.0 * (1 + ex.inf_norm(M)))
    rate = hyperbolic_rate([M], split)
    kappa = split.kappa
    doubling = int(math.ceil(math.log(2.0 * kappa) / rate))
    rng = np.random.default_rng(seed)
    F = ex.FLOAT_BITS
    mod = 1 << F
    separated, worst = 0, 0
    for _ in range(pairs):
        x = rng.uniform(0, 1, spec.m)
        w = rng.uniform(-1, 1, spec.m)
        w *= 10 ** rng.uniform(math.log10(min_sep), math.log10(0.4)) / np.max(np.abs(w))
        y = wrap(x + w)
        if np.max(np.abs(lift(y - x))) < min_sep:
            y = wrap(x + np.sign(w) * min_sep)
        D = [(a - b) % mod for a, b in zip(ex.to_fixed(x, F), ex.to_fixed(y, F))]
        fw, bw = D, D
        hit = None
        for step in range(horizon + 1):
            if ex.fixed_dist(fw, [0] * spec.m, F) > rho or ex.fixed_dist(bw, [0] * spec.m, F) > rho:
                hit = step
                break
            fw = [v % mod for v in ex.matvec(M, fw)]
            bw = [v % mod for v in ex.matvec(Mi, bw)]
        if hit is not None:
            separated += 1
            worst = max(worst, hit)
    return ExpansivenessCertificate(rho, rate, kappa, doubling, horizon, pairs, separated, worst)


# --- two-dimensional box by gluing line solves ----------------------------------


@dataclass
class BoxShadowResult:
    point: np.ndarray
    sup_error: float
    defect: float
    row_errors: list
    overlap_disagreements: list
    L_row: float
    L_tube: float
    L_box: float

    def to_json(self):
        return dict(
            point=[float(c) for c in self.point],
            sup_error=self.sup_error,
            defect=self.defect,
            row_errors=self.row_errors,
            overlap_disagreements=self.overlap_disagreements,
            L_row=self.L_row,
            L_tube=self.L_tube,
            L_box=self.L_box,
        )


def shadow_box(spec: ActionSpec, spectrum: LyapunovSpectrum, orbit) -> BoxShadowResult:
    """Shadow a k = 2 box pseudo-orbit row by row along e_1, then glue.

    Each row is shadowed along the regular line through e_1.  A row solve
    thickened to the neighbouring rows by alpha^{+-e_2} shadows that tube with
    L_tube = 1 + ||alpha^{+-e_2}|| L_row; adjacent tubes overlap on a row and
    must agree there within 2 L_tube delta.  The glued point is the row-0
    solution at the origin; its error on row j is bounded by transporting it
    with alpha^{j e_2} and telescoping the vertical defects.
    """
    if spec.k != 2:
        raise InvalidInput("box gluing is implemented for k = 2")
    from .toral import verify_pseudo_orbit

    pts, X = orbit.window.points, orbit.points
    index = orbit.window.index
    delta = verify_pseudo_orbit(spec, orbit)
    rows = sorted({int(p[1]) for p in pts})
    split = splitting_for(spectrum, (1, 0))
    A1 = action_matrix(spec, (1, 0))
    up, down = action_matrix(spec, (0, 1)), action_matrix(spec, (0, -1))
    vnorm = max(ex.inf_norm(up), ex.inf_norm(down))
    row_pts, row_solves = {}, {}
    L_row = lipschitz_bound(split, hyperbolic_rate([A1], split))
    errs = []
    for j in rows:
        idx = sorted((a for a in range(len(pts)) if pts[a][1] == j), key=lambda a: pts[a][0])
        xs = [int(pts[a][0]) for a in idx]
        if xs != list(range(xs[0], xs[-1] + 1)):
            raise InvalidInput("box rows must be contiguous")
        res = shadow_hyperbolic([A1] * (len(idx) - 1), X[idx], split)
        row_pts[j], row_solves[j] = xs, res
        errs.append(res.sup_error)
    L_tube = 1.0 + vnorm * L_row
    overlaps = []
    for j, jn in zip(rows, rows[1:]):
        a, b = row_solves[j], row_solves[jn]
        dis = 0.0
        for t, i in enumerate(row_pts[j]):
            if i in row_pts[jn]:
                s = row_pts[jn].index(i)
                ya = apply_matrix(up, a.corrections[t] + X[index[(i, j)]])
                yb = wrap(X[index[(i, jn)]] + b.corrections[s])
                dis = max(dis, float(np.max(np.abs(lift(ya - yb)))))
        overlaps.append(dis)
    # glue: the row-0 shadow at the origin
    r0 = row_solves[0]
    t0 = row_pts[0].index(0)
    F = r0.bits
    mod = 1 << F
    P0 = list(r0.point_fixed)
    for _ in range(t0 - r0.anchor):
        P0 = [v % mod for v in ex.matvec(A1, P0)]
    sup = 0.0
    L_box = 0.0
    for j in rows:
        Vj = action_matrix(spec, (0, j))
        chain = sum(ex.inf_norm(action_matrix(spec, (0, int(math.copysign(l, j))))) for l in range(abs(j)))
        L_box = max(L_box, ex.inf_norm(Vj) * L_row + chain)
        for i in row_pts[j]:
            Z = [v % mod for v in ex.matvec(action_matrix(spec, (i, j)), P0)]
            sup = max(sup, ex.fixed_dist(Z, ex.to_fixed(X[index[(i, j)]], F), F))
    point = ex.fixed_to_float(P0, F)
    return BoxShadowResult(point, sup, delta, errs, overlaps, L_row, L_tube, L_box)
