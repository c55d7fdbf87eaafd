"""Lyapunov data of commuting integer matrices.

The joint decomposition is obtained from one generic integer combination
C = sum c_i A_i: its eigenvectors are joint eigenvectors of the A_i whenever
the c_i avoid finitely many bad choices, so a handful of random retries is
enough.  Blocks E_j collect the eigenvectors sharing one tuple of moduli
(|mu_1|, ..., |mu_k|); the exponents are the logs of those moduli.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (
    DegenerateDecomposition,
    InvalidInput,
    NonCommuting,
    SecondTypeSingular,
    ZeroVector,
)

ZERO_TOL = 1e-9
MAX_ATTEMPTS = 16


def _as_int_matrix(a) -> np.ndarray:
    arr = np.array(a, dtype=object)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidInput("generators must be square matrices")
    for x in arr.flat:
        if int(x) != x:
            raise InvalidInput("generator entries must be integers")
    return np.vectorize(int, otypes=[object])(arr)


def _int_det(a: np.ndarray) -> int:
    # Bareiss fraction-free elimination, exact on Python ints
    m = [list(r) for r in a]
    n = len(m)
    sign, prev = 1, 1
    for i in range(n - 1):
        if m[i][i] == 0:
            swap = next((r for r in range(i + 1, n) if m[r][i] != 0), None)
            if swap is None:
                return 0
            m[i], m[swap] = m[swap], m[i]
            sign = -sign
        for r in range(i + 1, n):
            for c in range(i + 1, n):
                m[r][c] = (m[r][c] * m[i][i] - m[r][i] * m[i][c]) // prev
        prev = m[i][i]
    return sign * m[n - 1][n - 1]


@dataclass(frozen=True)
class ActionSpec:
    """k commuting integer m x m matrices generating a Z^k action."""

    generators: tuple
    interpretation: str = "toral"

    def __post_init__(self):
        gens = tuple(_as_int_matrix(g) for g in self.generators)
        if not gens:
            raise InvalidInput("need at least one generator")
        m = gens[0].shape[0]
        if any(g.shape != (m, m) for g in gens):
            raise InvalidInput("generators have different sizes")
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                if not np.array_equal(gens[i].dot(gens[j]), gens[j].dot(gens[i])):
                    raise NonCommuting(i, j)
        if self.interpretation == "toral":
            for i, g in enumerate(gens):
                if abs(_int_det(g)) != 1:
                    raise InvalidInput(f"generator {i} has |det| != 1; not a torus automorphism")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "int_generators", tuple(tuple(tuple(int(x) for x in r) for r in g) for g in gens))

    @property
    def k(self) -> int:
        return len(self.generators)

    @property
    def m(self) -> int:
        return self.generators[0].shape[0]

    def float_generators(self):
        return [g.astype(float) for g in self.generators]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "m": self.m,
            "generators": [[[int(x) for x in row] for row in g] for g in self.generators],
            "interpretation": self.interpretation,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ActionSpec":
        spec = cls(tuple(d["generators"]), d.get("interpretation", "toral"))
        if "k" in d and d["k"] != spec.k or "m" in d and d["m"] != spec.m:
            raise InvalidInput("declared k/m do not match the generators")
        return spec


DATA_DIR = Path(__file__).parent / "data"


def load_spec(path) -> ActionSpec:
    p = Path(path)
    if not p.exists() and (DATA_DIR / p.name).exists():
        p = DATA_DIR / p.name
    try:
        return ActionSpec.from_json(json.loads(p.read_text()))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InvalidInput(f"cannot read action spec {path}: {exc}") from exc


def cat_pair() -> ActionSpec:
    """Hyperbolic cat map and its inverse on T^2."""
    return load_spec(DATA_DIR / "cat_pair.json")


def cat_pair_center() -> ActionSpec:
    """Cat map pair extended by a neutral coordinate on T^3."""
    return load_spec(DATA_DIR / "cat_pair_center.json")


def tensor_pair() -> ActionSpec:
    """A1 (x) I and I (x) A2 on T^4 with A1=[[1,1],[2,1]], A2=[[2,1],[3,2]]."""
    return load_spec(DATA_DIR / "tensor_pair.json")


@dataclass
class Block:
    basis: np.ndarray  # m x m_j, real, conformal for every generator
    exponents: np.ndarray  # length k: lambda_{i,j}

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass
class LyapunovSpectrum:
    k: int
    m: int
    blocks: list
    combination: tuple  # integer coefficients of the generic combination used
    semisimple: bool = True
    # column -> block label, eigenvalues of the combination (for high precision)
    eig_labels: list = field(default_factory=list)
    eig_values: np.ndarray = field(default=None)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def s(self) -> int:
        return len(self.blocks)

    @property
    def exponents(self) -> np.ndarray:
        """k x s matrix of lambda_{i,j}."""
        return np.column_stack([b.exponents for b in self.blocks])

    @property
    def multiplicities(self):
        return [b.dim for b in self.blocks]

    @property
    def basis(self) -> np.ndarray:
        return np.hstack([b.basis for b in self.blocks])

    @property
    def condition(self) -> float:
        return float(np.linalg.cond(self.basis))

    def block_columns(self, j):
        start = sum(b.dim for b in self.blocks[:j])
        return list(range(start, start + self.blocks[j].dim))

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "multiplicities": self.multiplicities,
            "exponents": [[float(x) for x in b.exponents] for b in self.blocks],
            "basis_condition": self.condition,
            "semisimple": self.semisimple,
        }


def _realify(vecs: np.ndarray, vals: np.ndarray, tol: float):
    """Real basis of the span of a conjugation-closed set of eigenvectors.

    Complex eigenvectors contribute (Re x, Im x) after a single overall
    normalisation, which keeps every generator conformal on the pair.
    """
    cols, used = [], set()
    for a in range(vecs.shape[1]):
        if a in used:
            continue
        x = vecs[:, a] / np.linalg.norm(vecs[:, a])
        if abs(vals[a].imag) <= tol:
            # rotate the phase so the vector is real
            idx = np.argmax(np.abs(x))
            x = x * np.exp(-1j * np.angle(x[idx]))
            cols.append(x.real / np.linalg.norm(x.real))
            used.add(a)
        elif vals[a].imag > 0:
            cols.append(x.real)
            cols.append(x.imag)
            used.add(a)
            # partner with the conjugate eigenvalue
            partner = min(
                (b for b in range(vecs.shape[1]) if b not in used and vals[b].imag < 0),
                key=lambda b: abs(vals[b] - np.conj(vals[a])),
                default=None,
            )
            if partner is not None:
                used.add(partner)
    return np.column_stack(cols) if cols else np.zeros((vecs.shape[0], 0))


def _try_decompose(gens, c, tol=1e-9):
    m = gens[0].shape[0]
    C = sum(ci * g for ci, g in zip(c, gens))
    vals, V = np.linalg.eig(C)
    if np.linalg.cond(V) > 1e10:
        return None
    Vi = np.linalg.inv(V)
    diag = []
    for g in gens:
        D = Vi @ g @ V
        off = D - np.diag(np.diag(D))
        if np.max(np.abs(off)) > 1e-7 * max(1.0, np.max(np.abs(D))):
            return None
        diag.append(np.diag(D))
    logs = np.log(np.abs(np.array(diag)))  # k x m
    labels: list = []
    reps: list = []
    for a in range(m):
        for b, r in enumerate(reps):
            if np.allclose(logs[:, a], r, atol=1e-7):
                labels.append(b)
                break
        else:
            reps.append(logs[:, a])
            labels.append(len(reps) - 1)
    blocks = []
    for b, r in enumerate(reps):
        idx = [a for a in range(m) if labels[a] == b]
        basis = _realify(V[:, idx], vals[idx], 1e-9 * max(1.0, np.max(np.abs(vals))))
        if basis.shape[1] != len(idx):
            return None
        exps = logs[:, idx].mean(axis=1)
        exps[np.abs(exps) < 1e-12] = 0.0
        blocks.append(Block(basis, exps))
    W = np.hstack([b.basis for b in blocks])
    if np.linalg.matrix_rank(W) < m:
        return None
    return blocks, labels, vals


def _schur_decompose(gens, c):
    from scipy.linalg import schur

    C = sum(ci * g for ci, g in zip(c, gens))
    vals = np.linalg.eigvals(C)
    scale = max(1.0, float(np.max(np.abs(vals))))
    clusters: list = []
    for v in vals:
        for cl in clusters:
            if abs(cl[0] - v) < 1e-5 * scale:
                cl.append(v)
                break
        else:
            clusters.append([v])

    def subspace(members):
        def pick(z):
            return min(abs(z - w) for w in members) < 1e-5 * scale

        T, Z, sdim = schur(C.astype(complex), output="complex", sort=pick)
        return Z[:, :sdim]

    info = []
    for cl in clusters:
        Q = subspace(cl)
        mods = []
        for g in gens:
            ev = np.linalg.eigvals(Q.conj().T @ g @ Q)
            mods.append(np.log(np.abs(ev)).mean())
        info.append((cl, np.array(mods)))
    groups: list = []
    for cl, mods in info:
        for grp in groups:
            if np.allclose(grp[1], mods, atol=1e-6):
                grp[0].extend(cl)
                break
        else:
            groups.append([list(cl), mods])
    blocks = []
    for members, mods in groups:
        Q = subspace(members)
        U, S, _ = np.linalg.svd(np.hstack([Q.real, Q.imag]))
        basis = U[:, : Q.shape[1]]
        mods = mods.copy()
        mods[np.abs(mods) < 1e-12] = 0.0
        blocks.append(Block(basis, mods))
    return blocks


def common_eigenstructure(spec: ActionSpec, seed: int = 0) -> LyapunovSpectrum:
    """Coarsest joint decomposition of R^m into blocks of equal moduli."""
    gens = spec.float_generators()
    rng = np.random.default_rng(seed)
    attempts = [tuple(range(1, spec.k + 1))]
    attempts += [tuple(int(x) for x in rng.integers(1, 10, size=spec.k)) for _ in range(MAX_ATTEMPTS - 1)]
    for c in attempts:
        got = _try_decompose(gens, c)
        if got is not None:
            blocks, labels, vals = got
            sp = LyapunovSpectrum(spec.k, spec.m, blocks, c, True, labels, vals)
            _check_invariance(spec, sp)
            # integer generators, for high-precision projectors built later
            sp._cache["generators"] = spec.int_generators
            return sp
    # defective case: invariant subspaces from sorted Schur forms
    for c in attempts:
        try:
            blocks = _schur_decompose(gens, c)
        except np.linalg.LinAlgError:
            continue
        if sum(b.dim for b in blocks) == spec.m:
            sp = LyapunovSpectrum(spec.k, spec.m, blocks, c, False)
            try:
                _check_invariance(spec, sp)
            except DegenerateDecomposition:
                continue
            return sp
    raise DegenerateDecomposition("joint block extraction failed after retries")


def _check_invariance(spec, sp, tol=1e-9):
    for g in spec.float_generators():
        for b in sp.blocks:
            B = b.basis
            coef, *_ = np.linalg.lstsq(B, g @ B, rcond=None)
            res = np.linalg.norm(g @ B - B @ coef) / max(1.0, np.linalg.norm(g))
            if res > tol:
                raise DegenerateDecomposition(f"block not invariant (residual {res:.2e})")


def chi(spectrum: LyapunovSpectrum, v) -> np.ndarray:
    """Lyapunov functionals chi_j(v) = sum_i v_i lambda_{i,j}."""
    return np.asarray(v, dtype=float) @ spectrum.exponents


class Tag(str, Enum):
    REGULAR = "Regular"
    FIRST = "FirstTypeSingular"
    SECOND = "SecondTypeSingular"


@dataclass
class DirectionClass:
    tag: Tag
    chi: np.ndarray
    zero: np.ndarray  # boolean mask of chi_j treated as zero
    near_tolerance: bool = False

    def to_json(self):
        return {
            "tag": self.tag.value,
            "chi": [float(x) for x in self.chi],
            "near_tolerance": self.near_tolerance,
        }


def _zero_mask(spectrum, v):
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ZeroVector("direction vector is zero")
    c = chi(spectrum, v)
    lam = np.max(np.abs(spectrum.exponents)) if spectrum.s else 0.0
    tol = ZERO_TOL * np.linalg.norm(v) * lam
    zero = np.abs(c) <= tol
    near = bool(np.any((~zero) & (np.abs(c) <= 1e3 * tol)))
    return c, zero, near


def classify_direction(spectrum: LyapunovSpectrum, v) -> DirectionClass:
    c, zero, near = _zero_mask(spectrum, v)
    if zero.all():
        tag = Tag.SECOND
    elif zero.any():
        tag = Tag.FIRST
    else:
        tag = Tag.REGULAR
    return DirectionClass(tag, c, zero, near)


@dataclass
class Chambers:
    normals: list  # one representative per distinct Lyapunov hyperplane
    functionals: list  # block indices sharing each hyperplane
    everywhere_singular: list  # blocks with chi_j identically zero
    angles: Optional[list] = None  # k = 2: singular-line angles in [0, pi)

    def arcs(self):
        if self.angles is None:
            return None
        if not self.angles:
            return [(0.0, math.pi)]
        a = sorted(self.angles)
        return [(a[i], a[i + 1]) for i in range(len(a) - 1)] + [(a[-1], a[0] + math.pi)]

    def to_json(self):
        out = {
            "normals": [[float(x) for x in n] for n in self.normals],
            "functionals": self.functionals,
            "everywhere_singular": self.everywhere_singular,
        }
        if self.angles is not None:
            out["singular_angles"] = [float(a) for a in self.angles]
            out["arcs"] = [[float(a), float(b)] for a, b in self.arcs()]
        return out


def weyl_chambers(spectrum: LyapunovSpectrum) -> Chambers:
    L = spectrum.exponents  # k x s
    scale = max(1e-300, float(np.max(np.abs(L)))) if L.size else 1.0
    normals, members, zero = [], [], []
    for j in range(spectrum.s):
        n = L[:, j]
        if np.linalg.norm(n) <= ZERO_TOL * scale:
            zero.append(j)
            continue
        u = n / np.linalg.norm(n)
        for a, w in enumerate(normals):
            if min(np.linalg.norm(u - w), np.linalg.norm(u + w)) < 1e-9:
                members[a].append(j)
                break
        else:
            normals.append(u)
            members.append([j])
    angles = None
    if spectrum.k == 2:
        angles = sorted(math.atan2(u[0], -u[1]) % math.pi for u in normals)
    return Chambers(normals, members, zero, angles)


@dataclass
class Splitting:
    J1: list
    J2: list
    J3: list
    W: np.ndarray  # conformal block basis, columns grouped by block
    Winv: np.ndarray
    cols: dict  # part name -> column indices into W
    spectrum: LyapunovSpectrum = field(repr=False, default=None)

    def basis(self, part):
        return self.W[:, self.cols[part]]

    def projector(self, part) -> np.ndarray:
        c = self.cols[part]
        return self.W[:, c] @ self.Winv[c, :]

    @property
    def Ps(self):
        return self.projector("s")

    @property
    def Pu(self):
        return self.projector("u")

    @property
    def Pc(self):
        return self.projector("c")

    @property
    def dims(self):
        return {p: len(c) for p, c in self.cols.items()}

    def norm_constant(self, parts=("s", "u")) -> float:
        """||W||_{2->inf} * sum_part ||W^{-1}_part||_{inf->2}.

        In block coordinates every generator acts conformally, so this bounds
        the max-norm of a correction built from geometric sums of block
        coordinates of max-norm-bounded errors.
        """
        if self.spectrum is not None and not self.spectrum.semisimple:
            return math.inf
        w_row = float(np.max(np.linalg.norm(self.W, axis=1)))
        total = sum(_inf_to_2(self.Winv[self.cols[p], :]) for p in parts if self.cols[p])
        return w_row * total

    @property
    def kappa(self) -> float:
        return self.norm_constant(("s", "u", "c"))

    def to_json(self):
        return {
            "J1": self.J1,
            "J2": self.J2,
            "J3": self.J3,
            "dims": self.dims,
            "splitting_constant": self.kappa,
        }


def _inf_to_2(R: np.ndarray) -> float:
    m = R.shape[1]
    if R.shape[0] == 0:
        return 0.0
    if m > 14:
        return math.sqrt(m) * float(np.linalg.norm(R, 2))
    # convex in s, so the max over the cube sits at a vertex
    signs = np.array(list(product((-1.0, 1.0), repeat=m)))
    return float(np.max(np.linalg.norm(signs @ R.T, axis=1)))


def splitting_for(spectrum: LyapunovSpectrum, v) -> Splitting:
    c, zero, _ = _zero_mask(spectrum, v)
    J1 = [j for j in range(spectrum.s) if not zero[j] and c[j] < 0]
    J2 = [j for j in range(spectrum.s) if not zero[j] and c[j] > 0]
    J3 = [j for j in range(spectrum.s) if zero[j]]
    W = spectrum.basis
    cols = {
        "s": [a for j in J1 for a in spectrum.block_columns(j)],
        "u": [a for j in J2 for a in spectrum.block_columns(j)],
        "c": [a for j in J3 for a in spectrum.block_columns(j)],
    }
    return Splitting(J1, J2, J3, W, np.linalg.inv(W), cols, spectrum)


@dataclass
class GapConstants:
    a: float
    b1: float
    b2: float
    bv: float
    b3: Optional[float] = None

    def to_json(self):
        return {k: (None if v is None else float(v)) for k, v in self.__dict__.items()}


def gap_constants(spectrum: LyapunovSpectrum, v, a: Optional[float] = None) -> GapConstants:
    """Margins b_{v,1} < 0 < b_{v,2} (and b_{v,3} for a centre) for margin a.

    The margin enters as a * sum_i |v_i|, the worst-case drift of the
    exponents by a along each coordinate.
    """
    v = np.asarray(v, dtype=float)
    cls = classify_direction(spectrum, v)
    if cls.tag is Tag.SECOND:
        raise SecondTypeSingular(f"direction {v.tolist()} is second-type singular; no gap")
    c = cls.chi
    live = np.abs(c[~cls.zero])
    l1 = float(np.sum(np.abs(v)))
    if a is None:
        a = float(np.min(live)) / ((3.0 if cls.zero.any() else 2.0) * l1)
    neg = [c[j] + a * l1 for j in range(spectrum.s) if not cls.zero[j] and c[j] < 0]
    pos = [c[j] - a * l1 for j in range(spectrum.s) if not cls.zero[j] and c[j] > 0]
    b1 = max(neg) if neg else -math.inf
    b2 = min(pos) if pos else math.inf
    b3 = None
    if cls.zero.any():
        b3 = max(abs(c[j]) + a * l1 for j in range(spectrum.s) if cls.zero[j])
    return GapConstants(a, b1, b2, min(-b1, b2), b3)


def find_regular_integer_vector(spectrum: LyapunovSpectrum, radius: int = 64):
    L = spectrum.exponents
    if spectrum.s == 0 or np.any(np.all(np.abs(L) <= 1e-12, axis=0)):
        return None
    k = spectrum.k
    for r in range(1, radius + 1):
        shell = [n for n in product(range(-r, r + 1), repeat=k) if max(map(abs, n)) == r]
        shell.sort(key=lambda n: (sum(x * x for x in n), [-x for x in n]))
        for n in shell:
            if classify_direction(spectrum, n).tag is Tag.REGULAR:
                return tuple(n)
    return None


# --- linear shadowing criterion for commuting upper-triangular matrices -------


def _check_triangular_commuting(mats, tol=1e-9):
    mats = [np.asarray(a, dtype=complex) for a in mats]
    scale = max(1.0, max(np.max(np.abs(a)) for a in mats))
    for a in mats:
        if np.max(np.abs(np.tril(a, -1))) > tol * scale:
            raise InvalidInput("matrices must be upper triangular")
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if np.max(np.abs(mats[i] @ mats[j] - mats[j] @ mats[i])) > tol * scale**2:
                raise NonCommuting(i, j)
    return mats


def criterion_diagonal(mats, tol=1e-9) -> bool:
    """Every diagonal index j has some generator with |(A_i)_jj| != 1."""
    mats = _check_triangular_commuting(mats)
    d = np.abs(np.array([np.diag(a) for a in mats]))
    return bool(np.all(np.any(np.abs(d - 1.0) > tol, axis=0)))


def criterion_no_unit_joint_eigenvector(mats, tol=1e-9) -> bool:
    """No nonzero v with A_i v = mu_i v and |mu_i| = 1 for all i (brute force)."""
    mats = _check_triangular_commuting(mats)
    m = mats[0].shape[0]
    candidates = {tuple(np.round([a[j, j] for a in mats], 9)) for j in range(m)}
    for mu in candidates:
        if not all(abs(abs(x) - 1.0) <= tol for x in mu):
            continue
        stacked = np.vstack([a - x * np.eye(m) for a, x in zip(mats, mu)])
        sv = np.linalg.svd(stacked, compute_uv=False)
        if sv[-1] <= 1e-7 * max(1.0, sv[0]):
            return False
    return True


def lipschitz_shadowing_criterion(mats) -> bool:
    return criterion_diagonal(mats)


def triangularize(mats, seed: int = 0):
    """Common unitary triangularisation of commuting matrices via one Schur form."""
    from scipy.linalg import schur

    mats = [np.asarray(a, dtype=complex) for a in mats]
    rng = np.random.default_rng(seed)
    for _ in range(MAX_ATTEMPTS):
        c = rng.normal(size=len(mats)) + 1j * rng.normal(size=len(mats))
        C = sum(ci * a for ci, a in zip(c, mats))
        _, Z = schur(C, output="complex")
        out = [Z.conj().T @ a @ Z for a in mats]
        if all(np.max(np.abs(np.tril(t, -1))) < 1e-9 * max(1.0, np.max(np.abs(t))) for t in out):
            for t in out:
                t[np.tril_indices_from(t, -1)] = 0
            return out
    raise DegenerateDecomposition("could not triangularise simultaneously")


# --- angle sweep for k = 2 ------------------------------------------------------


@dataclass
class SingularLine:
    angle: float
    tag: Tag
    functionals: list

    def to_json(self):
        return {
            "angle_rad": self.angle,
            "angle_deg": math.degrees(self.angle),
            "tag": self.tag.value,
            "functionals": self.functionals,
        }


@dataclass
class Sweep:
    buckets: int
    bucket_tags: list  # Tag at each bucket centre
    lines: list  # SingularLine, sorted by angle

    def counts(self):
        out = {t.value: 0 for t in Tag}
        for t in self.bucket_tags:
            out[t.value] += 1
        return out

    def summary(self):
        """Expansive / shadowing / Anosov guarantees per class of line."""
        verdict = {
            Tag.REGULAR: {"expansive": True, "shadowing": True, "anosov": True, "quasi_shadowing": True},
            Tag.FIRST: {"expansive": None, "shadowing": None, "anosov": None, "quasi_shadowing": True},
            Tag.SECOND: {"expansive": None, "shadowing": None, "anosov": None, "quasi_shadowing": None},
        }
        return {t.value: {"buckets": c, "guarantees": verdict[Tag(t.value)]} for t, c in
                ((Tag(n), c) for n, c in self.counts().items())}

    def to_json(self):
        return {
            "buckets": self.buckets,
            "counts": self.counts(),
            "singular_lines": [l.to_json() for l in self.lines],
            "summary": self.summary(),
        }


def angle_sweep(spectrum: LyapunovSpectrum, buckets: int = 3600, tol: float = 1e-12) -> Sweep:
    """Classify the lines L_theta, theta in [0, pi), at bucket centres and locate
    every singular line by a sign change of chi_j refined with bisection."""
    if spectrum.k != 2:
        raise InvalidInput("angle sweep needs k = 2")
    L = spectrum.exponents
    theta = (np.arange(buckets) + 0.5) * math.pi / buckets
    V = np.column_stack([np.cos(theta), np.sin(theta)])
    tags = [classify_direction(spectrum, v).tag for v in V]
    C = V @ L
    scale = float(np.max(np.abs(L))) if L.size else 0.0
    live = [j for j in range(spectrum.s) if np.linalg.norm(L[:, j]) > ZERO_TOL * scale]

    def f(j, t):
        return math.cos(t) * L[0, j] + math.sin(t) * L[1, j]

    roots = []
    for j in live:
        sgn = np.sign(C[:, j])
        brackets = [(theta[b], theta[b + 1]) for b in range(buckets - 1) if sgn[b] != sgn[b + 1]]
        # L_theta and L_{theta+pi} coincide, with chi changing sign
        if sgn[-1] != -sgn[0]:
            brackets.append((theta[-1], theta[0] + math.pi))
        for lo, hi in brackets:
            flo = f(j, lo)
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                fm = f(j, mid)
                if fm == 0.0:
                    lo = hi = mid
                    break
                if (fm > 0) == (flo > 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            roots.append((0.5 * (lo + hi)) % math.pi)
    roots.sort()
    merged: list = []
    for r in roots:
        if merged and min(abs(r - merged[-1]), math.pi - abs(r - merged[-1])) < 1e-7:
            continue
        merged.append(r)
    lines = []
    for r in merged:
        v = np.array([math.cos(r), math.sin(r)])
        c = chi(spectrum, v)
        # a bisected root sits within 1e-12 rad of the true line: use a matching tolerance
        zero = np.abs(c) <= 1e-9 * scale
        tag = Tag.SECOND if zero.all() else Tag.FIRST
        lines.append(SingularLine(float(r), tag, [int(j) for j in np.flatnonzero(zero)]))
    return Sweep(buckets, tags, lines)
