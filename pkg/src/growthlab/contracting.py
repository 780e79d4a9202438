"""Projections, contracting axes, admissible paths and deep points.

Sets are finite windows of orbit points in an explored space.  An axis
``g Ax(h)`` is materialized as ``{g p^j o : |j| <= J}`` where ``p`` is the
primitive root of ``h`` (conjugated back when ``h`` is not cyclically
reduced), so the cyclic group generated by ``p`` stands in for E(h).
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import words as W
from .errors import (InjectivityFailed, NoTripleFound, NotAdmissible, NotContracting,
                     Unexplored, WindowTooSmall)
from .growth import growth_rate
from .spaces import OrbitSpace, PointSet

PAIR_LIMIT = 10_000


# -- axes -------------------------------------------------------------------

def axis_generator(h, space: OrbitSpace) -> tuple:
    """Canonical word of the primitive element whose powers span Ax(h)."""
    root, _, conj = W.cyclic_reduce_and_root(W.as_word(h))
    p = W.canonical_form(conj + root + W.inverse(conj), space.presentation)
    q = W.canonical_form(W.inverse(p), space.presentation)
    return min(p, q, key=W.shortlex_key)


def coset_representative(space: OrbitSpace, g, p: tuple, span: int | None = None) -> tuple:
    """ShortLex-least word among g p^j over a window of exponents."""
    pres = space.presentation
    g = W.canonical_form(W.as_word(g), pres)
    m = span if span is not None else 2 * len(g) + 2
    best, best_key = g, W.shortlex_key(g)
    free = pres.strategy == W.FREE
    for step in (p, W.inverse(p)):
        c = g
        for _ in range(m):
            c = W.join_reduced(c, step) if free else W.canonical_form(c + step, pres)
            if len(c) <= len(best):
                k = W.shortlex_key(c)
                if k < best_key:
                    best, best_key = c, k
    return best


@dataclass
class Axis:
    """A translate g Ax(h) with its window of orbit points ordered by exponent."""

    h: tuple
    translate: tuple
    J: int
    points: PointSet
    generator: tuple
    contraction_constant: int | None = None

    @property
    def key(self):
        return (self.translate, self.generator)

    @property
    def label(self) -> str:
        return f"{W.format_word(self.translate) or 'e'}.Ax({W.format_word(self.generator)})"

    @property
    def ids(self):
        return self.points.ids

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        return isinstance(other, Axis) and self.key == other.key

    def to_json(self) -> dict:
        return {"h": W.format_word(self.h), "translate": W.format_word(self.translate),
                "generator": W.format_word(self.generator), "J": self.J,
                "contraction_constant": self.contraction_constant}


def _orbit_words(space: OrbitSpace, t: tuple, p: tuple, J: int) -> list[tuple]:
    """Words t p^j for j = -J..J, built by one multiplication per step."""
    pres = space.presentation
    if pres.strategy != W.FREE:
        return [t + W.power(p, j) for j in range(-J, J + 1)]
    t = W.free_reduce(t)
    up, down = [t], [t]
    q = W.inverse(p)
    for _ in range(J):
        up.append(W.join_reduced(up[-1], p))
        down.append(W.join_reduced(down[-1], q))
    return down[:0:-1] + up


def make_axis(space: OrbitSpace, h, g=(), J: int | None = None, normalize: bool = True) -> Axis:
    p = axis_generator(h, space)
    g = W.as_word(g)
    t = coset_representative(space, g, p) if normalize else W.canonical_form(g, space.presentation)
    if J is None:
        J = math.ceil((len(t) + max(space.explored_radius, 2)) / len(p)) + 1
    pts = tuple(space.intern(w) for w in _orbit_words(space, t, p, J))
    return Axis(W.as_word(h), t, J, PointSet(pts, f"{W.format_word(t) or 'e'}.Ax"), p)


def axis_family(space: OrbitSpace, h, radius: int, J: int | None = None) -> list[Axis]:
    """Distinct translates g Ax(h) for g in the ball of the given radius."""
    seen = {}
    p = axis_generator(h, space)
    for g in space.ball(radius):
        t = coset_representative(space, space.word(g), p)
        if t not in seen:
            seen[t] = make_axis(space, h, t, J, normalize=False)
    return sorted(seen.values(), key=lambda a: W.shortlex_key(a.translate))


def _ids(S) -> list[int]:
    if isinstance(S, Axis):
        return list(S.points.ids)
    if isinstance(S, PointSet):
        return list(S.ids)
    return list(S)


# -- projections ------------------------------------------------------------

def diameter(space: OrbitSpace, ids) -> int:
    ids = sorted(set(_ids(ids)))
    if len(ids) < 2:
        return 0
    return int(space.distance_matrix(ids, ids).max())


def distance_to_set(space: OrbitSpace, x: int, S) -> int:
    return int(space.distance_matrix([x], _ids(S)).min())


def projection_indices(space: OrbitSpace, S, B) -> tuple[np.ndarray, np.ndarray]:
    """Boolean mask over points of S that are closest to some point of B, and d(B, S)."""
    s, b = _ids(S), _ids(B)
    D = space.distance_matrix(b, s)
    mins = D.min(axis=1)
    return (D == mins[:, None]).any(axis=0), mins


def project(space: OrbitSpace, S, x: int) -> PointSet:
    """All points of S at minimal distance from x."""
    s = _ids(S)
    mask, _ = projection_indices(space, s, [x])
    return PointSet(tuple(i for i, m in zip(s, mask) if m))


def projection_set(space: OrbitSpace, S, B) -> list[int]:
    s = _ids(S)
    mask, _ = projection_indices(space, s, B)
    return [i for i, m in zip(s, mask) if m]


def proj_diameter(space: OrbitSpace, S, B) -> int:
    """d^pi_S(B): diameter of the union of projections of points of B onto S."""
    if not _ids(B):
        return 0
    return diameter(space, projection_set(space, S, B))


# -- contraction ------------------------------------------------------------

def _sample_pairs(space: OrbitSpace, radius: int, trials: int, seed: int):
    pts = list(space.ball(radius))
    n_pairs = len(pts) * (len(pts) - 1) // 2
    if n_pairs <= PAIR_LIMIT:
        return list(itertools.combinations(pts, 2)), True
    rng = random.Random(seed)
    out = []
    for _ in range(trials):
        x, y = rng.sample(pts, 2)
        out.append((min(x, y), max(x, y)))
    return out, False


@dataclass
class ContractionReport:
    constant: int
    exhaustive: bool
    samples: int
    profile: dict  # distance to S -> worst projection diameter


def contraction_profile(space: OrbitSpace, S, sample_radius: int, trials: int = 2000,
                        seed: int = 0):
    """Worst projection diameter of sampled geodesics, grouped by distance to S."""
    if sample_radius > space.explored_radius:
        raise WindowTooSmall("sample radius exceeds the explored radius")
    s = _ids(S)
    pairs, exhaustive = _sample_pairs(space, sample_radius, trials, seed)
    worst: dict[int, int] = {}
    for x, y in pairs:
        alpha = space.geodesic(x, y)
        mask, mins = projection_indices(space, s, alpha)
        if isinstance(S, Axis) and (mask[0] or mask[-1]):
            raise WindowTooSmall(f"projection reaches the end of {S.label}")
        d = int(mins.min())
        diam = diameter(space, [i for i, m in zip(s, mask) if m])
        worst[d] = max(worst.get(d, 0), diam)
    return worst, exhaustive, len(pairs)


def contraction_constant(space: OrbitSpace, S, sample_radius: int, trials: int = 2000,
                         seed: int = 0, report: bool = False):
    """Smallest C such that sampled geodesics at distance >= C from S project
    to sets of diameter <= C.

    Sampling is exhaustive over pairs of the ball of ``sample_radius`` when
    there are at most 10^4 pairs, seeded random otherwise.  Raises
    NotContracting when the smallest valid C exceeds ``sample_radius // 2``,
    since then the window cannot tell a constant from linear growth.
    """
    worst, exhaustive, n = contraction_profile(space, S, sample_radius, trials, seed)
    for C in range(0, sample_radius // 2 + 1):
        if all(v <= C for d, v in worst.items() if d >= C):
            if report:
                return ContractionReport(C, exhaustive, n, dict(sorted(worst.items())))
            return C
    raise NotContracting(
        f"no constant <= {sample_radius // 2} within radius {sample_radius}; profile {dict(sorted(worst.items()))}")


def projection_property_checks(space: OrbitSpace, S, C: int, sample_radius: int,
                               trials: int = 500, seed: int = 0, K: int | None = None) -> dict:
    """Empirical checks of the standard consequences of C-contraction.

    * geodesics with both endpoints on S stay in the 3C-neighbourhood of S;
    * d^pi_S(gamma) <= length(gamma) + C1, with C1 measured;
    * if d^pi_S(endpoints) > K > 2C then the part of the geodesic inside the
      C-neighbourhood of S has diameter >= K / 2.
    """
    s = _ids(S)
    K = 2 * C + 1 if K is None else K
    # geodesics with endpoints on S
    on_axis = s[1:-1]
    worst_dev = 0
    for x, y in itertools.combinations(on_axis, 2):
        gam = space.geodesic(x, y)
        worst_dev = max(worst_dev, int(space.distance_matrix(gam, s).min(axis=1).max()))
    pairs, _ = _sample_pairs(space, sample_radius, trials, seed)
    c1 = -math.inf
    fellow_ok, fellow_checked = True, 0
    for x, y in pairs:
        gam = space.geodesic(x, y)
        c1 = max(c1, proj_diameter(space, s, gam) - (len(gam) - 1))
        if proj_diameter(space, s, [x, y]) > K:
            fellow_checked += 1
            near = [v for v, d in zip(gam, space.distance_matrix(gam, s).min(axis=1)) if d <= C]
            if diameter(space, near) < K / 2:
                fellow_ok = False
    return {
        "quasi_convex": worst_dev <= 3 * C,
        "max_deviation": worst_dev,
        "projection_length_constant": int(c1),
        "fellow_travel": fellow_ok,
        "fellow_travel_checked": fellow_checked,
        "K": K,
    }


# -- bounded intersection and projection -----------------------------------

def neighborhood(space: OrbitSpace, S, c: int) -> set[int]:
    if c > space.explored_radius:
        raise Unexplored("neighbourhood radius exceeds the explored radius")
    ball = [space.word(u) for u in space.ball(c)]
    out = set()
    for x in _ids(S):
        wx = space.word(x)
        for u in ball:
            out.add(space.intern(wx + u))
    return out


def bounded_intersection_profile(space: OrbitSpace, S1, S2, c: int) -> int:
    """Diameter of N_c(S1) and N_c(S2) intersected (0 if empty)."""
    common = neighborhood(space, S1, c) & neighborhood(space, S2, c)
    return diameter(space, common)


def bounded_projection_check(space: OrbitSpace, translates: Sequence) -> tuple[int, dict]:
    """D = max over ordered pairs of distinct sets of d^pi_A(B), with the table."""
    keys = [t.key if isinstance(t, Axis) else tuple(_ids(t)) for t in translates]
    if len(set(keys)) != len(keys):
        raise ValueError("translates must be pairwise distinct")
    table = {}
    for i, A in enumerate(translates):
        for j, B in enumerate(translates):
            if i != j:
                table[(i, j)] = proj_diameter(space, A, B)
    return max(table.values(), default=0), table


def independence_test(space: OrbitSpace, h, f, window: int = 1, c: int = 1,
                      bound: int | None = None, J: int | None = None) -> bool:
    """Whether the mixed family {g Ax(h), g Ax(f)} has bounded intersection.

    Every pair of distinct translates with g in the ball of radius ``window``
    must have c-neighbourhood intersections of diameter at most ``bound``,
    by default 2c + 2 * max(|root h|, |root f|) + 2.  Axes are cut long
    enough that a coarse overlap would exceed the bound.
    """
    ph, pf = axis_generator(h, space), axis_generator(f, space)
    if bound is None:
        bound = 2 * c + 2 * max(len(ph), len(pf)) + 2
    if J is None:
        J = math.ceil((2 * bound + 2 * window) / min(len(ph), len(pf))) + 1
    if (2 * J + 1) * min(len(ph), len(pf)) <= 2 * bound:
        raise WindowTooSmall("axis windows too short to detect unbounded overlap")
    # members are indexed by (which element, translate): Ax(h) and Ax(f) are
    # different members even when they coincide as sets
    fam: dict = {}
    for g in space.ball(window):
        for kind, e in enumerate((h, f)):
            a = make_axis(space, e, space.word(g), J)
            fam.setdefault((kind, a.key), a)
    members = list(fam.values())
    for A, B in itertools.combinations(members, 2):
        if bounded_intersection_profile(space, A, B, c) > bound:
            return False
    return True


# -- admissible paths -------------------------------------------------------

@dataclass
class AdmissiblePath:
    """A piecewise geodesic path.

    ``pieces`` are consecutive geodesics (lists of ids sharing endpoints);
    ``marked`` indexes the pieces p_i travelling along contracting sets and
    ``sets`` holds the associated set of each marked piece.
    """

    space: OrbitSpace
    pieces: list
    marked: list = field(default_factory=list)
    sets: list = field(default_factory=list)
    K: float = 0
    theta: float = 0

    @property
    def vertices(self) -> list[int]:
        out: list[int] = []
        for piece in self.pieces:
            if not piece:
                continue
            out.extend(piece if not out else piece[1:])
        return out

    @property
    def start(self):
        v = self.vertices
        return v[0] if v else None

    @property
    def end(self):
        v = self.vertices
        return v[-1] if v else None

    @property
    def saturation(self):
        return list(self.sets)

    def piece_span(self, i: int) -> tuple[int, int]:
        """Vertex index range [a, b] of piece i inside ``vertices``."""
        a = 0
        for k in range(i):
            if self.pieces[k]:
                a += len(self.pieces[k]) - 1
        return a, a + max(len(self.pieces[i]) - 1, 0)

    def to_json(self) -> dict:
        return {"pieces": [[W.format_word(self.space.word(v)) for v in p] for p in self.pieces],
                "marked": list(self.marked), "sets": [s.to_json() for s in self.sets],
                "K": self.K, "theta": self.theta}


def check_admissible(path: AdmissiblePath) -> list:
    """Every violated (LL) or (BP) instance; an empty list means admissible."""
    sp = path.space
    out = []
    n = len(path.marked)
    g_start, g_end = path.start, path.end
    for i, (k, S) in enumerate(zip(path.marked, path.sets)):
        piece = path.pieces[k]
        length = len(piece) - 1
        touches = piece[0] == g_start or piece[-1] == g_end
        if not length > path.K and not touches:
            out.append(("LL", i, length))
        nxt = path.pieces[path.marked[i + 1]][0] if i + 1 < n else g_end
        prv = path.pieces[path.marked[i - 1]][-1] if i > 0 else g_start
        after = proj_diameter(sp, S, [piece[-1], nxt])
        before = proj_diameter(sp, S, [prv, piece[0]])
        if after > path.theta:
            out.append(("BP", i, "exit", after))
        if before > path.theta:
            out.append(("BP", i, "entry", before))
    return out


def verify_bp_bound(path: AdmissiblePath) -> int:
    """max over marked pieces of d^pi of the path before and after the piece."""
    bad = check_admissible(path)
    if bad:
        raise NotAdmissible(f"{len(bad)} violations", bad)
    verts = path.vertices
    best = 0
    for k, S in zip(path.marked, path.sets):
        a, b = path.piece_span(k)
        best = max(best, proj_diameter(path.space, S, verts[: a + 1]),
                   proj_diameter(path.space, S, verts[b:]))
    return best


def measured_K(path: AdmissiblePath) -> int:
    """Largest K for which (LL) holds: shortest marked piece length minus one
    (infinite when nothing is marked, since (LL) is then vacuous)."""
    lens = [len(path.pieces[k]) - 1 for k in path.marked]
    return min(lens) - 1 if lens else math.inf


def quasi_geodesic_constants(space: OrbitSpace, vertices: Sequence[int]) -> tuple[float, int]:
    """Measured (lambda, c) with path length <= lambda d + c between vertices.

    lambda is the worst ratio len / d over pairs at distance >= 1 and c the
    worst excess len - d.
    """
    v = list(vertices)
    if len(v) < 2:
        return 1.0, 0
    D = space.distance_matrix(v, v)
    lam, c = 1.0, 0
    for i in range(len(v)):
        for j in range(i + 1, len(v)):
            ln = j - i
            d = int(D[i, j])
            if d:
                lam = max(lam, ln / d)
            c = max(c, ln - d)
    return lam, c


# -- deep points ------------------------------------------------------------

@dataclass(frozen=True)
class DeepPointParams:
    eps: int
    M: float

    def __post_init__(self):
        if self.eps < 0 or self.M <= 0:
            raise ValueError("need eps >= 0 and M > 0")


@dataclass
class DeepSegment:
    axis: Axis
    start: int
    length: int


def translates_near(space: OrbitSpace, h, path: Sequence[int], eps: int) -> list[Axis]:
    """Translates (x u) Ax(h) with x on the path and |u| <= eps.

    Any translate meeting the eps-neighbourhood of the path is of this form.
    """
    p = axis_generator(h, space)
    ball = [space.word(u) for u in space.ball(eps)]
    reach = max((space.length(x) for x in path), default=0) + len(path) + eps
    J = math.ceil(reach / len(p)) + 1
    fam = {}
    for x in path:
        wx = space.word(x)
        for u in ball:
            t = coset_representative(space, wx + u, p)
            if t not in fam:
                fam[t] = make_axis(space, h, t, J, normalize=False)
    return list(fam.values())


def classify_deep_points(space: OrbitSpace, path: Sequence[int], system: Iterable,
                         params: DeepPointParams) -> tuple[list[DeepSegment], bool]:
    """Maximal subsegments of length >= 2M inside N_eps(S), for S in the system.

    Returns the segments and whether the geodesic is transitional (no segment).
    """
    path = list(path)
    found = []
    if len(path) < 2:
        return found, True
    for S in system:
        near = space.distance_matrix(path, _ids(S)).min(axis=1) <= params.eps
        i = 0
        while i < len(path):
            if not near[i]:
                i += 1
                continue
            j = i
            while j + 1 < len(path) and near[j + 1]:
                j += 1
            if j - i >= 2 * params.M:
                found.append(DeepSegment(S, i, j - i))
            i = j + 1
    found.sort(key=lambda s: (-s.length, s.start, W.shortlex_key(s.axis.translate)))
    return found, not found


# -- extension lemma and free semigroups ------------------------------------

def geodesic_projection_diameter(space: OrbitSpace, axis: Axis, g) -> int:
    """d^pi_{Ax}([o, g o]) for a word or element g."""
    gid = space.intern(W.as_word(g)) if not isinstance(g, (int, np.integer)) else int(g)
    return proj_diameter(space, axis, space.geodesic(0, gid))


def _roots_distinct(space, words) -> bool:
    gens = [axis_generator(w, space) for w in words]
    return len(set(gens)) == len(gens)


def find_extension_triple(space: OrbitSpace, candidates: Sequence, test_radius: int,
                          pairs: Sequence | None = None) -> tuple[tuple, int]:
    """Triple F of candidates minimizing the worst-case tau.

    tau(F) = max over pairs (g, h) in the ball of min over f in F of
    max(d^pi_{Ax f}([o, g o]), d^pi_{Ax f}([o, h o])).  Triples must have three
    distinct axes (different primitive roots up to inversion).
    """
    cands = [W.as_word(c) for c in candidates]
    pts = list(space.ball(test_radius))
    axes = [make_axis(space, f, (), math.ceil((2 * test_radius + 2) / max(1, len(axis_generator(f, space)))) + 1)
            for f in cands]
    T = np.array([[proj_diameter(space, ax, space.geodesic(0, g)) for g in pts] for ax in axes])
    best = None
    for tri in itertools.combinations(range(len(cands)), 3):
        if not _roots_distinct(space, [cands[i] for i in tri]):
            continue
        if pairs is None:
            t = T[list(tri)]
            worst = int(np.maximum(t[:, :, None], t[:, None, :]).min(axis=0).max())
        else:
            worst = max(min(max(T[i, pts.index(a)], T[i, pts.index(b)]) for i in tri)
                        for a, b in pairs)
        if best is None or worst < best[1]:
            best = (tuple(cands[i] for i in tri), worst)
    if best is None:
        raise NoTripleFound("no three candidates with distinct axes")
    return best


def _tau_of(space: OrbitSpace, f, g, cache: dict) -> int:
    key = (f, g)
    if key not in cache:
        J = math.ceil((2 * len(g) + 2) / len(axis_generator(f, space))) + 1
        cache[key] = geodesic_projection_diameter(space, make_axis(space, f, (), J), g)
    return cache[key]


def choose_connector(space: OrbitSpace, F: Sequence, a, b, cache: dict | None = None) -> tuple:
    """Connector between letters a and b: the f minimizing
    max(d^pi_{Ax f}([o, a^-1 o]), d^pi_{Ax f}([o, b o])), ties by order in F."""
    cache = {} if cache is None else cache
    a_inv = W.inverse(W.as_word(a))
    return min(F, key=lambda f: max(_tau_of(space, f, a_inv, cache), _tau_of(space, f, W.as_word(b), cache)))


def extend_word(space: OrbitSpace, letters: Sequence, F: Sequence, theta: float | None = None,
                K: float | None = None, connector=None) -> tuple[tuple, AdmissiblePath]:
    """Phi(a_1 ... a_n) = a_1 f_1 a_2 ... f_{n-1} a_n with its admissible path.

    The connectors are the marked pieces, each associated with its translated
    axis.  ``connector`` fixes one f for every junction; otherwise f_i is
    chosen per pair by ``choose_connector``.  K defaults to the shortest
    connector length minus one.
    """
    letters = [W.as_word(a) for a in letters]
    F = [W.as_word(f) for f in F]
    cache: dict = {}
    pieces, marked, sets = [], [], []
    prefix: tuple = ()
    cur = 0
    conns = []
    for i, a in enumerate(letters):
        if i:
            f = W.as_word(connector) if connector is not None else choose_connector(space, F, letters[i - 1], a, cache)
            conns.append(f)
            nxt = space.intern(prefix + f)
            piece = space.geodesic(cur, nxt)
            marked.append(len(pieces))
            J = math.ceil((len(prefix) + 2 * len(f) + 2) / len(axis_generator(f, space))) + 2
            sets.append(make_axis(space, f, prefix, J))
            pieces.append(piece)
            prefix, cur = prefix + f, nxt
        nxt = space.intern(prefix + a)
        pieces.append(space.geodesic(cur, nxt))
        prefix, cur = prefix + a, nxt
    if K is None:
        K = min((len(space.word(space.intern(f))) for f in conns), default=1) - 1
    element = W.canonical_form(prefix, space.presentation)
    path = AdmissiblePath(space, pieces, marked, sets, K, 0 if theta is None else theta)
    if theta is None:
        path.theta = _bp_max(path)
    return element, path


def _bp_max(path: AdmissiblePath) -> int:
    """The smallest theta for which (BP) holds."""
    best = 0
    for i, (k, S) in enumerate(zip(path.marked, path.sets)):
        piece = path.pieces[k]
        nxt = path.pieces[path.marked[i + 1]][0] if i + 1 < len(path.marked) else path.end
        prv = path.pieces[path.marked[i - 1]][-1] if i > 0 else path.start
        best = max(best, proj_diameter(path.space, S, [piece[-1], nxt]),
                   proj_diameter(path.space, S, [prv, piece[0]]))
    return best


@dataclass
class SemigroupTree:
    alphabet: list
    f: tuple
    depth: int
    elements: dict          # branch (tuple of letter indices) -> canonical word
    paths: dict             # branch -> AdmissiblePath
    injective: bool
    collision: tuple | None = None
    report: object = None

    def words(self) -> list[tuple]:
        return [self.elements[b] for b in sorted(self.elements, key=lambda b: (len(b), b))]

    def ball_counts(self) -> list[int]:
        """#(Gamma o within distance r) for r up to the longest element."""
        lens = sorted(len(w) for w in self.elements.values())
        top = lens[-1] if lens else 0
        return [sum(1 for x in lens if x <= r) for r in range(top + 1)]


def build_semigroup_tree(space: OrbitSpace, alphabet: Sequence, f, depth: int,
                         K: float | None = None, theta: float | None = None,
                         strict: bool = True, with_paths: bool = True) -> SemigroupTree:
    """All Phi(a_{i1} ... a_{id}) with d <= depth and one connector f.

    Injective when all canonical forms are distinct; a collision raises
    InjectivityFailed (or is recorded when ``strict`` is false).
    """
    letters = [W.as_word(a) for a in alphabet]
    f = W.as_word(f)
    elements = {(): ()}
    paths = {}
    seen = {(): ()}
    collision = None
    for d in range(1, depth + 1):
        for branch in itertools.product(range(len(letters)), repeat=d):
            word: tuple = ()
            for i, b in enumerate(branch):
                word = word + (f if i else ()) + letters[b]
            c = W.canonical_form(word, space.presentation)
            if c in seen and collision is None:
                collision = (seen[c], branch)
                if strict:
                    raise InjectivityFailed(
                        f"branches {seen[c]} and {branch} give the same element "
                        f"{W.format_word(c)}", seen[c], branch)
            seen.setdefault(c, branch)
            elements[branch] = c
            if with_paths:
                _, paths[branch] = extend_word(space, [letters[b] for b in branch], [f], theta, K, connector=f)
    tree = SemigroupTree(letters, f, depth, elements, paths, collision is None, collision)
    counts = tree.ball_counts()
    if len(counts) >= 4:
        tree.report = growth_rate(counts, "tail-slope")
    return tree


def letter_taus(space: OrbitSpace, F: Sequence, letters: Sequence) -> dict:
    """For each f: max(d^pi_{Ax f}([o, a^-1 o]), d^pi_{Ax f}([o, a o])) per letter."""
    cache: dict = {}
    out = {}
    for f in F:
        f = W.as_word(f)
        out[f] = [max(_tau_of(space, f, W.inverse(a), cache), _tau_of(space, f, a, cache))
                  for a in (W.as_word(x) for x in letters)]
    return out


def choose_alphabet(space: OrbitSpace, F: Sequence, n: int, width: int, C: int,
                    tau: int, size: int | None = None) -> tuple[list, tuple]:
    """Separated letters from the annulus A(o, n, width) sharing one connector.

    Returns (letters, f): the C-separated net of the annulus, filtered to
    letters a with both [o, a o] and [o, a^-1 o] projecting by at most tau to
    Ax(f), for the f in F keeping the most letters.
    """
    from .growth import annulus, separated_net
    net = separated_net(space, annulus(space, n, width).ids, C)
    words = [space.word(i) for i in net]
    taus = letter_taus(space, F, words)
    best = None
    for f in F:
        f = W.as_word(f)
        keep = [w for w, t in zip(words, taus[f]) if t <= tau]
        if best is None or len(keep) > len(best[0]):
            best = (keep, f)
    letters, f = best
    if size is not None:
        letters = letters[:size]
    return letters, f
