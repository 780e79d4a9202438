"""Projection tables, interval sets, projection complexes and quasi-trees of spaces.

A window is a finite list of distinct axis translates.  For each ordered pair
(S, U) the projection of U onto S is stored as the range of exponents of the
points of S hit, which is all the triple values d^pi_S(U, V) need.
"""

from __future__ import annotations

import functools
import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np

from . import words as W
from .contracting import (AdmissiblePath, Axis, _bp_max, axis_family,
                          measured_K, projection_indices)
from .errors import AxiomViolation, MissedAxis, OrderInconsistent, WindowTooSmall
from .spaces import OrbitSpace

PC2_EXHAUSTIVE_LIMIT = 30


def axis_window(space: OrbitSpace, h, min_count: int, max_radius: int | None = None,
                J: int | None = None) -> list[Axis]:
    """The smallest ball of translates g Ax(h) holding at least ``min_count`` axes."""
    top = space.explored_radius if max_radius is None else max_radius
    for r in range(top + 1):
        fam = axis_family(space, h, r, J)
        if len(fam) >= min_count:
            return fam
    raise WindowTooSmall(f"only {len(fam)} translates within radius {top}")


@dataclass
class ProjectionTable:
    space: OrbitSpace
    window: list
    values: np.ndarray          # values[S, U, V] = d^pi_S(U, V); -1 where undefined
    pc0: np.ndarray             # pc0[S, U] = diam pi_S(U)
    proj_lo: np.ndarray         # exponent range of pi_S(U) inside S's window
    proj_hi: np.ndarray
    theta: int
    census: dict = field(default_factory=dict)
    pc2_exhaustive: bool = True

    def index(self, A) -> int:
        if isinstance(A, (int, np.integer)):
            return int(A)
        return self._keys[A.key]

    @functools.cached_property
    def _keys(self):
        return {a.key: i for i, a in enumerate(self.window)}

    def value(self, S, U, V) -> int:
        return int(self.values[self.index(S), self.index(U), self.index(V)])

    def projection_points(self, S, U) -> list[int]:
        s, u = self.index(S), self.index(U)
        ax = self.window[s]
        return list(ax.ids[self.proj_lo[s, u]: self.proj_hi[s, u] + 1])

    def to_csv(self) -> str:
        lines = ["S,U,V,value"]
        n = len(self.window)
        for s in range(n):
            for u in range(n):
                for v in range(n):
                    if len({s, u, v}) == 3:
                        lines.append(f"{self.window[s].label},{self.window[u].label},"
                                     f"{self.window[v].label},{int(self.values[s, u, v])}")
        return "\n".join(lines) + "\n"


def _offset_lengths(space: OrbitSpace, p: tuple, top: int) -> np.ndarray:
    """|p^k| for k = 0..top (distance between axis points k steps apart)."""
    return np.array([len(W.canonical_form(W.power(p, k), space.presentation))
                     for k in range(top + 1)], dtype=np.int64)


def build_projection_table(space: OrbitSpace, window: Sequence[Axis], seed: int = 0,
                           pc2_samples: int = 20000) -> ProjectionTable:
    """All d^pi_S(U, V) over the window with PC0 to PC4 validated.

    theta is the largest PC0 quantity diam pi_S(U).  PC1 holds by
    construction; PC2 is checked exhaustively for at most 30 axes and on a
    seeded sample above; PC3 is checked against theta for every distinct
    triple; PC4 is reported as the census of S with d^pi_S(U, V) > theta.
    """
    window = list(window)
    n = len(window)
    keys = [a.key for a in window]
    if len(set(keys)) != n:
        raise AxiomViolation("window contains a repeated axis", "PC0", None)
    lo = np.zeros((n, n), dtype=np.int64)
    hi = np.zeros((n, n), dtype=np.int64)
    for s, S in enumerate(window):
        for u, U in enumerate(window):
            if s == u:
                continue
            mask, _ = projection_indices(space, S, U)
            idx = np.flatnonzero(mask)
            if idx[0] == 0 or idx[-1] == len(S.ids) - 1:
                raise WindowTooSmall(f"projection of {U.label} reaches the end of {S.label}")
            lo[s, u], hi[s, u] = idx[0], idx[-1]
    gens = {a.generator for a in window}
    if len(gens) != 1:
        raise ValueError("window must consist of translates of one axis")
    top = max(len(a.ids) for a in window)
    lens = _offset_lengths(space, next(iter(gens)), top)
    monotone = bool(np.all(np.diff(lens) >= 0))
    if not monotone:
        raise ValueError("axis points are not ordered by distance; unsupported window")
    pc0 = np.where(np.eye(n, dtype=bool), -1, lens[hi - lo])
    big_hi = np.maximum(hi[:, :, None], hi[:, None, :])
    big_lo = np.minimum(lo[:, :, None], lo[:, None, :])
    vals = lens[big_hi - big_lo]
    idx = np.arange(n)
    vals[idx, idx, :] = -1
    vals[idx, :, idx] = -1
    theta = int(pc0.max()) if n > 1 else 0
    table = ProjectionTable(space, window, vals, pc0, lo, hi, theta)
    _check_axioms(table, seed, pc2_samples)
    return table


def _check_axioms(t: ProjectionTable, seed: int, pc2_samples: int):
    v, n, theta = t.values, len(t.window), t.theta
    if n < 2:
        return
    if not np.array_equal(v, v.transpose(0, 2, 1)):
        raise AxiomViolation("PC1 symmetry fails", "PC1")
    # PC2: d_S(U,V) + d_S(V,W) >= d_S(U,W) wherever all three are defined
    if n <= PC2_EXHAUSTIVE_LIMIT:
        lhs = v[:, :, :, None] + v[:, None, :, :]      # [S, U, V, W]
        rhs = v[:, :, None, :]
        ok = (lhs >= rhs) | (v[:, :, :, None] < 0) | (v[:, None, :, :] < 0) | (rhs < 0)
        if not ok.all():
            s, u, w_, x = map(int, np.argwhere(~ok)[0])
            raise AxiomViolation("PC2 triangle inequality fails", "PC2", (s, u, w_, x))
    else:
        t.pc2_exhaustive = False
        rng = random.Random(seed)
        for _ in range(pc2_samples):
            s, a, b, c = rng.sample(range(n), 4)
            if v[s, a, b] + v[s, b, c] < v[s, a, c]:
                raise AxiomViolation("PC2 triangle inequality fails", "PC2", (s, a, b, c))
    # PC3: min(d_U(V,W), d_V(U,W)) <= theta for distinct U, V, W
    m = np.minimum(v, v.transpose(1, 0, 2))
    distinct = (v >= 0) & (v.transpose(1, 0, 2) >= 0)
    bad = distinct & (m > theta)
    if bad.any():
        u, w_, x = map(int, np.argwhere(bad)[0])
        raise AxiomViolation("PC3 fails", "PC3", (u, w_, x))
    exceed = (v > theta).sum(axis=0)        # [U, V] -> number of S
    off = ~np.eye(n, dtype=bool)
    t.census = {"max_exceedances": int(exceed[off].max()),
                "mean_exceedances": float(exceed[off].mean()),
                "window": n, "finite": bool(exceed[off].max() <= n)}


def modified_distance(table: ProjectionTable, S, U, V) -> int:
    """d_S(U, V), realized as d^pi_S(U, V); the 2 theta slack lives in thresholds."""
    s, u, v = table.index(S), table.index(U), table.index(V)
    if s in (u, v):
        raise ValueError("S must differ from U and V")
    return int(table.values[s, u, v])


def default_Theta(table: ProjectionTable) -> int:
    return 4 * table.theta + 1


@dataclass
class IntervalSet:
    U: int
    V: int
    K: float
    members: list


def interval_set(table: ProjectionTable, K: float, U, V, validate: bool = True) -> IntervalSet:
    """Members S with d_S(U, V) > K, in the order running from U to V.

    S comes before S' when d_S(U, S') > d_{S'}(U, S); ties are broken by
    ShortLex order of the translates.  With ``validate`` the order is checked
    against the coherence inequalities with slack 4 theta.
    """
    u, v = table.index(U), table.index(V)
    vals = table.values
    if u == v or math.isinf(K):
        return IntervalSet(u, v, K, [])
    members = [s for s in range(len(table.window)) if s not in (u, v) and vals[s, u, v] > K]

    def cmp(a, b):
        x, y = vals[a, u, b], vals[b, u, a]
        if x != y:
            return -1 if x > y else 1
        ka, kb = W.shortlex_key(table.window[a].translate), W.shortlex_key(table.window[b].translate)
        return -1 if ka < kb else (1 if ka > kb else 0)

    members.sort(key=functools.cmp_to_key(cmp))
    out = IntervalSet(u, v, K, members)
    if validate:
        check_interval_order(table, out)
    return out


def check_interval_order(table: ProjectionTable, iv: IntervalSet):
    chain = [iv.U] + iv.members + [iv.V]
    slack = 4 * table.theta
    vals = table.values
    for i, j, k in itertools.combinations(range(len(chain)), 3):
        s0, s1, s2 = chain[i], chain[j], chain[k]
        if vals[s1, s0, s2] < vals[s1, iv.U, iv.V] - slack:
            raise OrderInconsistent("middle projection too small", (s0, s1, s2))
        if vals[s0, s1, s2] > slack or vals[s2, s0, s1] > slack:
            raise OrderInconsistent("end projections too large", (s0, s1, s2))


def build_projection_complex(table: ProjectionTable, K: float) -> nx.Graph:
    """Vertices are window indices; U and V are joined when S_K(U, V) is empty."""
    n = len(table.window)
    g = nx.Graph()
    for i, a in enumerate(table.window):
        g.add_node(i, label=a.label)
    big = (table.values > K).any(axis=0)   # [U, V]: some S exceeds K
    for u in range(n):
        for v in range(u + 1, n):
            if not big[u, v]:
                g.add_edge(u, v)
    return g


def edge_list(g: nx.Graph, weight: str | None = None) -> str:
    """Plain edge-list text with vertex labels."""
    label = lambda x: g.nodes[x].get("label", str(x))
    lines = []
    for a, b, d in sorted(g.edges(data=True), key=lambda e: (str(e[0]), str(e[1]))):
        w = "" if weight is None else f" {d.get(weight, 1)}"
        lines.append(f"{label(a)} {label(b)}{w}")
    return "\n".join(lines) + "\n"


# -- quasi-tree of spaces ---------------------------------------------------

@dataclass
class QuasiTreeSpace:
    table: ProjectionTable
    K: float
    L: float
    graph: nx.Graph
    complex: nx.Graph
    distortion: float = 1.0
    four_point_delta: float | None = None

    def vertex(self, axis_index: int, position: int):
        return (axis_index, position)

    def distance(self, x, y) -> float:
        return nx.dijkstra_path_length(self.graph, x, y, weight="weight")

    def geodesic(self, x, y) -> list:
        return nx.dijkstra_path(self.graph, x, y, weight="weight")


def build_quasitree_space(space: OrbitSpace, window, K: float, L: float,
                          table: ProjectionTable | None = None, samples: int = 400,
                          seed: int = 0) -> QuasiTreeSpace:
    """Axes with their own metric, adjacent axes joined by length-L edges
    between pi_U(V) and pi_V(U).  Records per-axis distortion and a sampled
    four-point hyperbolicity constant."""
    if not (K / 2 <= L <= 2 * K):
        raise ValueError("L must satisfy K/2 <= L <= 2K")
    table = build_projection_table(space, window) if table is None else table
    pk = build_projection_complex(table, K)
    g = nx.Graph()
    step = {}
    for i, ax in enumerate(table.window):
        w = len(ax.generator)
        step[i] = w
        for j in range(len(ax.ids)):
            g.add_node((i, j), label=f"{ax.label}@{j - ax.J}")
        for j in range(len(ax.ids) - 1):
            g.add_edge((i, j), (i, j + 1), weight=w)
    for u, v in pk.edges():
        for a in range(table.proj_lo[u, v], table.proj_hi[u, v] + 1):
            for b in range(table.proj_lo[v, u], table.proj_hi[v, u] + 1):
                g.add_edge((u, int(a)), (v, int(b)), weight=L)
    qts = QuasiTreeSpace(table, K, L, g, pk)
    qts.distortion = _axis_distortion(space, qts)
    qts.four_point_delta = four_point_delta(g, samples, seed)
    return qts


def _axis_distortion(space: OrbitSpace, qts: QuasiTreeSpace) -> float:
    """Worst ratio of window metric to quasi-tree metric along each axis."""
    worst = 1.0
    for i, ax in enumerate(qts.table.window):
        src = (i, ax.J)
        dq = nx.single_source_dijkstra_path_length(qts.graph, src, weight="weight")
        dx = space.distance_matrix([ax.ids[ax.J]], ax.ids)[0]
        for j in range(len(ax.ids)):
            if dx[j]:
                worst = max(worst, dx[j] / dq[(i, j)], dq[(i, j)] / dx[j])
    return float(worst)


def four_point_delta(g: nx.Graph, samples: int = 400, seed: int = 0) -> float:
    """Largest sampled four-point defect (d1 - d2) / 2 over random quadruples."""
    nodes = sorted(g.nodes)
    if len(nodes) < 4:
        return 0.0
    rng = random.Random(seed)
    cache: dict = {}

    def d(x, y):
        if x not in cache:
            cache[x] = nx.single_source_dijkstra_path_length(g, x, weight="weight")
        return cache[x].get(y, math.inf)

    pool = rng.sample(nodes, min(len(nodes), 40))
    best = 0.0
    for _ in range(samples):
        x, y, z, w = rng.sample(pool, 4)
        s = sorted([d(x, y) + d(z, w), d(x, z) + d(y, w), d(x, w) + d(y, z)], reverse=True)
        if math.isinf(s[0]):
            continue
        best = max(best, (s[0] - s[1]) / 2)
    return best


def standard_path(qts: QuasiTreeSpace, U, V, K: float | None = None,
                  u: int | None = None, v: int | None = None) -> list:
    """A K-standard path from u in U to v in V (positions default to the centres).

    Visits U, the interval members in order and V; inside each axis it walks
    along the axis, and it crosses between consecutive axes by an L-edge.
    """
    t = qts.table
    K = qts.K if K is None else K
    iv = interval_set(t, K, U, V)
    chain = [iv.U] + iv.members + [iv.V]
    if iv.U == iv.V:
        return [(iv.U, t.window[iv.U].J if u is None else u)]
    pos = t.window[iv.U].J if u is None else u
    path = [(chain[0], pos)]
    for a, b in zip(chain, chain[1:]):
        if not qts.complex.has_edge(a, b):
            raise OrderInconsistent("consecutive interval members are not adjacent", (a, b))
        exit_pos = int(t.proj_lo[a, b])
        path.extend(_walk(a, pos, exit_pos))
        pos = int(t.proj_lo[b, a])
        path.append((b, pos))
    end = t.window[iv.V].J if v is None else v
    path.extend(_walk(chain[-1], pos, end))
    return path


def _walk(i, a, b):
    step = 1 if b >= a else -1
    return [(i, j) for j in range(a + step, b + step, step)]


def path_length(qts: QuasiTreeSpace, path) -> float:
    return sum(qts.graph[x][y]["weight"] for x, y in zip(path, path[1:]))


def admissible_lift(space: OrbitSpace, table: ProjectionTable, U, V, u: int, v: int,
                    K: float) -> AdmissiblePath:
    """Admissible path from u in U to v in V with saturation S_K(U, V).

    Picks x_i in pi_{S_i}(S_{i-1}) and y_i in pi_{S_i}(S_{i+1}) (first points
    in exponent order) and joins u, x_1, y_1, ..., x_k, y_k, v by geodesics;
    the pieces [x_i, y_i] are the marked ones.
    """
    iv = interval_set(table, K, U, V)
    if iv.U == iv.V and u == v:
        return AdmissiblePath(space, [], [], [], 0, 0)
    chain = [iv.U] + iv.members + [iv.V]
    stops = [u]
    for k in range(1, len(chain) - 1):
        s = chain[k]
        stops.append(table.projection_points(s, chain[k - 1])[0])
        stops.append(table.projection_points(s, chain[k + 1])[0])
    stops.append(v)
    pieces, marked, sets = [], [], []
    for k in range(len(stops) - 1):
        pieces.append(space.geodesic(stops[k], stops[k + 1]))
        if k % 2 == 1:
            marked.append(k)
            sets.append(table.window[chain[(k + 1) // 2]])
    path = AdmissiblePath(space, pieces, marked, sets, 0, 0)
    path.K = measured_K(path)
    path.theta = _bp_max(path)
    return path


def entry_exit_check(qts: QuasiTreeSpace, U, V, K: float | None = None,
                     source: int | None = None, target: int | None = None) -> float:
    """Max distance of entry/exit points of a quasi-tree geodesic to the projections.

    For every S in S_K(U, V) the geodesic from u to v must pass through S;
    the entry point is compared with pi_S(U) and the exit with pi_S(V),
    measured along S.
    """
    t = qts.table
    K = qts.K if K is None else K
    iv = interval_set(t, K, U, V)
    if not iv.members:
        return 0.0
    a = (iv.U, t.window[iv.U].J if source is None else source)
    b = (iv.V, t.window[iv.V].J if target is None else target)
    geo = qts.geodesic(a, b)
    worst = 0.0
    for s in iv.members:
        hits = [p for (i, p) in geo if i == s]
        if not hits:
            raise MissedAxis(f"geodesic avoids {t.window[s].label}", t.window[s])
        w = len(t.window[s].generator)
        entry, exit_ = hits[0], hits[-1]
        d_in = _range_gap(entry, t.proj_lo[s, iv.U], t.proj_hi[s, iv.U]) * w
        d_out = _range_gap(exit_, t.proj_lo[s, iv.V], t.proj_hi[s, iv.V]) * w
        worst = max(worst, d_in, d_out)
    return float(worst)


def _range_gap(x, lo, hi) -> int:
    return int(max(lo - x, 0, x - hi))


def orbit_embedding_constants(qts: QuasiTreeSpace, axis_index: int) -> tuple[float, float]:
    """(lambda, c) with |i - j| / lambda - c <= d(h^i o, h^j o) <= lambda |i - j| + c
    along one axis of the quasi-tree, from exact graph distances."""
    ax = qts.table.window[axis_index]
    src = (axis_index, ax.J)
    dq = nx.single_source_dijkstra_path_length(qts.graph, src, weight="weight")
    ratios = [dq[(axis_index, j)] / abs(j - ax.J) for j in range(len(ax.ids)) if j != ax.J]
    lam = max(max(ratios), 1 / min(ratios))
    return float(lam), 0.0
