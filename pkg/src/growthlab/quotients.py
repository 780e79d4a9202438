"""Quotient experiments: cone-offs, rotating families, Greendlinger deep points,
injectivity of free semigroups into quotients, growth sweeps and products."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx

from . import words as W
from .contracting import (DeepPointParams, DeepSegment, SemigroupTree, classify_deep_points,
                          coset_representative, translates_near)
from .errors import BudgetExceeded, CollisionFound, NoDeepPoint
from .growth import (exact_free_product_rate, growth_rate, lq_norm_rate, product_growth_rate)
from .spaces import (DEFAULT_BUDGET, OrbitSpace, ProductSpace, cayley_space, census,
                     convolve_spheres, quotient_presentation)

LOG3 = math.log(3)


# -- parameters -------------------------------------------------------------

def default_eps(h) -> int:
    root, _, _ = W.cyclic_reduce_and_root(W.as_word(h))
    return len(root) // 2


def default_M(h, k: int, n: int) -> float:
    """Quarter of the relator length, so a deep segment of length 2M is half a relator."""
    return len(W.cyclic_reduce_and_root(W.as_word(h))[0]) * k * n / 4


@dataclass
class ExperimentConfig:
    h: tuple
    k: int = 1
    n: int = 6
    eps: int | None = None
    M: float | None = None
    seed: int = 0
    radius: int = 40
    depth: int = 5

    def __post_init__(self):
        self.h = W.as_word(self.h)
        if self.k < 1 or self.n < 1:
            raise ValueError("k and n must be positive")
        if self.eps is None:
            self.eps = default_eps(self.h)
        if self.M is None:
            self.M = default_M(self.h, self.k, self.n)

    @property
    def relator(self) -> tuple:
        return W.power(self.h, self.k * self.n)

    @property
    def params(self) -> DeepPointParams:
        return DeepPointParams(self.eps, self.M)

    def quotient(self, base: W.Presentation | None = None) -> W.Presentation:
        return quotient_presentation(base or W.free_group(2), [self.relator])


# -- cone-off and rotating families -----------------------------------------

@dataclass
class ConeOffSpace:
    base: nx.Graph
    graph: nx.Graph
    apices: list
    r: float

    def distance(self, x, y) -> float:
        return nx.dijkstra_path_length(self.graph, x, y, weight="weight")


def cone_off(base: nx.Graph, system: dict, r: float) -> ConeOffSpace:
    """Add an apex per member of ``system`` (name -> base vertices) joined to
    each of its vertices by an edge of length r."""
    if r <= 0:
        raise ValueError("cone radius must be positive")
    g = base.copy()
    for e in g.edges:
        g.edges[e].setdefault("weight", 1)
    apices = []
    for name, verts in system.items():
        a = ("apex", name)
        apices.append(a)
        g.add_node(a, label=f"apex {name}")
        for v in verts:
            g.add_edge(a, v, weight=r)
    return ConeOffSpace(base, g, apices, r)


def cone_off_quasitree(qts, r: float) -> ConeOffSpace:
    system = {}
    for i, ax in enumerate(qts.table.window):
        system[ax.label] = [(i, j) for j in range(len(ax.ids))]
    return cone_off(qts.graph, system, r)


@dataclass
class RotatingFamily:
    """Apex a(S) for each translate S = t Ax(h), rotated by <t p^{kn} t^-1>."""

    space: OrbitSpace
    generator: tuple
    power: int
    subgroups: dict = field(default_factory=dict)   # translate -> generating word

    @classmethod
    def over(cls, space: OrbitSpace, axes, k: int, n: int) -> "RotatingFamily":
        p = axes[0].generator
        fam = cls(space, p, k * n)
        for ax in axes:
            t = ax.translate
            fam.subgroups[t] = W.free_reduce(t + W.power(p, k * n) + W.inverse(t))
        return fam


def rotating_family_check(family: RotatingFamily, sample_g: Sequence, space: OrbitSpace | None = None) -> dict:
    """Verify G_a fixes a and g G_a g^-1 = G_{g a} for sampled g.

    Samples whose translate g a falls outside the family's window are skipped
    and counted.
    """
    sp = family.space if space is None else space
    pres = sp.presentation
    p = family.generator
    violations, skipped, checked = [], 0, 0
    for t, x in family.subgroups.items():
        if coset_representative(sp, W.as_word(x) + t, p) != t:
            violations.append(("fix", W.format_word(t)))
    for g in sample_g:
        g = W.as_word(g)
        for t, x in family.subgroups.items():
            ga = coset_representative(sp, g + t, p)
            if ga not in family.subgroups:
                skipped += 1
                continue
            checked += 1
            conj = g + W.as_word(x) + W.inverse(g)
            y = family.subgroups[ga]
            if not (W.equal_in_group(conj, y, pres) or W.equal_in_group(conj, W.inverse(y), pres)):
                violations.append(("equivariance", W.format_word(g), W.format_word(t)))
    return {"violations": violations, "checked": checked, "skipped": skipped,
            "ok": not violations}


# -- normal closure and deep points ----------------------------------------

def random_word(rng: random.Random, length: int, rank: int = 2) -> tuple:
    letters = W.alphabet(rank)
    out: list[int] = []
    while len(out) < length:
        x = rng.choice(letters)
        if out and out[-1] == -x:
            continue
        out.append(x)
    return tuple(out)


def sample_normal_closure(h, k: int, n: int, count: int, max_factors: int, seed: int,
                          conjugator_length: int = 4, rank: int = 2,
                          conjugators: Sequence | None = None,
                          signs: Sequence[int] | None = None) -> list[tuple]:
    """Seeded products of conjugates c (h^{kn})^{+-1} c^-1, freely reduced,
    with identity results dropped.  ``conjugators`` fixes the c_i (then one
    product is returned, with exponents from ``signs``, default all +1)."""
    if count < 1 or max_factors < 1:
        raise ValueError("count and max_factors must be positive")
    r = W.power(W.as_word(h), k * n)
    if conjugators is not None:
        signs = [1] * len(conjugators) if signs is None else signs
        parts = [W.as_word(c) + (r if e > 0 else W.inverse(r)) + W.inverse(W.as_word(c))
                 for c, e in zip(conjugators, signs)]
        w = W.multiply(*parts)
        return [w] if w else []
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        parts = []
        for _ in range(rng.randint(1, max_factors)):
            c = random_word(rng, rng.randint(0, conjugator_length), rank)
            e = r if rng.random() < 0.5 else W.inverse(r)
            parts.append(c + e + W.inverse(c))
        w = W.multiply(*parts)
        if w:
            out.append(w)
    return out


def deepest_segment(space: OrbitSpace, g, h, params: DeepPointParams) -> DeepSegment:
    """Deepest segment of [o, g o] near a translate of Ax(h).

    Raises NoDeepPoint, carrying the geodesic, when no segment reaches 2M.
    """
    gid = space.intern(W.as_word(g))
    path = space.geodesic(0, gid)
    system = translates_near(space, h, path, params.eps)
    segs, transitional = classify_deep_points(space, path, system, params)
    if transitional:
        raise NoDeepPoint(f"no ({params.eps}, {params.M})-deep point on "
                          f"{W.format_word(space.word(gid))}", W.format_word(space.word(gid)))
    return segs[0]


def greendlinger_deep_point(space: OrbitSpace, g, h, params: DeepPointParams):
    """(axis, length) of the deepest segment of [o, g o]; see deepest_segment."""
    seg = deepest_segment(space, g, h, params)
    return seg.axis, seg.length


def deep_point_census(space: OrbitSpace, samples: Sequence, h, params: DeepPointParams) -> dict:
    """Run the Greendlinger check over samples; failures are kept as witnesses."""
    depths, misses = [], []
    for g in samples:
        try:
            _, depth = greendlinger_deep_point(space, g, h, params)
            depths.append(depth)
        except NoDeepPoint as e:
            misses.append(e.geodesic)
    return {"samples": len(samples), "depths": depths, "misses": misses,
            "min_depth": min(depths, default=None)}


# -- injectivity ------------------------------------------------------------

def injectivity_experiment(tree: SemigroupTree, quotient: W.Presentation, depth: int | None = None,
                           strict: bool = True) -> dict:
    """Check that distinct elements of Gamma stay distinct in the quotient.

    Every pair is compared with the word-problem engine of the quotient.  A
    coincidence raises CollisionFound (or is returned when not ``strict``).
    """
    depth = tree.depth if depth is None else depth
    elems = [(b, w) for b, w in tree.elements.items() if len(b) <= depth]
    elems.sort(key=lambda e: (len(e[0]), e[0]))
    pairs = 0
    for (b1, w1), (b2, w2) in itertools.combinations(elems, 2):
        pairs += 1
        if W.equal_in_group(w1, w2, quotient):
            if strict:
                raise CollisionFound(f"branches {b1} and {b2} coincide in {quotient}", (b1, b2))
            return {"injective": False, "pairs": pairs, "collision": (b1, b2), "elements": len(elems)}
    return {"injective": True, "pairs": pairs, "collision": None, "elements": len(elems)}


def injectivity_threshold(tree: SemigroupTree, h, n_values: Sequence[int], k: int = 1,
                          base: W.Presentation | None = None) -> dict:
    """Per-n injectivity into base / <<h^{kn}>> and the smallest n_min after
    which every tested n injects."""
    base = base or W.free_group(2)
    rows = []
    for n in n_values:
        q = quotient_presentation(base, [W.power(W.as_word(h), k * n)])
        try:
            res = injectivity_experiment(tree, q)
            rows.append({"n": n, "injective": True, "pairs": res["pairs"], "collision": None})
        except CollisionFound as e:
            e.n = n
            rows.append({"n": n, "injective": False, "pairs": None, "collision": list(e.pair)})
    n_min = None
    for row in reversed(rows):
        if not row["injective"]:
            break
        n_min = row["n"]
    return {"rows": rows, "n_min": n_min}


def mechanism_check(space: OrbitSpace, tree: SemigroupTree, h, params: DeepPointParams,
                    closure_samples: Sequence, branch_limit: int | None = None) -> dict:
    """Closure elements have deep points while Gamma branches are transitional.

    Branch geodesics [o, g o] for g in Gamma are classified against the
    translates of Ax(h) at the same (eps, M) as the closure samples.
    """
    deep = deep_point_census(space, closure_samples, h, params)
    branches = sorted((b for b in tree.elements if b), key=lambda b: (len(b), b))
    if branch_limit is not None:
        branches = branches[:branch_limit]
    deep_branches = []
    for b in branches:
        gid = space.intern(tree.elements[b])
        path = space.geodesic(0, gid)
        _, transitional = classify_deep_points(space, path, translates_near(space, h, path, params.eps), params)
        if not transitional:
            deep_branches.append(b)
    return {"closure_deep": len(deep["depths"]), "closure_missed": len(deep["misses"]),
            "branches": len(branches), "branches_deep": deep_branches,
            "disjoint": not deep["misses"] and not deep_branches}


# -- growth sweeps ----------------------------------------------------------

def sphere_counts(p: W.Presentation, radius: int, counting: str = "census",
                  budget: int = DEFAULT_BUDGET) -> list[int]:
    """Sphere sizes by explicit BFS ("bfs") or by BFS aggregated per state ("census")."""
    if counting == "bfs":
        return cayley_space(p, radius, budget).sphere_counts()
    if counting == "census":
        return census(p, radius)
    raise ValueError(f"unknown counting mode {counting!r}")


def balls_of(spheres: Sequence[int]) -> list[int]:
    return list(itertools.accumulate(int(s) for s in spheres))


def convergence_sweep(h, n_range: Sequence[int], radius: int, k: int = 1,
                      base: W.Presentation | None = None, counting: str = "census",
                      method: str = "auto", budget: int = DEFAULT_BUDGET,
                      with_limit: bool = True) -> dict:
    """Growth of base / <<h^{kn}>> for each n, next to the free-product series
    oracle when h is a single generator of a rank-2 free group."""
    base = base or W.free_group(2)
    h = W.as_word(h)
    try:
        full = growth_rate(balls_of(sphere_counts(base, radius, counting, budget)), method).delta
        full_flag = None
    except BudgetExceeded as e:
        full, full_flag = None, f"budget exceeded at radius {e.partial_radius}"
    rows = []
    single = len(set(abs(x) for x in h)) == 1 and base.strategy == W.FREE
    for n in n_range:
        row = {"n": n, "radius": radius, "relator": W.format_word(W.power(h, k * n))}
        try:
            q = quotient_presentation(base, [W.power(h, k * n)])
            sph = sphere_counts(q, radius, counting, budget)
        except BudgetExceeded as e:
            row.update({"flagged": f"budget exceeded at radius {e.partial_radius}",
                        "counts": None, "delta": None, "oracle": None, "gap": None})
            rows.append(row)
            continue
        rep = growth_rate(balls_of(sph), method)
        oracle = None
        if single and base.generator_count == 2:
            oracle = float(exact_free_product_rate([len(W.free_reduce(W.power(h, k * n)))] + [0]))
        row.update({"counts": balls_of(sph), "delta": rep.delta, "method": rep.method,
                    "oracle": oracle, "gap": None if full is None else full - rep.delta,
                    "flagged": None})
        rows.append(row)
    deltas = [r["delta"] for r in rows if r["delta"] is not None]
    summary = {
        "full_rate": full,
        "non_decreasing": all(a <= b + 1e-12 for a, b in zip(deltas, deltas[1:])),
        "strictly_increasing": all(a < b for a, b in zip(deltas, deltas[1:])),
        "below_full": None if full is None else all(d < full for d in deltas),
        "max_oracle_error": max((abs(r["delta"] - r["oracle"]) for r in rows
                                 if r.get("oracle") is not None and r["delta"] is not None), default=None),
    }
    if with_limit:
        rows.append({"n": "inf", "radius": radius, "relator": "", "counts": None,
                     "delta": full, "method": method, "oracle": LOG3 if base == W.free_group(2) else None,
                     "gap": 0.0, "flagged": full_flag})
    return {"rows": rows, "summary": summary}


# -- products ---------------------------------------------------------------

def product_experiment(factor_configs: Sequence, p: float, radius: int,
                       counting: str = "census", sigma: float = 0.5) -> dict:
    """Measured growth of an L^p product against the L^q norm of factor rates.

    Each factor config is a Presentation or a pair (presentation, relators)
    taken as a quotient.
    """
    if not 2 <= len(factor_configs) <= 3:
        raise ValueError("products of 2 or 3 factors are supported")
    spheres, rates, labels = [], [], []
    for cfg in factor_configs:
        pres = cfg if isinstance(cfg, W.Presentation) else quotient_presentation(cfg[0], cfg[1])
        sph = sphere_counts(pres, max(radius, 12), counting)
        spheres.append(sph[: radius + 1])
        rates.append(growth_rate(balls_of(sph), "auto").delta)
        labels.append(str(pres))
    space = ProductSpace(spheres, p)
    rep = product_growth_rate(space, sigma)
    predicted = lq_norm_rate(rates, p)
    out = {"p": p if not math.isinf(p) else "inf", "radius": radius, "factors": labels,
           "factor_rates": rates, "measured": rep.delta, "predicted": predicted,
           "error": rep.delta - predicted, "ball_counts": space.ball_counts(),
           "fit_window": list(rep.window), "log_coefficient": rep.diagnostics["log_coefficient"]}
    if p == 1:
        out["convolution_identity"] = space.ball_counts() == balls_of(convolve_spheres(spheres, radius))
    return out


def product_convolution_check(factors: Sequence[W.Presentation], radius: int) -> bool:
    """Explicit BFS on the direct product against the convolution of factor spheres."""
    prod = W.direct_product(*factors)
    explicit = cayley_space(prod, radius).sphere_counts()
    return explicit == convolve_spheres([census(f, radius) for f in factors], radius)
