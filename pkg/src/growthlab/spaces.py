"""Explored Cayley graphs, their products and quotients.

Canonical forms (ShortLex-least geodesic words) are prefix closed for every
supported engine, so an explored ball is stored as a trie: node ``i`` is the
element whose canonical word is the word of ``parent[i]`` followed by
``letter[i]``.  Whether a one-letter extension of a canonical word is again
canonical is decided by a finite automaton that tracks the longest suffix
which is a prefix of a symmetrized relator.  For piece-free relator sets this
is exact: a word is canonical iff it is freely reduced, has no subword longer
than half a relator, and every exact half-relator subword is ShortLex-smaller
than its complement.

Exploration proceeds layer by layer with numpy; inside a layer nodes are
created in (parent id, letter) order, which is ShortLex order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr

from . import words as W
from .errors import BudgetExceeded, PresentationError, StrategyMismatch, Unexplored

DEFAULT_BUDGET = 5_000_000
FLOAT_SLACK = 1e-12


# -- acceptance automaton ---------------------------------------------------

class Automaton:
    """Accepts exactly the canonical words of a presentation.

    ``table[state, column]`` is the next state, or -1 when appending the
    letter ``letters[column]`` leaves the language.  State 0 is the empty word.
    """

    def __init__(self, letters: list[int], table: np.ndarray):
        self.letters = letters
        self.column = {x: i for i, x in enumerate(letters)}
        self.table = table

    @property
    def state_count(self) -> int:
        return self.table.shape[0]

    def run(self, w: Sequence[int]) -> int:
        s = 0
        for x in w:
            s = int(self.table[s, self.column[x]])
            if s < 0:
                return -1
        return s

    def accepts(self, w: Sequence[int]) -> bool:
        return self.run(w) >= 0


def _single_automaton(p: W.Presentation) -> tuple[list[int], list[list[int]]]:
    letters = p.letters
    if p.strategy == W.SMALL_CANCELLATION and not p.piece_free:
        raise StrategyMismatch(
            "exploration needs a piece-free relator set; max piece is "
            f"{W.max_piece(p.relators)}")
    sym = W.symmetrized(p.relators) if p.relators else []
    starts = {s[0]: s for s in sym}

    # states: 0 root; then (last letter, None) or (relator word, matched length)
    keys: list = [None]
    index: dict = {None: 0}

    def state_of(key):
        if key not in index:
            index[key] = len(keys)
            keys.append(key)
        return index[key]

    def step(key, x):
        if key is not None:
            last = key[0][key[1] - 1] if key[1] else key[0][0]
            if x == -last:
                return None
        if key is not None and key[1] and key[1] < len(key[0]) and key[0][key[1]] == x:
            s, n = key[0], key[1] + 1
        elif x in starts:
            s, n = starts[x], 1
        else:
            return ((x,), 0)
        m = len(s)
        if 2 * n > m:
            return None
        if 2 * n == m and W.shortlex_key(W.inverse(s[n:])) < W.shortlex_key(s[:n]):
            return None
        return (s, n)

    rows: list[list[int]] = []
    i = 0
    while i < len(keys):
        key = keys[i]
        row = []
        for x in letters:
            nxt = step(key, x)
            row.append(-1 if nxt is None else state_of(nxt))
        rows.append(row)
        i += 1
    return letters, rows


def build_automaton(p: W.Presentation) -> Automaton:
    if p.strategy != W.DIRECT_PRODUCT:
        letters, rows = _single_automaton(p)
        return Automaton(letters, np.array(rows, dtype=np.int32))
    # concatenation: letters of factor i may follow letters of factors <= i
    parts = [build_automaton(f) for f in p.factors]
    offsets = p.factor_offsets()
    letters = p.letters
    base = [0]
    for a in parts:
        base.append(base[-1] + a.state_count - 1)
    n_states = base[-1] + 1
    table = np.full((n_states, len(letters)), -1, dtype=np.int32)

    for i, (a, off) in enumerate(zip(parts, offsets)):
        cols = [letters.index(x + off if x > 0 else x - off) for x in a.letters]
        for j, c in enumerate(cols):
            t = int(a.table[0, j])
            table[0, c] = -1 if t < 0 else base[i] + t
        for s in range(1, a.state_count):
            for j, c in enumerate(cols):
                t = int(a.table[s, j])
                table[base[i] + s, c] = -1 if t < 0 else base[i] + t
        # states of earlier factors may start factor i
        for k in range(i):
            for s in range(1, parts[k].state_count):
                for j, c in enumerate(cols):
                    t = int(a.table[0, j])
                    table[base[k] + s, c] = -1 if t < 0 else base[i] + t
    return Automaton(letters, table)


def census(p: W.Presentation, radius: int) -> list[int]:
    """Sphere sizes up to ``radius`` by BFS aggregated over automaton states.

    Elements of a layer that share an acceptance state have identical
    subtrees, so counting per state reproduces the explicit BFS counts
    without materializing the ball.  Exact Python integers.
    """
    a = build_automaton(p)
    edges = [[int(t) for t in row if t >= 0] for row in a.table]
    layer = {0: 1}
    spheres = [1]
    for _ in range(radius):
        nxt: dict[int, int] = {}
        for s, c in layer.items():
            for t in edges[s]:
                nxt[t] = nxt.get(t, 0) + c
        layer = nxt
        spheres.append(sum(nxt.values()))
    return spheres


# -- explored spaces --------------------------------------------------------

@dataclass(frozen=True)
class PointSet:
    ids: tuple
    label: str = ""

    def __len__(self):
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids)

    def __contains__(self, x):
        return x in self._members

    @property
    def _members(self):
        m = self.__dict__.get("_m")
        if m is None:
            m = frozenset(self.ids)
            object.__setattr__(self, "_m", m)
        return m


class OrbitSpace:
    """The Cayley graph of a presentation, explored to a radius.

    Element ids below ``size`` are trie nodes (deterministic, ShortLex order).
    Elements met outside the explored ball are interned on demand with ids
    ``>= size``; those ids are only meaningful for this object.
    """

    def __init__(self, presentation: W.Presentation, budget: int = DEFAULT_BUDGET):
        self.presentation = presentation
        self.budget = int(budget)
        self.automaton = build_automaton(presentation)
        self.k2 = len(self.automaton.letters)
        self.parent = np.array([-1], dtype=np.int32)
        self.letter = np.array([-1], dtype=np.int8)
        self.state = np.array([0], dtype=np.int32)
        self.children = np.full((1, self.k2), -1, dtype=np.int32)
        self.layer_starts = [0, 1]
        self._overflow: dict[tuple, int] = {}
        self._overflow_words: list[tuple] = []
        self._word_cache: dict[int, tuple] = {0: ()}
        self._free = presentation.strategy == W.FREE

    # exploration

    @property
    def explored_radius(self) -> int:
        return len(self.layer_starts) - 2

    @property
    def size(self) -> int:
        return int(self.layer_starts[-1])

    basepoint = 0

    def explore(self, radius: int) -> "OrbitSpace":
        if radius < self.explored_radius:
            raise ValueError("radius below the explored radius")
        out = self._copy()
        out._grow(radius)
        return out

    def _copy(self) -> "OrbitSpace":
        out = object.__new__(OrbitSpace)
        out.__dict__.update(self.__dict__)
        out.layer_starts = list(self.layer_starts)
        out._overflow, out._overflow_words = {}, []
        out._word_cache = {0: ()}
        return out

    def _grow(self, radius: int):
        table = self.automaton.table
        parents, letters, states = [self.parent], [self.letter], [self.state]
        total = self.size
        cur_states = self.state[self.layer_starts[-2]:]
        try:
            while self.explored_radius < radius:
                a = self.layer_starts[-2]
                nxt = table[cur_states]
                flat = np.flatnonzero((nxt >= 0).ravel())
                if total + flat.size > self.budget:
                    raise BudgetExceeded(
                        f"node budget {self.budget} exceeded at radius {self.explored_radius + 1}",
                        partial_radius=self.explored_radius)
                parents.append((a + flat // self.k2).astype(np.int32))
                letters.append((flat % self.k2).astype(np.int8))
                cur_states = nxt.ravel()[flat].astype(np.int32)
                states.append(cur_states)
                total += flat.size
                self.layer_starts.append(total)
        finally:
            self.parent = np.concatenate(parents)
            self.letter = np.concatenate(letters)
            self.state = np.concatenate(states)
            self.children = _children_table(self.parent, self.letter, self.k2)

    # counts

    def sphere_counts(self) -> list[int]:
        s = self.layer_starts
        return [int(s[i + 1] - s[i]) for i in range(len(s) - 1)]

    def ball_counts(self) -> list[int]:
        return [int(x) for x in self.layer_starts[1:]]

    # elements

    def word(self, i: int) -> tuple:
        w = self._word_cache.get(i)
        if w is not None:
            return w
        if i >= self.size:
            try:
                return self._overflow_words[i - self.size]
            except IndexError:
                raise Unexplored(f"unknown element id {i}") from None
        if i < 0:
            raise Unexplored(f"unknown element id {i}")
        out = []
        j = i
        letters = self.automaton.letters
        while j > 0:
            out.append(letters[self.letter[j]])
            j = int(self.parent[j])
        w = tuple(reversed(out))
        if len(self._word_cache) < 2_000_000:
            self._word_cache[i] = w
        return w

    def _lookup(self, c: Sequence[int]):
        if len(c) > self.explored_radius:
            return None
        j = 0
        col = self.automaton.column
        for x in c:
            j = int(self.children[j, col[x]])
            if j < 0:
                return None
        return j

    def intern(self, w) -> int:
        """Id of the element represented by any word (the single write path)."""
        c = W.canonical_form(W.as_word(w), self.presentation)
        j = self._lookup(c)
        if j is not None:
            return j
        j = self._overflow.get(c)
        if j is None:
            j = self._overflow[c] = self.size + len(self._overflow_words)
            self._overflow_words.append(c)
        return j

    def length(self, i: int) -> int:
        if 0 <= i < self.size:
            return int(np.searchsorted(self.layer_starts, i, side="right") - 1)
        return len(self.word(i))

    def multiply(self, x: int, y: int) -> int:
        return self.intern(self.word(x) + self.word(y))

    def translate(self, g, ids: Iterable[int]) -> list[int]:
        gw = W.as_word(g) if not isinstance(g, (int, np.integer)) else self.word(g)
        return [self.intern(gw + self.word(i)) for i in ids]

    def neighbors(self, x: int) -> list[int]:
        return [self.intern(self.word(x) + (a,)) for a in self.automaton.letters]

    # metric

    def distance(self, x: int, y: int) -> int:
        u, v = self.word(x), self.word(y)
        if self._free:
            n = 0
            for s, t in zip(u, v):
                if s != t:
                    break
                n += 1
            return len(u) + len(v) - 2 * n
        return len(W.canonical_form(W.inverse(u) + v, self.presentation))

    def geodesic(self, x: int, y: int) -> list[int]:
        """The path from x reading the canonical word of x^-1 y."""
        u = self.word(x)
        c = W.canonical_form(W.inverse(u) + self.word(y), self.presentation)
        return [x] + [self.intern(u + c[: i + 1]) for i in range(len(c))]

    def distance_matrix(self, xs: Sequence[int], ys: Sequence[int]) -> np.ndarray:
        xs, ys = list(xs), list(ys)
        if not xs or not ys:
            return np.zeros((len(xs), len(ys)), dtype=np.int64)
        if self._free:
            a, la = self._padded(xs)
            b, lb = self._padded(ys)
            width = min(a.shape[1], b.shape[1])
            if width == 0:
                lcp = np.zeros((len(xs), len(ys)), dtype=np.int64)
            else:
                eq = a[:, None, :width] == b[None, :, :width]
                lcp = np.cumprod(eq, axis=2).sum(axis=2)
                lcp = np.minimum(lcp, np.minimum(la[:, None], lb[None, :]))
            return la[:, None] + lb[None, :] - 2 * lcp
        return np.array([[self.distance(x, y) for y in ys] for x in xs], dtype=np.int64)

    def _padded(self, ids):
        ws = [self.word(i) for i in ids]
        n = max(len(w) for w in ws)
        arr = np.zeros((len(ws), n), dtype=np.int16)
        for r, w in enumerate(ws):
            arr[r, : len(w)] = w
        return arr, np.array([len(w) for w in ws], dtype=np.int64)

    def ball(self, radius: int) -> range:
        if radius > self.explored_radius:
            raise Unexplored(f"radius {radius} beyond explored radius {self.explored_radius}")
        return range(0, self.layer_starts[radius + 1])

    def sphere(self, n: int) -> range:
        if n > self.explored_radius:
            raise Unexplored(f"radius {n} beyond explored radius {self.explored_radius}")
        return range(self.layer_starts[n], self.layer_starts[n + 1])


def _children_table(parent, letter, k2):
    kids = np.full((parent.size, k2), -1, dtype=np.int32)
    kids[parent[1:], letter[1:]] = np.arange(1, parent.size, dtype=np.int32)
    return kids


def cayley_space(p: W.Presentation, radius: int = 0, budget: int = DEFAULT_BUDGET) -> OrbitSpace:
    return OrbitSpace(p, budget).explore(radius)


def explore(space: OrbitSpace, radius: int) -> OrbitSpace:
    return space.explore(radius)


def distance(space: OrbitSpace, x: int, y: int) -> int:
    return space.distance(x, y)


def geodesic(space, x, y):
    return space.geodesic(x, y)


def quotient_space(base: W.Presentation, extra_relators, radius: int = 0,
                   budget: int = DEFAULT_BUDGET) -> OrbitSpace:
    """Cayley graph of the quotient by extra relators.

    For a group acting on its own Cayley graph, the quotient metric (infimum
    over kernel orbits) is the word metric of the quotient group on the image
    generators, so this graph realizes it.
    """
    if base.strategy == W.DIRECT_PRODUCT:
        raise StrategyMismatch("quotients of direct products are taken factor by factor")
    rels = list(base.relators) + [W.as_word(r) for r in extra_relators]
    q = W.one_relator(rels, base.generator_count) if rels else base
    return OrbitSpace(q, budget).explore(radius)


def quotient_presentation(base: W.Presentation, extra_relators) -> W.Presentation:
    rels = list(base.relators) + [W.as_word(r) for r in extra_relators]
    return W.one_relator(rels, base.generator_count) if rels else base


# -- products ---------------------------------------------------------------

def lp_combine(ds: Sequence[float], p: float) -> float:
    if math.isinf(p):
        return float(max(ds, default=0))
    if p == 1:
        return float(sum(ds))
    return float(sum(d ** p for d in ds) ** (1.0 / p))


class ProductSpace:
    """Direct product of factor spaces with the L^p metric, p in [1, inf]."""

    def __init__(self, factors: Sequence, p: float = 1):
        if p < 1:
            raise ValueError("p must lie in [1, inf]")
        self.factors = list(factors)
        self.p = float(p)
        self._spheres = [
            f.sphere_counts() if isinstance(f, OrbitSpace) else [int(c) for c in f]
            for f in self.factors
        ]

    @property
    def explored_radius(self) -> int:
        return min(len(s) for s in self._spheres) - 1

    def distance(self, x: Sequence[int], y: Sequence[int]) -> float:
        return lp_combine([f.distance(a, b) for f, a, b in zip(self.factors, x, y)], self.p)

    def geodesic(self, x: Sequence[int], y: Sequence[int]) -> list[tuple]:
        """An L^1 geodesic moving one factor at a time, first factor first."""
        if self.p != 1:
            raise NotImplementedError("product geodesics are provided for p = 1")
        cur = list(x)
        path = [tuple(cur)]
        for i, f in enumerate(self.factors):
            for v in f.geodesic(x[i], y[i])[1:]:
                cur[i] = v
                path.append(tuple(cur))
        return path

    def _lattice(self, radius: int):
        """(distance, weight) for every tuple of factor radii up to ``radius``."""
        if radius > self.explored_radius:
            raise Unexplored(f"factors explored to {self.explored_radius} < {radius}")
        grids = np.meshgrid(*[np.arange(radius + 1)] * len(self._spheres), indexing="ij")
        radii = np.stack([g.ravel() for g in grids], axis=1).astype(float)
        if math.isinf(self.p):
            d = radii.max(axis=1)
        else:
            d = (radii ** self.p).sum(axis=1) ** (1.0 / self.p)
        weight = np.ones(len(d), dtype=object)
        for k, s in enumerate(self._spheres):
            weight = weight * np.array([s[int(r)] for r in radii[:, k]], dtype=object)
        return d, weight

    def ball_counts(self, radius: int | None = None) -> list[int]:
        r = self.explored_radius if radius is None else radius
        if self.p == 1:
            sph = convolve_spheres(self._spheres, r)
            return list(np.cumsum(np.array(sph, dtype=object)))
        if math.isinf(self.p):
            balls = [np.cumsum(np.array(s[: r + 1], dtype=object)) for s in self._spheres]
            out = balls[0]
            for b in balls[1:]:
                out = out * b
            return [int(x) for x in out]
        d, w = self._lattice(r)
        return [int(w[d <= n + FLOAT_SLACK].sum()) for n in range(r + 1)]

    def smoothed_ball_counts(self, radii: Sequence[float], sigma: float = 0.5) -> np.ndarray:
        """Gaussian-smoothed ball sizes  sum_x Phi((r - d(o, x)) / sigma).

        Integer radii make L^p ball counts jump irregularly for general p;
        smoothing keeps the same exponential rate and removes the jitter.
        Reliable for r <= explored_radius - 5 sigma.
        """
        d, w = self._lattice(self.explored_radius)
        wf = np.array([float(x) for x in w])
        rs = np.asarray(radii, dtype=float)
        return (wf[None, :] * ndtr((rs[:, None] - d[None, :]) / sigma)).sum(axis=1)


def convolve_spheres(spheres: Sequence[Sequence[int]], radius: int) -> list[int]:
    out = [int(x) for x in spheres[0][: radius + 1]]
    for s in spheres[1:]:
        s = [int(x) for x in s[: radius + 1]]
        out = [sum(out[i] * s[n - i] for i in range(n + 1) if i < len(out) and n - i < len(s))
               for n in range(radius + 1)]
    return out


def product_space(factors, p: float = 1) -> ProductSpace:
    return ProductSpace(factors, p)


# -- persistence ------------------------------------------------------------

CODE_VERSION = "1"


def counts_csv(space) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["n", "sphere", "ball"])
    balls = space.ball_counts()
    prev = 0
    for n, b in enumerate(balls):
        wr.writerow([n, b - prev, b])
        prev = b
    return buf.getvalue()


def save_ball(space: OrbitSpace, directory) -> Path:
    """Write the ball table (id, word, distance) plus a manifest."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(d / "ball.npz", parent=space.parent, letter=space.letter,
                        state=space.state, layer_starts=np.array(space.layer_starts))
    manifest = {
        "presentation": W.format_presentation(space.presentation),
        "presentation_hash": space.presentation.fingerprint(),
        "radius": space.explored_radius,
        "code_version": CODE_VERSION,
    }
    (d / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return d


def load_ball(directory, presentation: W.Presentation | None = None) -> OrbitSpace:
    d = Path(directory)
    manifest = json.loads((d / "manifest.json").read_text())
    p = W.parse_presentation(manifest["presentation"])
    if presentation is not None and presentation.fingerprint() != manifest["presentation_hash"]:
        raise PresentationError("cached ball belongs to a different presentation")
    if manifest.get("code_version") != CODE_VERSION:
        raise PresentationError("cached ball written by another code version")
    data = np.load(d / "ball.npz")
    space = OrbitSpace(p)
    space.parent, space.letter, space.state = data["parent"], data["letter"], data["state"]
    space.layer_starts = [int(x) for x in data["layer_starts"]]
    space.children = _children_table(space.parent, space.letter, space.k2)
    return space


def cached_space(p: W.Presentation, radius: int, cache_dir=None,
                 budget: int = DEFAULT_BUDGET) -> OrbitSpace:
    """Explore, reusing a ball cache keyed by (presentation hash, radius)."""
    if cache_dir is None:
        return cayley_space(p, radius, budget)
    d = Path(cache_dir) / f"{p.fingerprint()}-r{radius}"
    if (d / "manifest.json").exists():
        try:
            return load_ball(d, p)
        except (PresentationError, OSError, KeyError, ValueError):
            pass
    space = cayley_space(p, radius, budget)
    save_ball(space, d)
    return space
