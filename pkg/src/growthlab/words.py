"""Words, presentations and word-problem engines.

A word is a tuple of non-zero ints: ``k`` stands for the k-th generator and
``-k`` for its inverse.  In text, generators are the letters ``a, b, c, ...``
and upper case letters are inverses, so ``"abAB"`` is ``(1, 2, -1, -2)``.

Four engines are supported:

``free``
    free reduction only.
``free-product-of-cyclics``
    relators are powers of single generators; normal forms are syllable
    sequences with exponents in a balanced range.
``c-prime-one-sixth``
    Dehn's algorithm for relator sets satisfying C'(1/6).
``direct-product``
    a product of presentations on disjoint generator blocks.
"""

from __future__ import annotations

import hashlib
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import PresentationError, StrategyMismatch, TrivialWord

Word = tuple

FREE = "free"
FREE_PRODUCT = "free-product-of-cyclics"
SMALL_CANCELLATION = "c-prime-one-sixth"
DIRECT_PRODUCT = "direct-product"
STRATEGIES = (FREE, FREE_PRODUCT, SMALL_CANCELLATION, DIRECT_PRODUCT)


# -- letters and words ------------------------------------------------------

def letter_key(x: int) -> int:
    """Sort key for letters: a < A < b < B < ..."""
    return 2 * abs(x) - (2 if x > 0 else 1)


def shortlex_key(w: Sequence[int]):
    return (len(w), tuple(letter_key(x) for x in w))


def alphabet(generator_count: int) -> list[int]:
    """Letters of a presentation in ShortLex order."""
    out = []
    for i in range(1, generator_count + 1):
        out.extend((i, -i))
    return out


def parse_word(text: str) -> Word:
    text = text.strip()
    if text in ("", "1", "e", '""'):
        return ()
    out = []
    for ch in text:
        if ch in string.ascii_lowercase:
            out.append(ord(ch) - 96)
        elif ch in string.ascii_uppercase:
            out.append(-(ord(ch) - 64))
        else:
            raise PresentationError(f"bad letter {ch!r} in word {text!r}")
    return tuple(out)


def format_word(w: Sequence[int]) -> str:
    return "".join(chr(96 + x) if x > 0 else chr(64 - x) for x in w)


def as_word(w) -> Word:
    if isinstance(w, str):
        return parse_word(w)
    return tuple(w)


def inverse(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def free_reduce(w: Sequence[int]) -> Word:
    out: list[int] = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def multiply(*words: Sequence[int]) -> Word:
    out: list[int] = []
    for w in words:
        for x in w:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
    return tuple(out)


def join_reduced(a: Word, b: Word) -> Word:
    """Product of two freely reduced words, cancelling only at the junction."""
    k = 0
    n = min(len(a), len(b))
    while k < n and a[len(a) - 1 - k] == -b[k]:
        k += 1
    return a[:len(a) - k] + b[k:]


def power(w: Sequence[int], k: int) -> Word:
    if k < 0:
        return free_reduce(inverse(w) * -k)
    return free_reduce(tuple(w) * k)


def cyclic_reduce(w: Sequence[int]) -> tuple[Word, Word]:
    """Split a word as ``c * core * c^-1`` with ``core`` cyclically reduced."""
    r = free_reduce(w)
    i = 0
    while i < len(r) - 1 - i and r[i] == -r[len(r) - 1 - i]:
        i += 1
    return r[i:len(r) - i], r[:i]


def primitive_root(w: Sequence[int]) -> tuple[Word, int]:
    n = len(w)
    for d in range(1, n + 1):
        if n % d == 0 and tuple(w[:d]) * (n // d) == tuple(w):
            return tuple(w[:d]), n // d
    return tuple(w), 1


def cyclic_reduce_and_root(w) -> tuple[Word, int, Word]:
    """Return ``(root, k, c)`` with ``w = c root^k c^-1`` in the free group.

    ``root`` is cyclically reduced and not a proper power.

    >>> [format_word(x) if isinstance(x, tuple) else x
    ...  for x in cyclic_reduce_and_root("baaB")]
    ['a', 2, 'b']
    """
    core, conj = cyclic_reduce(as_word(w))
    if not core:
        raise TrivialWord(f"{format_word(as_word(w))!r} is trivial in the free group")
    root, k = primitive_root(core)
    return root, k, conj


def cyclic_shifts(w: Sequence[int]) -> list[Word]:
    w = tuple(w)
    return [w[i:] + w[:i] for i in range(len(w))]


def symmetrized(relators: Iterable[Sequence[int]]) -> list[Word]:
    """All cyclic shifts of the relators and their inverses, deduplicated."""
    seen = set()
    out = []
    for r in relators:
        for s in cyclic_shifts(r) + cyclic_shifts(inverse(r)):
            if s not in seen:
                seen.add(s)
                out.append(s)
    return out


def _common_prefix(u: Sequence[int], v: Sequence[int]) -> int:
    n = 0
    for x, y in zip(u, v):
        if x != y:
            break
        n += 1
    return n


def max_piece(relators) -> int:
    """Longest common prefix of two distinct words of the symmetrized closure.

    Accepts a single relator (word or string) or a collection of relators.
    """
    if isinstance(relators, str) or (relators and isinstance(next(iter(relators)), int)):
        relators = [relators]
    sym = symmetrized(as_word(r) for r in relators)
    best = 0
    sym.sort()
    # the longest common prefix among a set is realised by lexicographic neighbours
    for u, v in zip(sym, sym[1:]):
        best = max(best, _common_prefix(u, v))
    return best


# -- presentations ----------------------------------------------------------

@dataclass(frozen=True)
class Presentation:
    generator_count: int
    relators: tuple = ()
    strategy: str = FREE
    factors: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "relators", tuple(free_reduce(as_word(r)) for r in self.relators))
        if self.strategy not in STRATEGIES:
            raise PresentationError(f"unknown strategy {self.strategy!r}")
        if not 1 <= self.generator_count <= 26:
            raise PresentationError("generator_count must be between 1 and 26")
        for r in self.relators:
            if not r:
                raise PresentationError("empty relator")
            if any(abs(x) > self.generator_count for x in r):
                raise PresentationError(f"relator {format_word(r)} uses an unknown generator")
            if cyclic_reduce(r)[1]:
                raise PresentationError(f"relator {format_word(r)} is not cyclically reduced")
        _validate_strategy(self)

    @property
    def letters(self) -> list[int]:
        return alphabet(self.generator_count)

    @property
    def piece_free(self) -> bool:
        return self.strategy != SMALL_CANCELLATION or max_piece(self.relators) == 0

    def factor_offsets(self) -> list[int]:
        offsets, total = [], 0
        for f in self.factors:
            offsets.append(total)
            total += f.generator_count
        return offsets

    def fingerprint(self) -> str:
        return hashlib.sha256(format_presentation(self).encode()).hexdigest()[:16]

    def __str__(self):
        if self.strategy == DIRECT_PRODUCT:
            return " x ".join(str(f) for f in self.factors)
        gens = " ".join(string.ascii_lowercase[: self.generator_count])
        rels = ", ".join(format_word(r) for r in self.relators)
        return f"<{gens} | {rels}>"


def _validate_strategy(p: Presentation):
    if p.strategy == FREE and p.relators:
        raise StrategyMismatch("free presentations carry no relators")
    if p.strategy == FREE_PRODUCT:
        seen = set()
        for r in p.relators:
            g = abs(r[0])
            if any(x != r[0] for x in r):
                raise StrategyMismatch(f"{format_word(r)} is not a power of one generator")
            if g in seen:
                raise StrategyMismatch("at most one relator per generator")
            seen.add(g)
    if p.strategy == SMALL_CANCELLATION:
        if not p.relators:
            raise StrategyMismatch("c-prime-one-sixth needs at least one relator")
        piece = max_piece(p.relators)
        shortest = min(len(r) for r in p.relators)
        if not 6 * piece < shortest:
            raise StrategyMismatch(
                f"relators fail C'(1/6): max piece {piece} vs shortest relator {shortest}")
    if p.strategy == DIRECT_PRODUCT:
        if not p.factors:
            raise StrategyMismatch("direct-product needs factor presentations")
        if sum(f.generator_count for f in p.factors) != p.generator_count:
            raise PresentationError("factor generator counts do not add up")
        if p.relators:
            raise PresentationError("relators of a direct product live in its factors")
    elif p.factors:
        raise PresentationError("only direct-product presentations have factors")


def free_group(rank: int = 2) -> Presentation:
    return Presentation(rank)


def one_relator(relators, generator_count: int = 2) -> Presentation:
    """A presentation whose engine is picked from the shape of its relators."""
    rels = [free_reduce(as_word(r)) for r in relators]
    rels = [r for r in rels if r]
    if not rels:
        return Presentation(generator_count)
    single = all(len(set(r)) == 1 for r in rels) and len({abs(r[0]) for r in rels}) == len(rels)
    if single:
        return Presentation(generator_count, tuple(rels), FREE_PRODUCT)
    return Presentation(generator_count, tuple(rels), SMALL_CANCELLATION)


def direct_product(*factors: Presentation) -> Presentation:
    return Presentation(sum(f.generator_count for f in factors), (), DIRECT_PRODUCT, tuple(factors))


def parse_presentation(text: str) -> Presentation:
    """Parse the text format: ``gens a b`` / ``rel <word>`` / ``strategy <tag>``.

    Several ``gens`` lines describe a direct product; the letters of each block
    must continue the alphabet where the previous block stopped.
    """
    blocks: list[tuple[list[int], list[Word], str | None]] = []
    strategy = None
    next_letter = 1
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "gens":
            letters = rest.split()
            if not letters:
                raise PresentationError(f"line {lineno}: no generators")
            idx = []
            for s in letters:
                w = parse_word(s)
                if len(w) != 1 or w[0] < 0:
                    raise PresentationError(f"line {lineno}: bad generator {s!r}")
                idx.append(w[0])
            if idx != list(range(next_letter, next_letter + len(idx))):
                raise PresentationError(f"line {lineno}: generators must continue the alphabet")
            next_letter += len(idx)
            blocks.append((idx, [], None))
        elif key == "rel":
            if not blocks:
                raise PresentationError(f"line {lineno}: rel before gens")
            w = parse_word(rest.strip('"'))
            lo, hi = blocks[-1][0][0], blocks[-1][0][-1]
            if any(not lo <= abs(x) <= hi for x in w):
                raise PresentationError(f"line {lineno}: relator leaves its generator block")
            blocks[-1][1].append(w)
        elif key == "strategy":
            if rest not in STRATEGIES:
                raise PresentationError(f"line {lineno}: unknown strategy {rest!r}")
            strategy = rest
        else:
            raise PresentationError(f"line {lineno}: unknown directive {key!r}")
    if not blocks:
        raise PresentationError("no gens line")

    def build(idx, rels, strat):
        shift = idx[0] - 1
        local = [tuple(x - shift if x > 0 else x + shift for x in r) for r in rels]
        if strat is None:
            return one_relator(local, len(idx))
        return Presentation(len(idx), tuple(local), strat)

    if len(blocks) == 1:
        idx, rels, _ = blocks[0]
        if strategy == DIRECT_PRODUCT:
            raise PresentationError("direct-product needs at least two gens blocks")
        return build(idx, rels, strategy)
    if strategy not in (None, DIRECT_PRODUCT):
        raise PresentationError("several gens blocks describe a direct product")
    return direct_product(*(build(idx, rels, None) for idx, rels, _ in blocks))


def load_presentation(path) -> Presentation:
    return parse_presentation(Path(path).read_text(encoding="utf-8"))


def format_presentation(p: Presentation) -> str:
    lines = []
    if p.strategy == DIRECT_PRODUCT:
        for f, off in zip(p.factors, p.factor_offsets()):
            lines.append("gens " + " ".join(chr(97 + off + i) for i in range(f.generator_count)))
            for r in f.relators:
                lines.append("rel " + format_word(_shift(r, off)))
        lines.append(f"strategy {DIRECT_PRODUCT}")
    else:
        lines.append("gens " + " ".join(chr(97 + i) for i in range(p.generator_count)))
        for r in p.relators:
            lines.append("rel " + format_word(r))
        lines.append(f"strategy {p.strategy}")
    return "\n".join(lines) + "\n"


def _shift(w: Sequence[int], off: int) -> Word:
    return tuple(x + off if x > 0 else x - off for x in w)


def split_factors(w: Sequence[int], p: Presentation) -> list[Word]:
    """Project a word of a direct product onto each factor (local letters)."""
    parts: list[list[int]] = [[] for _ in p.factors]
    offsets = p.factor_offsets()
    for x in w:
        g = abs(x)
        for i in range(len(offsets) - 1, -1, -1):
            if g > offsets[i]:
                parts[i].append(x - offsets[i] if x > 0 else x + offsets[i])
                break
    return [tuple(part) for part in parts]


# -- Dehn's algorithm -------------------------------------------------------

class _RelatorIndex:
    """Symmetrized relators indexed by first letter, with half-length data."""

    def __init__(self, relators):
        self.by_first: dict[int, list[Word]] = {}
        for s in symmetrized(relators):
            self.by_first.setdefault(s[0], []).append(s)

    def longest_at(self, w: Sequence[int], i: int):
        """Longest prefix of ``w[i:]`` that is more than half of a relator."""
        best = None
        for s in self.by_first.get(w[i], ()):
            m = len(s)
            n = _common_prefix(w[i:i + m], s)
            if 2 * n > m and (best is None or n > best[0]):
                best = (n, s)
        return best


_INDEX_CACHE: dict[tuple, _RelatorIndex] = {}


def _index(relators) -> _RelatorIndex:
    key = tuple(relators)
    idx = _INDEX_CACHE.get(key)
    if idx is None:
        idx = _INDEX_CACHE[key] = _RelatorIndex(relators)
    return idx


def dehn_reduce(w: Sequence[int], relators) -> Word:
    """Dehn's algorithm without strategy checks.

    Scans left to right for the first position carrying more than half of a
    symmetrized relator, replaces the longest such subword by its complement
    and starts again from the front.
    """
    idx = _index(relators)
    w = free_reduce(w)
    while True:
        for i in range(len(w)):
            hit = idx.longest_at(w, i)
            if hit is not None:
                n, s = hit
                w = multiply(w[:i], inverse(s[n:]), w[i + n:])
                break
        else:
            return w


def dehn_normalize(w, p: Presentation) -> Word:
    if p.strategy != SMALL_CANCELLATION:
        raise StrategyMismatch(f"Dehn's algorithm needs {SMALL_CANCELLATION}, got {p.strategy}")
    return dehn_reduce(as_word(w), p.relators)


def _minimize_halves(w: Word, relators) -> Word:
    """Swap exact half-relator subwords for their ShortLex-smaller complements.

    For piece-free relators the half-relator occurrences of a geodesic word
    are disjoint and every geodesic word for the same element is obtained by
    swapping some of them, so this lands on the ShortLex-least geodesic.
    """
    idx = _index(relators)
    out = list(w)
    i = 0
    while i < len(out):
        swapped = False
        for s in idx.by_first.get(out[i], ()):
            m = len(s)
            if m % 2:
                continue
            h = m // 2
            if tuple(out[i:i + h]) == s[:h]:
                comp = inverse(s[h:])
                if shortlex_key(comp) < shortlex_key(s[:h]):
                    out[i:i + h] = comp
                i += h
                swapped = True
                break
        if not swapped:
            i += 1
    return tuple(out)


def _syllable_form(w: Sequence[int], orders: dict[int, int]) -> Word:
    """Normal form in a free product of cyclic groups (orders[g] = 0 for Z)."""
    syl: list[list[int]] = []  # [generator, exponent]
    for x in free_reduce(w):
        g, e = abs(x), (1 if x > 0 else -1)
        if syl and syl[-1][0] == g:
            syl[-1][1] += e
        else:
            syl.append([g, e])
        n = orders.get(g, 0)
        if n:
            syl[-1][1] %= n
        if syl[-1][1] == 0:
            syl.pop()
    out: list[int] = []
    for g, e in syl:
        n = orders.get(g, 0)
        if n and e > n // 2:
            e -= n
        out.extend([g] * e if e > 0 else [-g] * -e)
    return tuple(out)


def _cyclic_orders(p: Presentation) -> dict[int, int]:
    return {abs(r[0]): len(r) for r in p.relators}


def canonical_form(w, p: Presentation) -> Word:
    """ShortLex-least geodesic word equal to ``w`` in the group of ``p``."""
    w = as_word(w)
    if p.strategy == FREE:
        return free_reduce(w)
    if p.strategy == FREE_PRODUCT:
        # regroup syllables, then reduce: a syllable can collapse and merge its neighbours
        prev = None
        cur = free_reduce(w)
        while cur != prev:
            prev, cur = cur, _syllable_form(cur, _cyclic_orders(p))
        return cur
    if p.strategy == SMALL_CANCELLATION:
        if not p.piece_free:
            raise StrategyMismatch("canonical forms need a piece-free relator set")
        return _minimize_halves(dehn_reduce(w, p.relators), p.relators)
    parts = split_factors(w, p)
    out: list[int] = []
    for f, off, part in zip(p.factors, p.factor_offsets(), parts):
        out.extend(_shift(canonical_form(part, f), off))
    return tuple(out)


def is_trivial(w, p: Presentation) -> bool:
    w = as_word(w)
    if p.strategy == SMALL_CANCELLATION:
        return not dehn_reduce(w, p.relators)
    if p.strategy == DIRECT_PRODUCT:
        return all(is_trivial(part, f) for f, part in zip(p.factors, split_factors(w, p)))
    return not canonical_form(w, p)


def equal_in_group(u, v, p: Presentation) -> bool:
    return is_trivial(multiply(as_word(u), inverse(as_word(v))), p)


class InternTable:
    """Dense integer ids for canonical forms.

    ``intern`` is the single write path; ids depend only on the order of
    first insertion, so callers that insert in a fixed order get fixed ids.
    """

    def __init__(self, presentation: Presentation):
        self.presentation = presentation
        self._ids: dict[Word, int] = {}
        self._words: list[Word] = []

    def intern(self, w) -> int:
        c = canonical_form(w, self.presentation)
        i = self._ids.get(c)
        if i is None:
            i = self._ids[c] = len(self._words)
            self._words.append(c)
        return i

    def word(self, i: int) -> Word:
        return self._words[i]

    def __len__(self):
        return len(self._words)
