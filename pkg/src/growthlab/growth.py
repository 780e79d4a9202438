"""Growth rates from ball counts, exact series oracles, annuli and nets."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DegenerateGrowth, InsufficientData, Unexplored

METHODS = ("tail-slope", "ratio", "exact-recurrence", "auto", "smoothed-tail-slope")


@dataclass
class GrowthReport:
    counts: list
    delta: float
    method: str
    window: tuple
    diagnostics: dict = field(default_factory=dict)
    oracle: float | None = None
    residuals: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "counts": [int(c) if float(c).is_integer() else float(c) for c in self.counts],
            "delta": self.delta,
            "method": self.method,
            "window": list(self.window),
            "oracle": self.oracle,
            "residuals": [round(r, 12) for r in self.residuals],
            "diagnostics": self.diagnostics,
        }

    def plot_csv(self) -> str:
        """Columns n, log_N, fitted_line (fitted only inside the window)."""
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["n", "log_N", "fitted_line"])
        line = self.diagnostics.get("line")
        for n, c in enumerate(self.counts):
            fit = ""
            if line and self.window[0] <= n <= self.window[1]:
                fit = f"{line[0] * n + line[1]:.12g}"
            wr.writerow([n, f"{math.log(c):.12g}", fit])
        return buf.getvalue()


def spheres_from_balls(balls: Sequence) -> list:
    return [balls[0]] + [balls[i] - balls[i - 1] for i in range(1, len(balls))]


def fekete_bound(balls: Sequence) -> float:
    """min over r >= 1 of log N(r) / r, an upper bound for the rate."""
    return min(math.log(balls[r]) / r for r in range(1, len(balls)))


def fit_log_counts(radii, counts, log_correction: bool = False):
    """Least squares for log N(r) ~ delta r [+ kappa log r] + c.

    Returns (delta, kappa, intercept, residuals).
    """
    r = np.asarray(radii, dtype=float)
    y = np.log(np.asarray([float(c) for c in counts]))
    cols = [r, np.ones_like(r)]
    if log_correction:
        cols.insert(1, np.log(np.maximum(r, 1e-300)))
    A = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    if log_correction:
        return float(coef[0]), float(coef[1]), float(coef[2]), resid.tolist()
    return float(coef[0]), 0.0, float(coef[1]), resid.tolist()


def berlekamp_massey(seq: Sequence[int]) -> list[Fraction]:
    """Shortest recurrence s[n] = sum c[i] s[n-1-i] over the rationals."""
    s = [Fraction(int(x)) for x in seq]
    c, b = [Fraction(1)], [Fraction(1)]
    length, m, bd = 0, 1, Fraction(1)
    for n in range(len(s)):
        d = s[n] + sum(c[i] * s[n - i] for i in range(1, length + 1))
        if d == 0:
            m += 1
            continue
        coef = d / bd
        t = list(c)
        c = c + [Fraction(0)] * (len(b) + m - len(c))
        for i, bi in enumerate(b):
            c[i + m] -= coef * bi
        if 2 * length <= n:
            length, b, bd, m = n + 1 - length, t, d, 1
        else:
            m += 1
    c = c + [Fraction(0)] * (length + 1 - len(c))
    return [-x for x in c[1: length + 1]]


def find_recurrence(spheres: Sequence[int], verify: int = 2):
    """Minimal recurrence that is confirmed by ``verify`` extra terms, or None."""
    coeffs = berlekamp_massey(spheres)
    order = len(coeffs)
    if 2 * order + verify > len(spheres):
        return None
    if any(c.denominator != 1 for c in coeffs):
        return None
    return [int(c) for c in coeffs]


def dominant_root(coeffs: Sequence[int]) -> float:
    if not coeffs:
        return 0.0
    # x^L - c1 x^{L-1} - ... - cL
    roots = np.roots([1.0] + [-float(c) for c in coeffs])
    return float(max(abs(roots))) if roots.size else 0.0


def growth_rate(counts: Sequence, method: str = "auto", window=None,
                log_correction: bool = False) -> GrowthReport:
    """Estimate the exponential growth rate (natural log units) of ball counts."""
    if method not in METHODS or method == "smoothed-tail-slope":
        raise ValueError(f"unknown method {method!r}")
    counts = list(counts)
    if len(counts) < 4:
        raise InsufficientData("need at least 4 ball counts")
    if any(c <= 0 for c in counts):
        raise InsufficientData("ball counts must be positive")
    R = len(counts) - 1
    monotone = all(counts[i] <= counts[i + 1] for i in range(R))
    diag = {"fekete_upper_bound": fekete_bound(counts), "monotone": monotone}
    spheres = spheres_from_balls(counts)

    if method in ("exact-recurrence", "auto"):
        integral = all(float(c).is_integer() for c in counts)
        rec = find_recurrence([int(c) for c in spheres]) if integral else None
        if rec is not None:
            rho = dominant_root(rec)
            delta = max(math.log(rho), 0.0) if rho > 0 else 0.0
            diag["recurrence"] = rec
            diag["dominant_root"] = rho
            return GrowthReport(counts, delta, "exact-recurrence", (0, R), diag)
        if method == "exact-recurrence":
            raise InsufficientData("no integer recurrence confirmed by the available terms")

    if method == "ratio":
        a, b = spheres[-2], spheres[-1]
        delta = math.log(b / a) if a > 0 and b > 0 else 0.0
        return GrowthReport(counts, max(delta, 0.0), "ratio", (R - 1, R), diag)

    lo, hi = window if window is not None else (R // 2, R)
    if hi - lo < 2:
        lo = max(0, hi - 2)
    rs = list(range(max(lo, 1 if log_correction else 0), hi + 1))
    slope, kappa, icpt, resid = fit_log_counts(rs, [counts[r] for r in rs], log_correction)
    diag["line"] = [slope, icpt]
    diag["max_abs_residual"] = max(abs(x) for x in resid)
    diag["nonlinear"] = diag["max_abs_residual"] > 0.05
    if log_correction:
        diag["log_coefficient"] = kappa
    return GrowthReport(counts, max(slope, 0.0), "tail-slope", (rs[0], rs[-1]), diag,
                        residuals=resid)


def product_growth_rate(space, sigma: float = 0.5, points: int = 60) -> GrowthReport:
    """Rate of an L^p product from Gaussian-smoothed ball counts.

    Ball sizes of a product carry a polynomial prefactor r^kappa besides the
    exponential term, which biases a plain slope fit at desk-scale radii, so
    the fit includes a log r term.  Smoothing at scale ``sigma`` removes the
    lattice jitter of integer radii for general p.
    """
    R = space.explored_radius
    top = R - 5 * sigma
    if top < 4:
        raise InsufficientData("product explored radius too small to smooth")
    rs = np.linspace(top / 2, top, points)
    Ns = space.smoothed_ball_counts(rs, sigma)
    slope, kappa, icpt, resid = fit_log_counts(rs, Ns, log_correction=True)
    balls = space.ball_counts()
    diag = {
        "sigma": sigma,
        "log_coefficient": kappa,
        "fekete_upper_bound": fekete_bound(balls),
        "max_abs_residual": max(abs(x) for x in resid),
        "p": space.p,
    }
    return GrowthReport(balls, max(slope, 0.0), "smoothed-tail-slope",
                        (float(rs[0]), float(rs[-1])), diag, residuals=resid)


# -- exact series for free products of cyclic groups ------------------------

def cyclic_sphere_polynomial(n: int):
    """(numerator, denominator) coefficient lists, lowest degree first."""
    if n == 0:
        return [1, 1], [1, -1]
    if n == 1:
        return [1], [1]
    coeffs = [1]
    for k in range(1, n // 2 + 1):
        coeffs.append(1 if 2 * k == n else 2)
    return coeffs, [1]


def free_product_series(cyclic_orders: Sequence[int]):
    """F = prod P_i / D for factors with spherical series P_i / Q_i."""
    parts = [cyclic_sphere_polynomial(int(n)) for n in cyclic_orders]
    m = len(parts)
    num = np.array([1.0])
    for p, _ in parts:
        num = P.polymul(num, p)
    den = -(m - 1) * num
    for i, (_, q) in enumerate(parts):
        term = np.array(q, dtype=float)
        for j, (p, _) in enumerate(parts):
            if j != i:
                term = P.polymul(term, p)
        den = P.polyadd(den, term)
    return num, np.trim_zeros(den, "b")


class FlaggedRate(float):
    """A float carrying a ``degenerate`` flag."""

    degenerate = False


def _bisect(f, lo, hi, tol=1e-12):
    flo = f(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def smallest_pole(den) -> float | None:
    """Smallest root of the denominator in (0, 1), refined by bisection."""
    f = lambda t: float(P.polyval(t, den))
    roots = P.polyroots(den) if len(den) > 1 else []
    cands = sorted(r.real for r in roots if abs(r.imag) < 1e-9 and 1e-12 < r.real < 1 - 1e-12)
    if not cands:
        return None
    r = cands[0]
    lo, hi = max(r - 1e-6, 1e-15), min(r + 1e-6, 1 - 1e-15)
    if f(lo) * f(hi) < 0:
        return _bisect(f, lo, hi)
    return r


def exact_free_product_rate(cyclic_orders: Sequence[int], strict: bool = False) -> float:
    """Growth rate of a free product of cyclic groups (0 = infinite cyclic).

    Uses 1/F = sum 1/f_i - (m - 1) for spherical growth series and returns
    -log of the smallest positive pole.  Without a pole in (0, 1) the group
    grows subexponentially: the result is 0 with ``degenerate`` set, or
    DegenerateGrowth when ``strict``.
    """
    if len(cyclic_orders) < 2:
        raise ValueError("need at least two factors")
    _, den = free_product_series(cyclic_orders)
    pole = smallest_pole(den)
    if pole is None:
        if strict:
            raise DegenerateGrowth(f"free product {tuple(cyclic_orders)} has no pole in (0, 1)")
        out = FlaggedRate(0.0)
        out.degenerate = True
        return out
    return FlaggedRate(-math.log(pole))


def lq_norm_rate(deltas: Sequence[float], p: float) -> float:
    """||(delta_i)||_q with 1/p + 1/q = 1."""
    if p < 1:
        raise ValueError("p must lie in [1, inf]")
    ds = [float(d) for d in deltas]
    if any(d < 0 for d in ds):
        raise ValueError("growth rates are non-negative")
    if p == 1:
        return max(ds, default=0.0)
    if math.isinf(p):
        return sum(ds)
    q = p / (p - 1)
    return sum(d ** q for d in ds) ** (1 / q)


# -- annuli and separated nets ---------------------------------------------

@dataclass(frozen=True)
class AnnulusSet:
    n: int
    width: int
    ids: tuple

    def __len__(self):
        return len(self.ids)


def annulus(space, n: int, width: int) -> AnnulusSet:
    """Elements g with |d(o, g o) - n| <= width."""
    if n + width > space.explored_radius:
        raise Unexplored(f"annulus reaches radius {n + width}, explored {space.explored_radius}")
    lo = space.layer_starts[max(0, n - width)]
    hi = space.layer_starts[n + width + 1]
    return AnnulusSet(n, width, tuple(range(lo, hi)))


def separated_net(space, ids, C: int) -> tuple:
    """Greedy maximal subset with pairwise distance > C, scanned in id order."""
    ids = list(ids)
    if C <= 0:
        return tuple(ids)
    chosen: list[int] = []
    for x in ids:
        if not chosen or space.distance_matrix([x], chosen).min() > C:
            chosen.append(x)
    return tuple(chosen)


def exponential_constant_range(balls: Sequence, delta: float, start: int = 1):
    """(min, max) of N(r) / exp(delta r), the measured constant of N ~ exp(delta r)."""
    vals = [balls[r] / math.exp(delta * r) for r in range(start, len(balls))]
    return min(vals), max(vals)
