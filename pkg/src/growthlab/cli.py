"""Command-line interface: ``growthlab <command> --config <file> [flags]``.

The config is an INI file.  Keys in ``[run]`` apply to every command; keys in
the section named after the command override them; flags override both.

Exit codes: 0 success, 2 config error, 3 budget exceeded, 4 assertion failed.
"""

from __future__ import annotations

import argparse
import configparser
import math
import random
import sys
import time
from pathlib import Path

import networkx as nx

from . import words as W
from .contracting import (build_semigroup_tree, check_admissible, choose_alphabet,
                          find_extension_triple, independence_test, verify_bp_bound)
from .errors import (AxiomViolation, BudgetExceeded, ConfigError, GrowthLabError, NoDeepPoint,
                     OrderInconsistent, PresentationError, StrategyMismatch)
from .growth import growth_rate
from .projection import (axis_window, build_projection_complex, build_projection_table,
                         build_quasitree_space, default_Theta, edge_list, interval_set)
from .quotients import (ExperimentConfig, balls_of, convergence_sweep, deepest_segment,
                        injectivity_threshold, mechanism_check, product_experiment,
                        sample_normal_closure)
from .reports import Report, rows_to_csv
from .spaces import DEFAULT_BUDGET, cached_space, cayley_space, census, quotient_presentation

EXIT_CONFIG, EXIT_BUDGET, EXIT_ASSERTION = 2, 3, 4

LOG3 = math.log(3)

CSV_HELP = {
    "growth": "counts.csv: n,sphere,ball; plot.csv: n,log_N,fitted_line",
    "quotient-sweep": "sweep.csv: n,radius,N_counts,delta,oracle,gap,flagged",
    "projcplx": "projections.csv: S,U,V,value (entries above theta); complex.txt: edge list",
    "extension": "injectivity.csv: n,injective,pairs,collision; branches.csv: branch,word,length,admissible,bp",
    "deep-points": "deep_points.csv: index,word,axis,start,length",
    "product": "product.csv: p,measured,predicted,error; balls_p<p>.csv: n,ball",
}


# -- config parsing ---------------------------------------------------------

class Config:
    """Flat key/value view with typed getters; every failure is a ConfigError."""

    def __init__(self, values: dict, base_dir: Path):
        self.values = dict(values)
        self.base_dir = base_dir
        self.used: dict = {}

    def _raw(self, key, default):
        if key in self.values:
            return self.values[key]
        if default is _REQUIRED:
            raise ConfigError(f"missing config key {key!r}")
        return default

    def text(self, key, default=None):
        v = self._raw(key, default)
        self.used[key] = v
        return v

    def integer(self, key, default=None, minimum=1):
        v = self._raw(key, default)
        try:
            x = int(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be an integer, got {v!r}") from None
        if minimum is not None and x < minimum:
            raise ConfigError(f"{key} must be >= {minimum}, got {x}")
        self.used[key] = x
        return x

    def number(self, key, default=None, minimum=None):
        v = self._raw(key, default)
        try:
            x = float(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be a number, got {v!r}") from None
        if minimum is not None and not x >= minimum:
            raise ConfigError(f"{key} must be >= {minimum}, got {x}")
        self.used[key] = x
        return x

    def flag(self, key, default=False):
        v = self._raw(key, default)
        if isinstance(v, bool):
            x = v
        elif str(v).lower() in ("1", "yes", "true", "on"):
            x = True
        elif str(v).lower() in ("0", "no", "false", "off"):
            x = False
        else:
            raise ConfigError(f"{key} must be yes/no, got {v!r}")
        self.used[key] = x
        return x

    def int_range(self, key, default=None):
        """'2-6' or '2, 3, 5' -> list of positive ints."""
        v = str(self._raw(key, default))
        out = []
        try:
            for part in v.replace(",", " ").split():
                if "-" in part:
                    a, b = part.split("-")
                    out.extend(range(int(a), int(b) + 1))
                else:
                    out.append(int(part))
        except ValueError:
            raise ConfigError(f"{key} must be a range like 2-6, got {v!r}") from None
        if not out or min(out) < 1:
            raise ConfigError(f"{key} must list positive integers")
        self.used[key] = out
        return out

    def floats(self, key, default=None):
        v = str(self._raw(key, default))
        try:
            out = [float(x) for x in v.replace(",", " ").split()]
        except ValueError:
            raise ConfigError(f"{key} must list numbers, got {v!r}") from None
        self.used[key] = ["inf" if math.isinf(x) else x for x in out]
        return out

    def words(self, key, default=None):
        v = self._raw(key, default)
        out = [W.parse_word(s) for s in str(v).replace(",", " ").split()]
        self.used[key] = [W.format_word(w) for w in out]
        return out

    def word(self, key, default=None):
        v = self._raw(key, default)
        w = W.parse_word(str(v).strip().strip('"'))
        if not w:
            raise ConfigError(f"{key} must be a nontrivial word")
        self.used[key] = W.format_word(w)
        return w

    def presentation(self, default_free: bool = False) -> W.Presentation:
        if "presentation" in self.values:
            path = Path(self.values["presentation"])
            if not path.is_absolute():
                path = self.base_dir / path
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as e:
                raise ConfigError(f"cannot read presentation file {path}: {e}") from None
            p = W.parse_presentation(text)
        elif "gens" in self.values:
            text = f"gens {self.values['gens']}\n"
            for r in self.values.get("rels", "").replace(",", " ").split():
                text += f"rel {r}\n"
            p = W.parse_presentation(text)
        elif default_free:
            p = W.free_group(2)
        else:
            raise ConfigError("config needs 'presentation' (file) or 'gens'/'rels'")
        self.used["presentation_text"] = W.format_presentation(p)
        return p


_REQUIRED = object()


def load_config(path, command: str, overrides: dict) -> Config:
    parser = configparser.ConfigParser(interpolation=None)
    if path is not None:
        p = Path(path)
        try:
            with open(p, encoding="utf-8") as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as e:
            raise ConfigError(f"cannot read config {p}: {e}") from None
        base = p.parent
    else:
        base = Path.cwd()
    values: dict = {}
    for section in ("run", command):
        if parser.has_section(section):
            values.update(parser.items(section))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Config(values, base)


# -- commands ---------------------------------------------------------------

def cmd_growth(cfg: Config) -> Report:
    p = cfg.presentation()
    radius = cfg.integer("radius", 10)
    method = cfg.text("method", "auto")
    counting = cfg.text("counting", "bfs")
    budget = cfg.integer("budget", DEFAULT_BUDGET)
    if counting == "bfs":
        cache = cfg.values.get("cache")
        space = cached_space(p, radius, cache, budget)
        spheres = space.sphere_counts()
    elif counting == "census":
        spheres = census(p, radius)
    else:
        raise ConfigError(f"counting must be bfs or census, got {counting!r}")
    balls = balls_of(spheres)
    try:
        rep = growth_rate(balls, method)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    rep_json = rep.to_json()
    report = Report("growth", {}, summary={"presentation": str(p), "radius": radius, **rep_json})
    report.tables["counts.csv"] = rows_to_csv(["n", "sphere", "ball"],
                                              [(n, s, b) for n, (s, b) in enumerate(zip(spheres, balls))])
    report.tables["plot.csv"] = rep.plot_csv()
    if p.strategy == W.FREE:
        k = 2 * p.generator_count
        exact = [1] + [k * (k - 1) ** (n - 1) for n in range(1, radius + 1)]
        target = math.log(k - 1) if k > 2 else 0.0
        report.assertions["free-growth"] = spheres == exact and abs(rep.delta - target) <= 1e-9
    if "expect" in cfg.values:
        tol = cfg.number("tolerance", 0.05, minimum=0)
        report.assertions["expected-rate"] = abs(rep.delta - cfg.number("expect")) <= tol
    return report


def cmd_quotient_sweep(cfg: Config) -> Report:
    base = cfg.presentation(default_free=True)
    h = cfg.word("h", "a")
    ns = cfg.int_range("n", "2-6")
    k = cfg.integer("k", 1)
    radius = cfg.integer("radius", 40)
    counting = cfg.text("counting", "census")
    method = cfg.text("method", "auto")
    tol = cfg.number("tolerance", 0.05, minimum=0)
    budget = cfg.integer("budget", DEFAULT_BUDGET)
    for n in ns:
        quotient_presentation(base, [W.power(h, k * n)])   # fail early on bad relators
    sweep = convergence_sweep(h, ns, radius, k, base, counting, method, budget)
    rows = sweep["rows"]
    table = [(r["n"], r["radius"], " ".join(map(str, r["counts"] or [])), r["delta"], r["oracle"],
              r["gap"], r["flagged"]) for r in rows]
    report = Report("quotient-sweep", {}, summary={
        "presentation": str(base), "h": W.format_word(h), "k": k, **sweep["summary"],
        "rows": [{key: r[key] for key in ("n", "delta", "oracle", "gap", "flagged")} for r in rows]})
    report.tables["sweep.csv"] = rows_to_csv(["n", "radius", "N_counts", "delta", "oracle", "gap", "flagged"], table)
    finite = [r for r in rows if r["n"] != "inf" and r["delta"] is not None]
    gaps = [r["gap"] for r in finite]
    report.assertions["non-decreasing"] = sweep["summary"]["non_decreasing"]
    if sweep["summary"]["full_rate"] is not None:
        report.assertions["below-full-rate"] = sweep["summary"]["below_full"]
        report.assertions["gap-decreasing"] = all(a > b for a, b in zip(gaps, gaps[1:]))
    if any(r["oracle"] is not None for r in finite):
        report.assertions["oracle-match"] = all(abs(r["delta"] - r["oracle"]) <= tol
                                                for r in finite if r["oracle"] is not None)
    report.flagged = [r["n"] for r in rows if r["flagged"]]
    return report


def cmd_projcplx(cfg: Config) -> Report:
    p = cfg.presentation(default_free=True)
    h = cfg.word("h", "ab")
    radius = cfg.integer("radius", 8)
    min_axes = cfg.integer("min_axes", 100)
    seed = cfg.integer("seed", 0, minimum=0)
    theta_max = cfg.number("theta_max", 2, minimum=0)
    pairs = cfg.integer("order_pairs", 50, minimum=0)
    order_K = cfg.floats("order_k", "3")
    space = cayley_space(p, radius, cfg.integer("budget", DEFAULT_BUDGET))
    window = axis_window(space, h, min_axes)
    report = Report("projcplx", {})
    try:
        table = build_projection_table(space, window, seed)
    except AxiomViolation as e:
        report.summary = {"axes": len(window), "violation": e.axiom}
        report.assertions["PC0-PC4"] = False
        report.witnesses.append(f"{e.axiom}: {e} witness={e.witness}")
        return report
    Theta = default_Theta(table)
    K = cfg.number("k_complex", Theta, minimum=Theta)
    g = build_projection_complex(table, K)
    rng = random.Random(seed)
    n = len(window)
    inconsistent, nonempty = 0, 0
    for _ in range(pairs):
        u, v = rng.sample(range(n), 2)
        for kk in sorted(set(order_K + [Theta])):
            try:
                iv = interval_set(table, kk, u, v)
                nonempty += bool(iv.members)
            except OrderInconsistent as e:
                inconsistent += 1
                report.witnesses.append(f"OrderInconsistent K={kk} U={window[u].label} "
                                        f"V={window[v].label}: {e} witness={e.witness}")
    summary = {
        "presentation": str(p), "h": W.format_word(h), "axes": n,
        "window_radius": max(len(a.translate) for a in window),
        "theta": table.theta, "Theta": Theta, "K": K, "pc4_census": table.census,
        "pc2_exhaustive": table.pc2_exhaustive,
        "complex_nodes": g.number_of_nodes(), "complex_edges": g.number_of_edges(),
        "complex_connected": nx.is_connected(g),
        "order_pairs": pairs, "order_K": sorted(set(order_K + [Theta])),
        "nonempty_intervals": nonempty, "order_inconsistent": inconsistent,
    }
    if cfg.flag("quasitree", False):
        qn = cfg.integer("qt_axes", 36)
        qK = cfg.number("qt_k", 3, minimum=0)
        qL = cfg.number("qt_l", 4, minimum=0)
        qwin = axis_window(space, h, qn)
        qts = build_quasitree_space(space, qwin, qK, qL, seed=seed)
        summary["quasitree"] = {"axes": len(qwin), "nodes": qts.graph.number_of_nodes(),
                                "edges": qts.graph.number_of_edges(), "distortion": qts.distortion,
                                "four_point_delta": qts.four_point_delta}
    report.summary = summary
    rows = []
    for s in range(n):
        for u in range(n):
            for v in range(n):
                if len({s, u, v}) == 3 and table.values[s, u, v] > table.theta:
                    rows.append((window[s].label, window[u].label, window[v].label, int(table.values[s, u, v])))
    report.tables["projections.csv"] = rows_to_csv(["S", "U", "V", "value"], rows)
    report.tables["complex.txt"] = edge_list(g)
    report.assertions["PC0-PC4"] = True
    report.assertions["theta-bound"] = table.theta <= theta_max
    report.assertions["interval-order"] = inconsistent == 0
    return report


DEFAULT_CANDIDATES = "aB Ab aab abb aaB abB aBB aaab abbb"


def cmd_extension(cfg: Config) -> Report:
    p = cfg.presentation(default_free=True)
    h = cfg.word("h", "ab")
    radius = cfg.integer("radius", 8)
    cands = cfg.words("candidates", DEFAULT_CANDIDATES)
    test_radius = cfg.integer("test_radius", 3)
    letter_length = cfg.integer("letter_length", 5)
    width = cfg.integer("width", 0, minimum=0)
    sep = cfg.integer("separation", 3)
    size = cfg.integer("alphabet_size", 2)
    depth = cfg.integer("depth", 5, minimum=0)
    ns = cfg.int_range("n", "1-16")
    bound = cfg.integer("n_min_bound", 12)
    k = cfg.integer("k", 1)
    mech_n = cfg.integer("mechanism_n", max(ns))
    mech_samples = cfg.integer("mechanism_samples", 10, minimum=0)
    seed = cfg.integer("seed", 0, minimum=0)
    space = cayley_space(p, radius, cfg.integer("budget", DEFAULT_BUDGET))
    indep = [c for c in cands if independence_test(space, h, c)]
    F, tau = find_extension_triple(space, indep, test_radius)
    letters, f = choose_alphabet(space, F, letter_length, width, sep, tau, size)
    if len(letters) < 2:
        raise ConfigError("alphabet has fewer than two letters; widen the annulus")
    tree = build_semigroup_tree(space, letters, f, depth, strict=False)
    thr = injectivity_threshold(tree, h, ns, k, p)
    report = Report("extension", {})
    branch_rows, all_ok = [], True
    for b in sorted(tree.elements, key=lambda b: (len(b), b)):
        if not b:
            continue
        path = tree.paths[b]
        ok = not check_admissible(path)
        all_ok &= ok
        branch_rows.append(("".join(map(str, b)), W.format_word(tree.elements[b]),
                            len(tree.elements[b]), ok, verify_bp_bound(path)))
    summary = {
        "presentation": str(p), "h": W.format_word(h),
        "independent_candidates": [W.format_word(c) for c in indep],
        "triple": [W.format_word(x) for x in F], "tau": tau,
        "alphabet": [W.format_word(a) for a in letters], "connector": W.format_word(f),
        "depth": depth, "elements": len(tree.elements) - 1, "tree_injective": tree.injective,
        "n_min": thr["n_min"], "rows": thr["rows"],
    }
    if mech_samples:
        cfg_x = ExperimentConfig(h, k, mech_n, seed=seed)
        closure = sample_normal_closure(h, k, mech_n, mech_samples, 2, seed)
        mech = mechanism_check(space, tree, h, cfg_x.params, closure)
        summary["mechanism"] = {"n": mech_n, "eps": cfg_x.eps, "M": cfg_x.M,
                                **{key: mech[key] for key in ("closure_deep", "closure_missed", "branches", "disjoint")},
                                "branches_deep": ["".join(map(str, b)) for b in mech["branches_deep"]]}
        report.assertions["mechanism-disjoint"] = mech["disjoint"]
    for r in thr["rows"]:
        if not r["injective"]:
            a, b = r["collision"]
            report.witnesses.append(f"n={r['n']}: branches {a} and {b} coincide: "
                                    f"{W.format_word(tree.elements[tuple(a)])} = {W.format_word(tree.elements[tuple(b)])}")
    report.summary = summary
    report.tables["injectivity.csv"] = rows_to_csv(
        ["n", "injective", "pairs", "collision"],
        [(r["n"], r["injective"], r["pairs"], " ".join("".join(map(str, c)) for c in r["collision"] or []))
         for r in thr["rows"]])
    report.tables["branches.csv"] = rows_to_csv(["branch", "word", "length", "admissible", "bp"], branch_rows)
    report.assertions["injective-above-n-min"] = thr["n_min"] is not None
    report.assertions["n-min-bound"] = thr["n_min"] is not None and thr["n_min"] <= bound
    report.assertions["admissible-branches"] = all_ok
    return report


def cmd_deep_points(cfg: Config) -> Report:
    p = cfg.presentation(default_free=True)
    if p.strategy != W.FREE:
        raise ConfigError("deep-points runs in a free group")
    h = cfg.word("h", "ab")
    k = cfg.integer("k", 1)
    n = cfg.integer("n", 6)
    count = cfg.integer("count", 100, minimum=0)
    factors = cfg.integer("max_factors", 2)
    clen = cfg.integer("conjugator_length", 4, minimum=0)
    seed = cfg.integer("seed", 0, minimum=0)
    eps = cfg.integer("eps", None, minimum=0) if "eps" in cfg.values else None
    M = cfg.number("m", None, minimum=0) if "m" in cfg.values else None
    x = ExperimentConfig(h, k, n, eps, M, seed)
    space = cayley_space(p, cfg.integer("radius", 6))
    samples = sample_normal_closure(h, k, n, count, factors, seed, clen, p.generator_count) if count else []
    rows, misses, witnesses = [], [], []
    for i, g in enumerate(samples):
        try:
            seg = deepest_segment(space, g, h, x.params)
            rows.append((i, W.format_word(g), seg.axis.label, seg.start, seg.length))
        except NoDeepPoint as e:
            misses.append(i)
            rows.append((i, W.format_word(g), "", "", ""))
            witnesses.append(f"sample {i}: no ({x.eps}, {x.M})-deep point on geodesic {e.geodesic}")
    depths = [r[4] for r in rows if r[4] != ""]
    report = Report("deep-points", {}, summary={
        "h": W.format_word(h), "k": k, "n": n, "eps": x.eps, "M": x.M, "relator_length": len(x.relator),
        "samples": len(samples), "deep": len(depths), "missed": len(misses),
        "min_depth": min(depths, default=None), "max_depth": max(depths, default=None)})
    report.witnesses.extend(witnesses)
    report.tables["deep_points.csv"] = rows_to_csv(["index", "word", "axis", "start", "length"], rows)
    report.assertions["deep-points"] = not misses and all(d >= 2 * x.M for d in depths)
    return report


def cmd_product(cfg: Config) -> Report:
    p = cfg.presentation(default_free=True)
    copies = cfg.integer("copies", 2)
    radius = cfg.integer("radius", 14)
    ps = cfg.floats("p", "1 2 inf")
    tol = cfg.number("tolerance", 0.05, minimum=0)
    rel = cfg.words("relator", "") if cfg.values.get("relator") else []
    if any(q < 1 for q in ps):
        raise ConfigError("p must be >= 1")
    factor = (p, rel) if rel else p
    report = Report("product", {})
    rows, results = [], []
    for q in ps:
        res = product_experiment([factor] * copies, q, radius)
        results.append(res)
        name = "inf" if math.isinf(q) else f"{q:g}"
        rows.append((name, res["measured"], res["predicted"], res["error"]))
        report.tables[f"balls_p{name}.csv"] = rows_to_csv(["n", "ball"], enumerate(res["ball_counts"]))
    report.summary = {"factor": str(p), "relator": [W.format_word(r) for r in rel], "copies": copies,
                      "radius": radius,
                      "results": [{k: v for k, v in r.items() if k != "ball_counts"} for r in results]}
    report.tables["product.csv"] = rows_to_csv(["p", "measured", "predicted", "error"], rows)
    if rel:
        report.assertions["quotient-domination"] = all(r["measured"] >= r["predicted"] - tol for r in results)
    else:
        report.assertions["lq-norm"] = all(abs(r["error"]) <= tol for r in results)
    conv = [r["convolution_identity"] for r in results if "convolution_identity" in r]
    if conv:
        report.assertions["convolution-identity"] = all(conv)
    return report


COMMANDS = {
    "growth": cmd_growth,
    "quotient-sweep": cmd_quotient_sweep,
    "projcplx": cmd_projcplx,
    "extension": cmd_extension,
    "deep-points": cmd_deep_points,
    "product": cmd_product,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="growthlab", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=CSV_HELP[name], description=f"Outputs: {CSV_HELP[name]}")
        sp.add_argument("--config", help="INI config file")
        sp.add_argument("--out", default=None, help="output directory (default: ./out/<command>)")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--radius", type=int, default=None)
        sp.add_argument("--budget", type=int, default=None)
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key")
    return ap


def run(argv=None) -> tuple[int, Report | None]:
    args = build_parser().parse_args(argv)
    try:
        overrides = {"seed": args.seed, "radius": args.radius, "budget": args.budget}
        for item in args.set:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            overrides[key.strip().lower()] = value.strip()
        cfg = load_config(args.config, args.command, overrides)
        started = time.time()
        report = COMMANDS[args.command](cfg)
        report.started = started
    except (ConfigError, PresentationError, StrategyMismatch) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG, None
    except BudgetExceeded as e:
        print(f"budget exceeded (complete radius {e.partial_radius}): {e}", file=sys.stderr)
        return EXIT_BUDGET, None
    except (GrowthLabError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG, None
    report.config = cfg.used
    out = Path(args.out) if args.out else Path("out") / args.command
    report.write(out)
    for name, ok in report.assertions.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"report written to {out / 'report.json'}")
    if report.flagged:
        return EXIT_BUDGET, report
    return (0 if report.passed else EXIT_ASSERTION), report


def main(argv=None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
