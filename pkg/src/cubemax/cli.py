"""Command-line interface: ``cubemax <command> <action> [options]``.

Exit status is 0 when every requested check passes, 1 when a check fails
and 2 on usage, configuration or input errors.  Reports are JSON documents
with a schema version, the resolved configuration and one entry per claim.
"""

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from importlib import metadata

import numpy as np

from . import comparison as cmp
from . import games, krawtchouk, maximal
from ._validation import check_dimension
from .cube import read_cube_function, sphere_means_all, wht, write_cube_function
from .estimators import FAMILIES, make_family
from .exceptions import CubemaxError
from .reports import SCHEMA_VERSION, CheckReport, to_jsonable

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "n": None,
    "n_max": None,
    "seed": 0,
    "threads": 1,
    "out": None,
    "format": "json",
    "tolerance": None,
    "grid_points": 64,
    "restarts": 32,
    "budget": 2000,
}

ACTIONS = {
    "krawtchouk": ("table", "verify", "roots", "decay"),
    "norm": ("estimate", "exhaustive", "l1", "weak"),
    "verify": ("abel", "diff", "stein", "truncate", "ncompare", "binomlb", "ergodic",
               "chain"),
    "game": ("profile", "center", "exhaustive", "anneal"),
    "transform": ("wht", "spheres"),
}


class UsageError(Exception):
    """Bad flags or configuration; maps to exit status 2."""


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _common(p):
    p.add_argument("--n", type=int, help="cube dimension")
    p.add_argument("--n-max", type=int, dest="n_max", help="largest dimension of a range")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--threads", type=int, help="worker threads (default 1)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), help="output format")
    p.add_argument("--tolerance", type=float, help="override the check tolerance")
    p.add_argument("--grid-points", type=int, dest="grid_points",
                   help="points on continuous-index grids (default 64)")
    p.add_argument("--restarts", type=int, help="ascent restarts (default 32)")
    p.add_argument("--budget", type=int, help="annealing moves (default 2000)")
    p.add_argument("--config", help="JSON file of option defaults; flags take precedence")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cubemax", description="Maximal operators on the Boolean hypercube.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, actions in ACTIONS.items():
        p = sub.add_parser(command)
        p.add_argument("action", choices=actions)
        _common(p)
        if command == "norm":
            p.add_argument("--family", choices=FAMILIES, default="spherical")
            p.add_argument("--witness", help="write the witness function here")
        if command == "game":
            p.add_argument("--marking", help="marking JSON file")
            p.add_argument("--x", type=int, default=0, help="center vertex for 'profile'")
            p.add_argument("--m", type=int, help="marking size")
        if command == "transform":
            p.add_argument("--input", required=True, help="CUBEFN01 binary or JSON function")
        if command == "krawtchouk":
            p.add_argument("--k-range", choices=("all", "half"), default="all",
                           dest="k_range", help="radii checked by 'roots'")
    p = sub.add_parser("suite", help="all conformance checks for n <= n-max")
    _common(p)
    return parser


def resolve_config(args):
    """Merge defaults, the optional JSON config file and explicit flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(file_cfg)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg["command"] = args.command
    cfg["action"] = getattr(args, "action", None)
    for key in ("family", "marking", "x", "m", "input", "k_range", "witness"):
        if hasattr(args, key):
            cfg[key] = getattr(args, key)
    if cfg["threads"] < 1:
        raise UsageError("--threads must be at least 1")
    return cfg


def _need(cfg, key):
    if cfg.get(key) is None:
        raise UsageError(f"--{key.replace('_', '-')} is required for "
                         f"'{cfg['command']} {cfg['action']}'")
    value = cfg[key]
    if isinstance(value, int) and value < 0:
        raise UsageError(f"--{key.replace('_', '-')} must be nonnegative")
    return value


def _range(cfg, default_lo=0):
    if cfg.get("n_max") is not None:
        return range(default_lo, _need(cfg, "n_max") + 1)
    return range(_need(cfg, "n"), cfg["n"] + 1)


def _merge(check, reports, **extra):
    """Fold per-``n`` reports of one claim into a single report."""
    failures = [r.to_dict() for r in reports if not r.passed]
    ns = [r.n for r in reports if r.n is not None]
    rep = CheckReport(check=check, passed=not failures,
                      n_range=[min(ns), max(ns)] if ns else None,
                      details={"reports": len(reports), "failures": failures[:10],
                               **extra})
    return rep


# command handlers return (results, tables); tables are lists of CSV rows


def cmd_krawtchouk(cfg):
    action = cfg["action"]
    if action == "table":
        n = _need(cfg, "n")
        rows = list(krawtchouk.table_rows(krawtchouk.build_table(n)))
        return [], [("n", "k", "x", "num", "den", "float")] + rows
    if action == "verify":
        reps_sym, reps_ortho = [], []
        for n in _range(cfg):
            table = krawtchouk.build_table(n)
            reps_sym.append(krawtchouk.verify_symmetries(table))
            reps_ortho.append(krawtchouk.verify_orthogonality(table))
        return [_merge("KRAWT-SYM", reps_sym), _merge("KRAWT-ORTHO", reps_ortho)], None
    if action == "roots":
        n_max = cfg["n_max"] if cfg["n_max"] is not None else _need(cfg, "n")
        tol = cfg["tolerance"] if cfg["tolerance"] is not None else 1e-9
        return [krawtchouk.verify_roots(n_max, tol=tol, k_range=cfg["k_range"])], None
    n_max = cfg["n_max"] if cfg["n_max"] is not None else _need(cfg, "n")
    rtol = cfg["tolerance"] if cfg["tolerance"] is not None else 1e-12
    dc = krawtchouk.decay_constants(n_max, rtol=rtol)
    rep = dc.report
    rep.details["c_emp"] = dc.c_emp
    return [rep, krawtchouk.verify_case_constants()], None


def cmd_norm(cfg):
    action = cfg["action"]
    n = check_dimension(_need(cfg, "n"))
    if action == "l1":
        value = maximal.l1_norm_check(n)
        rep = CheckReport(check="L1-NORM", n=n, passed=value == n + 1,
                          details={"value": value})
        return [rep], None, str(value)
    family = make_family(cfg["family"], n, cfg["grid_points"])
    if action == "weak":
        delta = np.zeros(1 << n)
        delta[0] = 1.0
        r = maximal.weak_l1_ratio(family, delta)
        rep = CheckReport(check="NORM-ESTIMATE", n=n, passed=True,
                          details={"weak_ratio_delta": r})
        return [rep], None, None
    if action == "estimate":
        est = maximal.norm2_ascent(family, seed=cfg["seed"], restarts=cfg["restarts"],
                                   n_jobs=cfg["threads"])
    else:
        est = maximal.norm2_exhaustive_small(family)
    if cfg.get("witness"):
        write_cube_function(cfg["witness"], est.witness)
    passed = cfg["family"] != "spherical" or est.value >= math.sqrt(2) - 1e-6
    rep = CheckReport(check="NORM-ESTIMATE", n=n, passed=passed,
                      details=est.to_dict(cfg.get("witness")))
    return [rep], [("n", "family", "value", "method", "seed", "restarts")] + [
        (n, cfg["family"], est.value, est.method, cfg["seed"], est.restarts)], None


def cmd_verify(cfg):
    action = cfg["action"]
    seed = cfg["seed"]
    if action == "abel":
        return [_merge("ABEL", [cmp.abel_identity_check(n) for n in _range(cfg)])], None
    if action == "diff":
        return [_merge("KRAWT-DIFF",
                       [cmp.difference_identity_check(n) for n in _range(cfg, 2)])], None
    if action == "stein":
        ns = list(_range(cfg, 1))
        c_cert = krawtchouk.decay_constants(max(2, max(ns))).c_cert
        reps = [cmp.stein_sums(n, c_cert) for n in ns if n >= 1]
        rows = [("n", "x", "D_even", "D_odd")]
        for s in reps:
            rows.extend(s.rows())
        err = [cmp.stein_error_check(n, trials=100, seed=seed) for n in ns if 1 <= n <= 12]
        results = [_merge("STEIN-D", [s.report for s in reps], c_cert=c_cert)]
        if err:
            results.append(_merge("STEIN-R", err))
        return results, rows
    if action == "truncate":
        rng = np.random.default_rng(seed)
        reps = []
        for n in _range(cfg, 1):
            reps.append(cmp.truncation_checks(n, rng.integers(0, 8, 1 << n)))
            reps.append(cmp.truncation_checks(n, rng.random(1 << n)))
        return [_merge("TRUNCATION", reps)], None
    if action == "ncompare":
        reps = [cmp.ncompare_decomposition(n, P) for n in _range(cfg, 1)
                for P in (0.05, 0.2, 0.45)]
        return [_merge("N-COMPARE", reps)], None
    if action == "binomlb":
        if cfg["n_max"] is not None:
            return [cmp.binom_lb_scan(9, cfg["n_max"])], None
        n = _need(cfg, "n")
        return [cmp.binom_lb_scan(n, n)], None
    if action == "ergodic":
        return [cmp.ergodic_suite(trials=1000, seed=seed)], None
    reps = []
    c_cert = krawtchouk.decay_constants(64).c_cert
    for n in _range(cfg, 1):
        cb = cmp.chain_bound(n, c_cert, seed=seed)
        ok = math.isfinite(cb.total) and cb.random_checks.get("holds", True)
        reps.append(CheckReport(check="CHAIN-BOUND", n=n, passed=bool(ok),
                                details=cb.to_dict()))
    return reps, None


def _marking(cfg):
    path = _need(cfg, "marking")
    try:
        return games.read_marking(path)
    except OSError as exc:
        raise UsageError(f"cannot read marking {path}: {exc}") from exc


def cmd_game(cfg):
    action = cfg["action"]
    header = ("n", "m", "epsilon", "value", "ratio", "method", "seed")
    if action == "profile":
        marking = _marking(cfg)
        prof = games.density_profile(marking, cfg["x"])
        rep = CheckReport(check="GAME-COROLLARY", n=marking.n, passed=True,
                          details={"x": cfg["x"], "profile": prof})
        return [rep], None
    if action == "center":
        marking = _marking(cfg)
        res = games.best_center(marking)
        rep = CheckReport(check="GAME-COROLLARY", n=marking.n, passed=True,
                          details=res.to_dict())
        return [rep], [header, (marking.n, len(marking.marked), marking.epsilon,
                                res.value, res.ratio, "best_center", "")]
    n = _need(cfg, "n")
    sizes = [cfg["m"]] if cfg.get("m") is not None else range((1 << n) + 1)
    rows, results = [header], []
    for m in sizes:
        if action == "exhaustive":
            marking, value = games.exhaustive_adversary(n, m)
            method, seed = "exhaustive", ""
        else:
            res = games.anneal_adversary(n, m, seed=cfg["seed"], budget=cfg["budget"])
            marking, value, method, seed = res.marking, res.value, "anneal", cfg["seed"]
        result = games.best_center(marking)
        rows.append((n, m, marking.epsilon, value, result.ratio, method, seed))
        results.append(CheckReport(check="GAME-COROLLARY", n=n, passed=True,
                                   params={"m": m, "method": method},
                                   details={"value": value, "marking": marking.to_json()}))
    return results, rows


def cmd_transform(cfg):
    try:
        f = read_cube_function(cfg["input"])
    except OSError as exc:
        raise UsageError(f"cannot read {cfg['input']}: {exc}") from exc
    if cfg["action"] == "wht":
        coeffs = wht(f).coeffs
        return [], [("y", "coefficient")] + list(enumerate(coeffs.tolist()))
    s = sphere_means_all(f).s
    return [], [("x",) + tuple(f"k{k}" for k in range(f.n + 1))] + [
        (x,) + tuple(row) for x, row in enumerate(s.tolist())]


def run_suite(cfg):
    """All conformance checks for ``n <= n_max`` at reduced sample sizes."""
    n_max = cfg["n_max"] if cfg["n_max"] is not None else 12
    seed = cfg["seed"]
    rng = np.random.default_rng(seed)
    ns = range(n_max + 1)
    results, deviations = [], []

    tables = [krawtchouk.build_table(n) for n in ns]
    results.append(_merge("KRAWT-SYM", [krawtchouk.verify_symmetries(t) for t in tables]))
    results.append(_merge("KRAWT-ORTHO", [krawtchouk.verify_orthogonality(t) for t in tables]))
    results.append(krawtchouk.verify_roots(n_max, k_range="half"))
    deviations.append(krawtchouk.verify_roots(n_max, k_range="all"))
    dc = krawtchouk.decay_constants(max(2, n_max))
    results.append(dc.report)
    results.append(krawtchouk.verify_case_constants())
    l1 = [CheckReport(check="L1-NORM", n=n, passed=maximal.l1_norm_check(n) == n + 1)
          for n in ns if n <= 16]
    results.append(_merge("L1-NORM", l1))
    results.append(_merge("ABEL", [cmp.abel_identity_check(n) for n in ns]))
    results.append(_merge("KRAWT-DIFF",
                          [cmp.difference_identity_check(n) for n in ns if n >= 2]))
    results.append(_merge("STEIN-D", [cmp.stein_sums(n, dc.c_cert).report
                                      for n in ns if n >= 1], c_cert=dc.c_cert))
    stein_r = [cmp.stein_error_check(n, trials=50, seed=seed) for n in ns if 1 <= n <= 12]
    results.append(_merge("STEIN-R", [r for r in stein_r if r.n >= 4 or r.n == 1]))
    deviations.append(_merge("STEIN-R", [r for r in stein_r if r.n in (2, 3)]))
    trunc = [cmp.truncation_checks(n, rng.integers(0, 8, 1 << n))
             for n in ns if 1 <= n <= 12]
    results.append(_merge("TRUNCATION", trunc))
    results.append(_merge("N-COMPARE", [cmp.ncompare_decomposition(n, P)
                                        for n in sorted({min(n_max, 4), min(n_max, 8)})
                                        if n >= 1 for P in (0.05, 0.2, 0.45)]))
    if n_max >= 9:
        results.append(cmp.binom_lb_scan(9, n_max))
    results.append(cmp.ergodic_suite(trials=100, seed=seed, lazy_n_max=min(n_max, 10)))
    results.append(_merge("MARCINKIEWICZ-2", [
        cmp.marcinkiewicz_check(n, trials=50, grid_points=cfg["grid_points"], seed=seed)
        for n in ns if 1 <= n <= 14]))
    norm = []
    for n in ns:
        if 1 <= n <= 10:
            est = maximal.norm2_ascent(make_family("spherical", n), seed=seed, restarts=4)
            norm.append(CheckReport(check="NORM-ESTIMATE", n=n,
                                    passed=est.value >= math.sqrt(2) - 1e-6,
                                    details={"value": est.value}))
    results.append(_merge("NORM-ESTIMATE", norm))
    chain = []
    for n in ns:
        if n >= 1:
            cb = cmp.chain_bound(n, dc.c_cert, trials=5, seed=seed, check_n_max=12)
            chain.append(CheckReport(
                check="CHAIN-BOUND", n=n,
                passed=bool(math.isfinite(cb.total) and cb.random_checks.get("holds", True)),
                details={"total": cb.total, "empirical_total": cb.empirical_total}))
    results.append(_merge("CHAIN-BOUND", chain))
    game = []
    for n, expected in ((3, Fraction(1, 3)), (4, Fraction(1, 6))):
        if n <= n_max:
            value = games.best_center(games.MarkingSet.from_indices(n, [0])).value
            game.append(CheckReport(check="GAME-COROLLARY", n=n, passed=value == expected,
                                    details={"singleton_value": value}))
    for n in ns:
        if 1 <= n <= 8:
            bits = rng.random(n * (1 << (n - 1))) < 0.2
            ok, slack = games.edge_domination_check(games.MarkingSet(n, "edge", bits))
            game.append(CheckReport(check="GAME-COROLLARY", n=n, passed=ok,
                                    details={"edge_domination_slack": slack}))
    if game:
        results.append(_merge("GAME-COROLLARY", game))
    return results, deviations


def _emit(cfg, results, tables, started, deviations=None, text=None):
    if cfg["format"] == "csv":
        rows = tables
        if rows is None:
            rows = [("check", "pass", "n_range", "worst_violation")] + [
                (r.check, r.passed, r.n_range or r.n, r.worst_violation) for r in results]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in rows:
            w.writerow([_csv_cell(v) for v in row])
        payload = buf.getvalue()
    else:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": _version(),
            "config": {k: v for k, v in cfg.items()},
            "results": [r.to_dict() for r in results],
            "summary": {"passed": all(r.passed for r in results),
                        "claims": sorted({r.check for r in results})},
            "wall_time": round(time.perf_counter() - started, 3),
        }
        if deviations is not None:
            doc["known_deviations"] = [r.to_dict() for r in deviations]
        if tables is not None and not results:
            doc["table"] = to_jsonable(tables)
        payload = json.dumps(to_jsonable(doc), indent=2, sort_keys=True) + "\n"
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(payload)
        if text is not None:
            print(text)
    elif text is not None:
        print(text)
    else:
        sys.stdout.write(payload)


def _csv_cell(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return f"{v:.17g}"
    return v


HANDLERS = {"krawtchouk": cmd_krawtchouk, "norm": cmd_norm, "verify": cmd_verify,
            "game": cmd_game, "transform": cmd_transform}


def run(argv=None):
    """Entry point; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    started = time.perf_counter()
    try:
        cfg = resolve_config(args)
        deviations, text = None, None
        if cfg["command"] == "suite":
            results, deviations = run_suite(cfg)
            tables = None
        else:
            out = HANDLERS[cfg["command"]](cfg)
            results, tables = out[0], out[1]
            text = out[2] if len(out) > 2 else None
        if not results and tables is None:
            raise UsageError("nothing to report")
        _emit(cfg, results, tables, started, deviations, text)
    except UsageError as exc:
        print(f"cubemax: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CubemaxError, ValueError) as exc:
        print(f"cubemax: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cubemax: error: I/O: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MemoryError as exc:
        print(f"cubemax: error: out of memory: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
