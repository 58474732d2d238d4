"""Command line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 a cap was exceeded.  Every failure writes one line starting with
``ERROR:`` to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import foquery as fo
from .automata import (
    AutomatonError,
    CapExceeded,
    classify_growth,
    count_by_length,
    deconvolve,
    enumerate_upto,
    load_dfa,
    polynomial_fit_residual,
    save_dfa,
)
from .groups import GroupError, make_group
from .measurement import (
    MeasurementError,
    almost_all_stats,
    dehn_lower_bound,
    measure_h,
    measure_s,
    parse_class,
    superadditivity_check,
)
from .metrics import ball
from .representations import (
    RepresentationError,
    builtin,
    corrupt_multiplier,
    load_bundle,
    save_bundle,
    show_word,
    verify_rep,
)

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3

DEFAULTS = {
    "rep": None,
    "n": 8,
    "k": 6,
    "cap_words": 2_000_000,
    "cap_ball": 200_000,
    "out": None,
    "seed": 0,
    "workers": 1,
    "format": "csv",
}
_INT_KEYS = ("n", "k", "cap_words", "cap_ball", "seed", "workers")
# the verify report is a nested record, so it defaults to JSON
COMMAND_DEFAULTS = {("rep", "verify"): {"format": "json"}}


class UsageError(Exception):
    pass


class VerifyFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)

    def exit(self, status=0, message=None):
        if message:
            sys.stderr.write(message)
        raise SystemExit(status)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with the same keys as the flags")
    p.add_argument("--rep", help="built-in representation name or bundle directory")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--cap-words", dest="cap_words", type=int)
    p.add_argument("--cap-ball", dest="cap_ball", type=int)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="cayleyauto", description="Cayley automatic representations workbench")
    groups = top.add_subparsers(dest="area", parser_class=_Parser)

    rep = groups.add_parser("rep", help="build or verify representations")
    rep_sub = rep.add_subparsers(dest="command", parser_class=_Parser)
    p = rep_sub.add_parser("build", help="write a representation bundle to --out")
    _common(p)
    p = rep_sub.add_parser("verify", help="exhaustive check on words of length <= k")
    _common(p)
    p.add_argument("--corrupt", metavar="GEN", help="damage one multiplier first (fault injection)")

    meas = groups.add_parser("measure", help="h(n), s(n) and almost-all statistics")
    meas_sub = meas.add_subparsers(dest="command", parser_class=_Parser)
    p = meas_sub.add_parser("h")
    _common(p)
    p.add_argument("--sample", type=int, default=0, help="sample this many words per length instead")
    p = meas_sub.add_parser("s")
    _common(p)
    p = meas_sub.add_parser("almostall")
    _common(p)

    lang = groups.add_parser("lang", help="language statistics")
    lang_sub = lang.add_subparsers(dest="command", parser_class=_Parser)
    p = lang_sub.add_parser("growth")
    _common(p)
    p.add_argument("--lang", help="automaton JSON file instead of a representation language")

    fog = groups.add_parser("fo", help="first-order queries")
    fo_sub = fog.add_subparsers(dest="command", parser_class=_Parser)
    p = fo_sub.add_parser("eval")
    _common(p)
    p.add_argument("--formula", required=True)
    p.add_argument("--bind", action="append", default=[], metavar="NAME=FILE")
    p.add_argument("--const", action="append", default=[], metavar="NAME=WORD")
    p.add_argument("--domain", help="domain automaton JSON file")
    p.add_argument("--list", action="store_true", help="list satisfying tuples up to length n")

    ballg = groups.add_parser("ball", help="Cayley graph balls")
    ball_sub = ballg.add_subparsers(dest="command", parser_class=_Parser)
    p = ball_sub.add_parser("export")
    _common(p)
    p.add_argument("--group", help="group spec JSON, used instead of --rep")

    bounds = groups.add_parser("bounds", help="bound tables")
    bounds_sub = bounds.add_subparsers(dest="command", parser_class=_Parser)
    p = bounds_sub.add_parser("dehn")
    _common(p)
    p.add_argument("--class", dest="dehn_class", required=True, help="e.g. poly:3 or exp")
    return top


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def resolve(args: argparse.Namespace, defaults: dict = DEFAULTS) -> dict:
    """Flags over config file over defaults."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in raw.items():
            norm = key.replace("-", "_")
            if norm not in DEFAULTS:
                raise UsageError(f"unknown config key {key!r}")
            cfg[norm] = value
    out = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        out[key] = flag if flag is not None else cfg.get(key, default)
    for key in _INT_KEYS:
        v = out[key]
        if isinstance(v, bool) or not isinstance(v, int):
            raise UsageError(f"{key} must be an integer")
    for key in ("cap_words", "cap_ball", "workers"):
        if out[key] <= 0:
            raise UsageError(f"{key} must be positive")
    for key in ("n", "k"):
        if out[key] < 0:
            raise UsageError(f"{key} must be nonnegative")
    if out["format"] not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    return out


def load_rep(spec):
    if not spec:
        raise UsageError("--rep is required")
    if os.path.isdir(spec):
        return load_bundle(spec), os.path.basename(os.path.normpath(spec))
    return builtin(spec), spec


def emit(text: str, cfg: dict) -> None:
    if cfg["out"]:
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def table(columns, rows, cfg: dict) -> str:
    """Rows as CSV or a JSON list of objects."""
    if cfg["format"] == "json":
        return json.dumps([dict(zip(columns, r)) for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if v is None else v for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_rep_build(args, cfg):
    R, rep_id = load_rep(cfg["rep"])
    if not cfg["out"]:
        raise UsageError("rep build needs --out DIR")
    save_bundle(R, cfg["out"], rep_id)
    summary = {
        "rep": rep_id,
        "language_states": R.language.n_states,
        "multiplier_states": {g: m.n_states for g, m in sorted(R.multipliers.items())},
        "out": cfg["out"],
    }
    sys.stdout.write(json.dumps(summary, indent=1, sort_keys=True) + "\n")


def cmd_rep_verify(args, cfg):
    R, rep_id = load_rep(cfg["rep"])
    if args.corrupt:
        if args.corrupt not in R.multipliers:
            raise UsageError(f"{rep_id} has no generator {args.corrupt!r}")
        R = corrupt_multiplier(R, args.corrupt, cfg["seed"])
    report = verify_rep(R, cfg["k"], cap=cfg["cap_words"], workers=cfg["workers"])
    data = report.to_json()
    if cfg["format"] == "json":
        text = json.dumps(data, indent=1, sort_keys=True) + "\n"
    else:
        text = table(("key", "value"), [(k, json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v)
                                        for k, v in data.items()], cfg)
    emit(text, cfg)
    if not report.passed:
        raise VerifyFailed(f"{rep_id} failed at k={cfg['k']}: {json.dumps(report.counterexample, sort_keys=True)}")


def cmd_measure_h(args, cfg):
    R, _ = load_rep(cfg["rep"])
    rows = measure_h(R, cfg["n"], cfg["cap_words"], cfg["cap_ball"], sample=args.sample, seed=cfg["seed"])
    emit(table(("n", "h_lower", "h_upper", "words", "exhaustive"),
               [(r.n, r.h_lower, r.h_upper, r.words, r.exhaustive) for r in rows], cfg), cfg)


def cmd_measure_s(args, cfg):
    R, _ = load_rep(cfg["rep"])
    rows = measure_s(R, cfg["n"], cfg["cap_ball"])
    emit(table(("n", "s_lower", "s_upper"), [(r.n, r.s_lower, r.s_upper) for r in rows], cfg), cfg)


def cmd_measure_almostall(args, cfg):
    R, _ = load_rep(cfg["rep"])
    stats = almost_all_stats(R, cfg["n"], cap_ball=cfg["cap_ball"], cap_words=cfg["cap_words"])
    rows = [(r.n, r.ball, r.Q, round(r.fraction, 6)) for r in stats.rows]
    if cfg["format"] == "json":
        data = {
            "lambda": stats.lam, "lambda1": stats.lambda1, "lambda2": stats.lambda2, "C": stats.C,
            "rows": [dict(zip(("n", "ball", "Q", "fraction"), r)) for r in rows],
        }
        emit(json.dumps(data, indent=1, sort_keys=True) + "\n", cfg)
    else:
        emit(table(("n", "ball", "Q", "fraction"), rows, cfg), cfg)


def cmd_lang_growth(args, cfg):
    if args.lang:
        d = load_dfa(args.lang)
    else:
        d = load_rep(cfg["rep"])[0].language
    verdict = classify_growth(d)
    counts = count_by_length(d, cfg["n"])
    residual = polynomial_fit_residual(counts) if len(counts) >= 12 else None
    rows, total = [], 0
    for m, c in enumerate(counts):
        total += c
        rows.append((m, c, total))
    if cfg["format"] == "json":
        data = {"growth": str(verdict), "fit_residual": residual,
                "rows": [dict(zip(("n", "count", "cumulative"), r)) for r in rows]}
        emit(json.dumps(data, indent=1, sort_keys=True) + "\n", cfg)
    else:
        emit(table(("n", "count", "cumulative", "growth"), [r + (str(verdict),) for r in rows], cfg), cfg)


def _pairs(items, what):
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise UsageError(f"--{what} expects NAME=VALUE, got {item!r}")
        out[name] = value
    return out


def cmd_fo_eval(args, cfg):
    env, consts, domain = {}, {}, None
    if cfg["rep"]:
        if cfg["rep"] != "heisenberg":
            raise UsageError("only --rep heisenberg has preset relations")
        rels = fo.build_heisenberg_relations()
        env.update(rels.env())
        env["LH1"] = fo.RelAutomaton(fo.as_tracks(rels.L_H1), ("x",), rels.L_H)
        env["LH2"] = fo.RelAutomaton(fo.as_tracks(rels.L_H2), ("x",), rels.L_H)
        consts["w0"] = rels.w0
        domain = rels.L_H
    for name, path in _pairs(args.bind, "bind").items():
        env[name] = load_dfa(path)
    if args.domain:
        domain = load_dfa(args.domain)
    if domain is None:
        raise UsageError("fo eval needs --domain or --rep heisenberg")
    for name, word in _pairs(args.const, "const").items():
        consts[name] = tuple(word)
    rel = fo.eval_formula(args.formula, env, domain, consts)
    if cfg["out"]:
        save_dfa(rel.automaton, cfg["out"])
    summary = {"vars": list(rel.varnames), "states": rel.automaton.n_states, "satisfiable": rel.is_true()}
    if not args.list:
        sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
        return
    k = rel.arity
    rows = []
    for w in enumerate_upto(rel.automaton, cfg["n"]):
        tracks = deconvolve(w, k) if k > 1 else (tuple(s[0] for s in w),)
        rows.append(tuple(show_word(t) for t in tracks))
    sys.stdout.write(table(rel.varnames or ("true",), rows, {**cfg, "out": None}))


def cmd_ball_export(args, cfg):
    if args.group:
        try:
            G = make_group(json.loads(args.group))
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad group spec: {exc}") from None
    else:
        G = load_rep(cfg["rep"])[0].group
    B = ball(G, cfg["n"], cfg["cap_ball"])
    rows = [(G.key_string(g), B.distance(g)) for g in B.elements()]
    emit(table(("key", "distance"), rows, cfg), cfg)


def cmd_bounds_dehn(args, cfg):
    try:
        dehn = parse_class(args.dehn_class)
        bound = dehn_lower_bound(dehn)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = "none" if bound is None else str(bound)
    if cfg["format"] == "json":
        data = {"dehn": str(dehn), "h_lower": text}
        if bound is not None:
            sa = superadditivity_check(bound)
            data["superadditive"] = sa.holds
            data["n0"] = sa.n0
        emit(json.dumps(data, sort_keys=True) + "\n", cfg)
    else:
        emit(text + "\n", cfg)


COMMANDS = {
    ("rep", "build"): cmd_rep_build,
    ("rep", "verify"): cmd_rep_verify,
    ("measure", "h"): cmd_measure_h,
    ("measure", "s"): cmd_measure_s,
    ("measure", "almostall"): cmd_measure_almostall,
    ("lang", "growth"): cmd_lang_growth,
    ("fo", "eval"): cmd_fo_eval,
    ("ball", "export"): cmd_ball_export,
    ("bounds", "dehn"): cmd_bounds_dehn,
}


def _error(msg: str) -> None:
    sys.stderr.write("ERROR: " + " ".join(str(msg).split()) + "\n")


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        key = (args.area, getattr(args, "command", None))
        if key not in COMMANDS:
            raise UsageError("expected one of: " + ", ".join(" ".join(k) for k in COMMANDS))
        cfg = resolve(args, {**DEFAULTS, **COMMAND_DEFAULTS.get(key, {})})
        COMMANDS[key](args, cfg)
        return EXIT_OK
    except SystemExit as exc:  # --help
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        if code:
            _error("usage")
        return code
    except UsageError as exc:
        _error(f"usage: {exc}")
        return EXIT_USAGE
    except VerifyFailed as exc:
        _error(f"verification failed: {exc}")
        return EXIT_VERIFY
    except CapExceeded as exc:
        _error(f"cap exceeded: {exc}")
        return EXIT_CAP
    except (RepresentationError, MeasurementError, GroupError, AutomatonError, fo.FormulaError,
            OSError, ValueError, KeyError) as exc:
        _error(f"{type(exc).__name__}: {exc}")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
