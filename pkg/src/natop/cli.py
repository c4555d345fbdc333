"""Command-line front end.

Commands: ``dim``, ``kernel``, ``verify``, ``verify-ideal``, ``basis``,
``parse``.  Reports are JSON by default (fixed key order, rationals as
"p/q" strings), with plain-text and LaTeX renderings available.  Exit
status: 0 when every check passed, 1 when a verification produced a
nonzero residual or a failed generation test, 2 on usage or parse errors.

An optional ``key=value`` config file provides defaults for ``m``,
``trials`` and ``mode``; command-line flags override it, and the
``NATOP_SEED`` environment variable overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import graph_space, identities, perm_algebra
from .dsl import DslError, parse as parse_expr, print_term
from .taylor import check_zero_random
from .terms import check_zero, context_for, free_slots, is_scalar

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _load_config(path):
    defaults = {}
    if not path:
        return defaults
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, value = line.split("=", 1)
            defaults[key.strip()] = value.strip()
    return defaults


def _resolve(args, config, name, cast, fallback):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return cast(config[name])
    return fallback


def _emit(report, fmt, stream=sys.stdout):
    if fmt == "json":
        stream.write(json.dumps(report, indent=2) + "\n")
    elif fmt == "latex":
        stream.write(_latex_report(report) + "\n")
    else:
        _emit_text(report, stream)


def _emit_text(report, stream, prefix=""):
    for key, value in report.items():
        if isinstance(value, dict):
            stream.write(f"{prefix}{key}:\n")
            _emit_text(value, stream, prefix + "  ")
        elif isinstance(value, list):
            stream.write(f"{prefix}{key}: [{len(value)} entries]\n")
            for item in value:
                if isinstance(item, dict):
                    _emit_text(item, stream, prefix + "  ")
                    stream.write(prefix + "  --\n")
                else:
                    stream.write(f"{prefix}  {item}\n")
        else:
            stream.write(f"{prefix}{key}: {value}\n")


def _latex_escape(s):
    return str(s).replace("_", r"\_").replace("&", r"\&").replace("%", r"\%")


def _latex_report(report):
    if "basis" in report:
        lines = [r"\begin{tabular}{llll}",
                 r"graph & decorations & vf-order & operator \\ \hline"]
        for entry in report["basis"]:
            decos = ",".join(f"({d['arity']},{d['kernel_index']})"
                             for d in entry["decorations"]) or "-"
            lines.append(
                f"{_latex_escape(entry['graph'])} & {decos} & "
                f"{entry['vforder']} & \\verb|{entry['term']}| \\\\")
        lines.append(r"\end{tabular}")
        return "\n".join(lines)
    lines = [r"\begin{tabular}{ll}"]
    for key, value in report.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value)
        lines.append(f"{_latex_escape(key)} & {_latex_escape(value)} \\\\")
    lines.append(r"\end{tabular}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_dim(args, config):
    d = args.d
    m = _resolve(args, config, "m", int, 3)
    t0 = time.monotonic()
    decorated = graph_space.enumerate_decorated(d).dimension
    via_delta = graph_space.dim_H0_via_delta_h(d)
    report = {
        "command": "dim",
        "d": d,
        "m": m,
        "dimension": decorated,
        "decorated_dimension": decorated,
        "delta_h_dimension": via_delta,
        "agree": decorated == via_delta,
    }
    if args.timing:
        report["elapsed_ms"] = int((time.monotonic() - t0) * 1000)
    _emit(report, args.format)
    return EXIT_OK if report["agree"] else EXIT_FAILED


def _cmd_kernel(args, config):
    n = args.n
    family = perm_algebra.GeneratorFamily(args.family)
    t0 = time.monotonic()
    basis = perm_algebra.kernel_basis(n)
    members = family.members(n)
    rank = perm_algebra.submodule_rank(members)
    generates = perm_algebra.generates_kernel(members)
    report = {
        "command": "kernel",
        "n": n,
        "family": args.family,
        "ambient_dimension": n * (n - 1),
        "kernel_dimension": len(basis),
        "family_rank": rank,
        "generates": generates,
    }
    if n >= 3:
        report["relation_eq3"] = perm_algebra.check_relation_eq3(n)
    if args.include_basis:
        report["basis"] = [b.to_json_obj() for b in basis]
    if args.timing:
        report["elapsed_ms"] = int((time.monotonic() - t0) * 1000)
    _emit(report, args.format)
    ok = generates and report.get("relation_eq3", True)
    return EXIT_OK if ok else EXIT_FAILED


def _cmd_verify(args, config):
    registry = identities.identity_registry()
    if args.identity not in registry:
        print(f"unknown identity {args.identity!r}; known: "
              + ", ".join(sorted(registry)), file=sys.stderr)
        return EXIT_USAGE
    m = _resolve(args, config, "m", int, 3)
    mode = _resolve(args, config, "mode", str, "exact")
    trials = _resolve(args, config, "trials", int, 5)
    seed = args.seed if args.seed is not None else 0
    env_seed = os.environ.get("NATOP_SEED")
    if env_seed is not None:
        seed = int(env_seed)
    builder, expected_zero = registry[args.identity]
    term = builder()
    t0 = time.monotonic()
    if mode == "random":
        zero = check_zero_random(term, m, trials=trials, seed=seed)
        verdict, witness = ("zero" if zero else "nonzero"), None
    else:
        result = check_zero(term, context_for(term, m))
        verdict, witness = ("zero" if result.zero else "nonzero"), result.witness
    report = {
        "command": "verify",
        "identity": args.identity,
        "dimension": m,
        "mode": mode,
        "verdict": verdict,
        "witness": witness,
        "expected": "zero" if expected_zero else "nonzero",
    }
    if mode == "random":
        report["trials"] = trials
        report["seed"] = seed
        report["authoritative"] = False
    if args.timing:
        report["elapsed_ms"] = int((time.monotonic() - t0) * 1000)
    _emit(report, args.format)
    return EXIT_OK if verdict == "zero" else EXIT_FAILED


def _cmd_verify_ideal(args, config):
    n = args.n
    m = _resolve(args, config, "m", int, 3)
    t0 = time.monotonic()
    suite = identities.verify_ideal_suite(n, m)
    checks = {}
    all_pass = True
    for tag, (verdict, expected_zero) in suite.items():
        ok = verdict.zero == expected_zero
        all_pass = all_pass and ok
        checks[tag] = {
            "verdict": "zero" if verdict.zero else "nonzero",
            "expected": "zero" if expected_zero else "nonzero",
            "witness": verdict.witness,
            "pass": ok,
        }
    report = {
        "command": "verify-ideal",
        "n": n,
        "m": m,
        "checks": checks,
        "all_pass": all_pass,
    }
    if args.timing:
        report["elapsed_ms"] = int((time.monotonic() - t0) * 1000)
    _emit(report, args.format)
    return EXIT_OK if all_pass else EXIT_FAILED


def _cmd_basis(args, config):
    report = graph_space.basis_export(args.d, args.family)
    report = {"command": "basis", **report}
    _emit(report, args.format)
    return EXIT_OK


def _cmd_parse(args, config):
    try:
        term = parse_expr(args.expr)
    except DslError as exc:
        report = {"command": "parse", "expr": args.expr,
                  "error": str(exc), "position": exc.pos}
        _emit(report, args.format, stream=sys.stderr)
        return EXIT_USAGE
    report = {
        "command": "parse",
        "expr": args.expr,
        "canonical": print_term(term),
        "slots": sorted(s for s in free_slots(term) if s > 0),
        "scalar": is_scalar(term),
    }
    _emit(report, args.format)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="natop",
        description="Exact verifier for natural operators of a linear "
                    "connection with torsion.")
    parser.add_argument("--config", help="key=value defaults file")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=["json", "latex", "text"], default="json")
        p.add_argument("--timing", action="store_true",
                       help="include elapsed_ms (breaks byte-identical output)")

    p = sub.add_parser("dim", help="dimension of the operator space, both models")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    common(p)
    p.set_defaults(fn=_cmd_dim)

    p = sub.add_parser("kernel", help="kernel of the symbol map and family rank")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--family", choices=["classical", "canonical"], default="classical")
    p.add_argument("--include-basis", action="store_true")
    common(p)
    p.set_defaults(fn=_cmd_kernel)

    p = sub.add_parser("verify", help="check one named identity")
    p.add_argument("--identity", required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--n", type=int, default=None, help="accepted for symmetry with reports")
    p.add_argument("--mode", choices=["exact", "random"], default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    common(p)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("verify-ideal", help="identity suite of the streamlined tensors")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    common(p)
    p.set_defaults(fn=_cmd_verify_ideal)

    p = sub.add_parser("basis", help="export the graph basis")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--family", choices=["classical", "canonical"], default="classical")
    common(p)
    p.set_defaults(fn=_cmd_basis)

    p = sub.add_parser("parse", help="parse and canonically print an expression")
    p.add_argument("--expr", required=True)
    common(p)
    p.set_defaults(fn=_cmd_parse)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _load_config(args.config)
    try:
        return args.fn(args, config)
    except DslError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
