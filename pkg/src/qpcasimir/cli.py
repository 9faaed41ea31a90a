"""``casimir`` command-line front end.

Commands: ``sequence``, ``energy``, ``sweep``, ``fit`` and ``greens-check``.
Output is CSV (default) or JSON lines, one row per work item, sorted before
writing so identical invocations give byte-identical files. Errors go to
stderr as a single JSON object; exit codes are 0 (ok), 2 (configuration),
3 (numerical failure) and 4 (invariant-suite failure).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .energy import (
    FitRefused,
    energy_ideal_iterate,
    energy_word,
    growth_fit,
    sigma_grid,
)
from .errors import CasimirError, ConfigError, RuleParseError
from .greens import check_invariants
from .lattice import format_rules, iterate, pair_counts, parse_rules, preset, preset_key

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INVARIANT = 4

ENERGY_COLUMNS = ("sequence", "I", "n_plates", "n_like", "n_unlike", "sigma", "spacing",
                  "scaled_energy", "abs_error", "method")
RAW_COLUMNS = ("raw_energy", "raw_abs_error")
SEQUENCE_COLUMNS = ("sequence", "I", "n_plates", "n_like", "n_unlike", "word")
FIT_COLUMNS = ("sequence", "material", "sigma", "I_min", "I_max", "n_points", "prefactor",
               "rate", "residual", "last_ratio", "status")
CHECK_COLUMNS = ("check", "passed", "failed", "worst")

_ITERS = re.compile(r"^\s*(\d+)\s*(?:\.\.\s*(\d+)\s*)?$")


class _Parser(argparse.ArgumentParser):
    # usage errors become ConfigError so they share the JSON error path
    def error(self, message):
        raise ConfigError(message)


def parse_iters(text):
    """``"A"`` or ``"A..B"`` (inclusive) to a list of iteration counts."""
    m = _ITERS.match(text)
    if not m:
        raise ConfigError(f"bad --iters {text!r}; expected A or A..B")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) is not None else lo
    if hi < lo:
        raise ConfigError(f"bad --iters {text!r}; empty range")
    return list(range(lo, hi + 1))


def parse_sigma(text):
    """``lo:hi:n`` (log-spaced), a comma list, or a single value."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
            return [float(x) for x in sigma_grid(lo, hi, n)]
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad --sigma {text!r}; expected lo:hi:n, a list or a value") from None
    if not values or any(not (math.isfinite(v) and v >= 0.0) for v in values):
        raise ConfigError(f"bad --sigma {text!r}; values must be finite and >= 0")
    return values


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write(rows, columns, args):
    buf = io.StringIO()
    if args.format == "json":
        for row in rows:
            buf.write(json.dumps({c: row.get(c) for c in columns}) + "\n")
    else:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c)) for c in columns])
    text = buf.getvalue()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")


def _system(args):
    if args.rules and args.preset:
        raise ConfigError("give either --preset or --rules, not both")
    if args.rules:
        path = Path(args.rules)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read rules file {str(path)!r}: {exc.strerror}") from None
        system = parse_rules(text)
        return system, path.stem
    if args.preset:
        system = preset(args.preset)
        return system, preset_key(args.preset)
    raise ConfigError("one of --preset or --rules is required")


def _material(args, default="ideal"):
    if args.material:
        return args.material
    return "finite" if args.sigma is not None else default


def _energy_job(job):
    system, name, it, material, sigma, spacing = job
    if material == "ideal":
        res = energy_ideal_iterate(system, it, spacing)
    else:
        res = energy_word(iterate(system, it), material, sigma, spacing)
    counts = pair_counts(system, it)
    return {
        "sequence": name, "I": it, "n_plates": counts.n_plates, "n_like": counts.n_like,
        "n_unlike": counts.n_unlike, "sigma": sigma, "spacing": spacing,
        "scaled_energy": res.value, "abs_error": res.abs_error, "method": res.method,
        "raw_energy": res.raw, "raw_abs_error": res.raw_error,
    }


def _run_jobs(jobs, n_workers):
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(_energy_job, jobs))
    else:
        rows = [_energy_job(j) for j in jobs]
    return sorted(rows, key=lambda r: (r["sequence"], r["I"], r["sigma"] or 0.0))


def _energy_jobs(args, material, sigmas):
    system, name = _system(args)
    iters = parse_iters(args.iters)
    if material == "ideal":
        return [(system, name, it, "ideal", None, args.spacing) for it in iters]
    if not sigmas:
        raise ConfigError("finite plates need --sigma")
    return [(system, name, it, material, s, args.spacing) for it in iters for s in sigmas]


def cmd_sequence(args):
    system, name = _system(args)
    rows = []
    for it in parse_iters(args.iters):
        counts = pair_counts(system, it)
        word = ""
        if counts.n_plates <= args.max_word:
            word = "".join(iterate(system, it).symbols)
        rows.append({"sequence": name, "I": it, "n_plates": counts.n_plates,
                     "n_like": counts.n_like, "n_unlike": counts.n_unlike, "word": word})
    if args.emit_rules:
        Path(args.emit_rules).write_text(format_rules(system), encoding="utf-8")
    _write(rows, SEQUENCE_COLUMNS, args)
    return EXIT_OK


def cmd_energy(args):
    material = _material(args)
    sigmas = parse_sigma(args.sigma) if args.sigma is not None else None
    rows = _run_jobs(_energy_jobs(args, material, sigmas), args.jobs)
    _write(rows, ENERGY_COLUMNS + (RAW_COLUMNS if args.raw else ()), args)
    return EXIT_OK


def cmd_sweep(args):
    if args.material == "ideal":
        raise ConfigError("sweep runs over sigma and needs finite plates")
    sigmas = parse_sigma(args.sigma if args.sigma is not None else "0.01:10000:60")
    rows = _run_jobs(_energy_jobs(args, "finite", sigmas), args.jobs)
    _write(rows, ENERGY_COLUMNS + (RAW_COLUMNS if args.raw else ()), args)
    return EXIT_OK


def cmd_fit(args):
    material = _material(args)
    sigmas = parse_sigma(args.sigma) if args.sigma is not None else None
    if material == "finite" and (not sigmas or len(sigmas) != 1):
        raise ConfigError("a finite-plate fit needs exactly one --sigma value")
    rows = _run_jobs(_energy_jobs(args, material, sigmas), args.jobs)
    points = [(r["I"], r["scaled_energy"]) for r in rows]
    row = {"sequence": rows[0]["sequence"], "material": material,
           "sigma": sigmas[0] if material == "finite" else None,
           "I_min": points[0][0], "I_max": points[-1][0], "n_points": len(points)}
    try:
        fit = growth_fit(points)
    except FitRefused as exc:
        ratios = exc.ratios
        row.update(status="refused")
    else:
        ratios = fit.ratios
        row.update(prefactor=fit.prefactor, rate=fit.rate, residual=fit.residual, status="ok")
    row["last_ratio"] = ratios[-1][1] if ratios else None
    _write([row], FIT_COLUMNS, args)
    return EXIT_OK


def cmd_greens_check(args):
    results = check_invariants(n_points=args.points, seed=args.seed)
    rows = [{"check": r.name, "passed": r.passed, "failed": r.failed, "worst": r.worst}
            for r in results]
    _write(rows, CHECK_COLUMNS, args)
    n_fail = sum(r.failed for r in results)
    if n_fail:
        _error("InvariantFailure", f"{n_fail} invariant checks failed", EXIT_INVARIANT)
        return EXIT_INVARIANT
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="casimir", description="Casimir energies of quasiperiodic plate stacks")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, sigma=True):
        src = p.add_argument_group("sequence source")
        src.add_argument("--preset", help="built-in sequence name (case-insensitive)")
        src.add_argument("--rules", help="rule file in the 'axiom D; D -> D N; ...' format")
        p.add_argument("--iters", required=True, help="iteration count A or range A..B")
        if sigma:
            p.add_argument("--sigma", help="conductivity: value, list a,b,c or log grid lo:hi:n")
            p.add_argument("--material", choices=("ideal", "finite"))
            p.add_argument("--spacing", type=_positive, default=1.0, help="plate spacing a")
            p.add_argument("--jobs", type=int, default=1, help="worker processes")
            p.add_argument("--raw", action="store_true",
                           help="add unscaled energy per area columns")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("sequence", help="words and neighbour counts per iteration")
    common(p, sigma=False)
    p.add_argument("--emit-rules", metavar="PATH", help="also write the rules in DSL form")
    p.add_argument("--max-word", type=int, default=100_000,
                   help="leave the word column empty above this many plates")
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("energy", help="scaled Casimir energy per iteration")
    common(p)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("sweep", help="finite-plate energies over a sigma grid")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="exponential growth fit of energies over iterations")
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("greens-check", help="run the Green's function invariant suite")
    p.add_argument("--points", type=int, default=100, help="random samples per plate count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_greens_check)
    return parser


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}") from None
    if not (math.isfinite(v) and v > 0.0):
        raise ConfigError(f"spacing must be positive, got {text!r}")
    return v


def _error(kind, message, code, **extra):
    payload = {"error": kind, "message": message, "exit_code": code}
    payload.update(extra)
    sys.stderr.write(json.dumps(payload) + "\n")


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            raise ConfigError("--jobs must be >= 1")
        return args.func(args)
    except RuleParseError as exc:
        _error(type(exc).__name__, str(exc), exc.exit_code, line=exc.line, column=exc.column)
        return exc.exit_code
    except CasimirError as exc:
        _error(type(exc).__name__, str(exc), exc.exit_code)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
