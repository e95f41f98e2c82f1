"""Command line entry point: ``ptower <command> <config-file> [options]``.

Exit status: 0 when every check passed or was decided, 1 when a check failed
with a witness, 2 when a check was inconclusive within its window, 3 for
usage, parse or validation errors and 4 for internal errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass

from . import __version__
from .errors import HypothesisFailed, ModeMismatch, ParseError, PtowerError, ValidationError

COMMANDS = ("check-stable", "build", "verify", "tilt", "torsion", "limcm", "fsplit", "delta-check")

EXIT_OK, EXIT_FAILED, EXIT_UNKNOWN, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3, 4

FAILED_STATUSES = {"Failed", "NotStable", "KernelWitness", "NoSplittingUpTo", "Obstruction",
                   "Inconsistent", "Mismatch"}
UNKNOWN_STATUSES = {"Unknown", "UnknownBeyond", "Inconclusive"}


@dataclass
class Result:
    check: str
    status: str
    window: object = None
    witness: str | None = None

    def as_dict(self):
        w = self.window
        if w is not None and not isinstance(w, int):
            w = str(w)
        return {"check": self.check, "status": self.status, "window": w, "witness": self.witness}


def exit_status(results) -> int:
    statuses = {r.status for r in results}
    if statuses & FAILED_STATUSES:
        return EXIT_FAILED
    if statuses & UNKNOWN_STATUSES:
        return EXIT_UNKNOWN
    return EXIT_OK


# --- commands -------------------------------------------------------------------

def _levels(cfg, args):
    if args.level is not None:
        return [args.level]
    top = cfg.levels if args.max_level is None else args.max_level
    return list(range(top + 1))


def cmd_check_stable(cfg, args):
    from .idealkit import IdealPresentation, NotStable, Stable, is_phi_stable
    ring = cfg.ring()
    I = IdealPresentation(cfg.generators(ring), ring=ring)
    out = [Result("ideal_class", I.describe())]
    v = is_phi_stable(I)
    if isinstance(v, Stable):
        out.append(Result("phi_stable", "Stable", v.window))
    elif isinstance(v, NotStable):
        out.append(Result("phi_stable", "NotStable", v.window,
                          f"phi({v.generator.render()}) = {v.image.render()} has normal form "
                          f"{v.normal_form.render()}"))
    else:
        wit = None if v.generator is None else f"phi({v.generator.render()}) leaves the truncation"
        out.append(Result("phi_stable", "Unknown", v.degree, wit))
    return out


def cmd_build(cfg, args):
    from .tower import build_layer
    spec = cfg.tower_spec()
    out = []
    for i in _levels(cfg, args):
        layer = build_layer(spec, i)
        gens = ", ".join(layer.render_generators())
        out.append(Result(f"layer {i}", "Built", None, f"({gens}) ramification {layer.ramification}"))
        modp = ", ".join(g.render() for g in layer.modp_generators) or "0"
        out.append(Result(f"layer {i} mod p", "Built", None, f"({modp})"))
    return out


def cmd_verify(cfg, args):
    from .tower import verify_axioms
    spec = cfg.tower_spec()
    top = cfg.levels if args.max_level is None else args.max_level
    out = []
    for rep in verify_axioms(spec, top):
        for ax, st in rep.entries.items():
            out.append(Result(f"level {rep.level} ({ax})", st.kind, st.window, st.witness))
    return out


def cmd_tilt(cfg, args):
    from .tower import check_tilt_tower, small_tilt
    spec = cfg.tower_spec()
    out = []
    levels = _levels(cfg, args)
    for i in levels:
        out.append(Result(f"tilt {i}", "Built", None, small_tilt(spec, i).render()))
    top = max(levels)
    if top > 0:
        for i, checks in check_tilt_tower(spec, top).items():
            for name, st in checks.items():
                out.append(Result(f"tilt {i} {name}", st.kind, st.window, st.witness))
    return out


def cmd_torsion(cfg, args):
    from .errors import Mismatch
    from .idealkit import p_torsion
    from .tower import build_layer
    spec = cfg.tower_spec()
    out = []
    for i in _levels(cfg, args):
        layer = build_layer(spec, i)
        try:
            t = p_torsion(layer)
        except Mismatch as exc:
            out.append(Result(f"torsion {i}", "Failed", spec.cap, str(exc)))
            continue
        gens = ", ".join(g.render() for g in t.symbolic.generators) or "0"
        out.append(Result(f"torsion {i}", "VerifiedUpTo", t.window, f"({gens})"))
        out.append(Result(f"torsion {i} killed by p", "VerifiedUpTo" if t.annihilated_by_p else "Failed",
                          t.window, None))
    return out


def cmd_limcm(cfg, args):
    from .limcm import limcm_diagnostic
    spec = cfg.tower_spec()
    top = cfg.levels if args.max_level is None else args.max_level
    ring = spec.ring
    sop = None
    if cfg.sop is not None:
        from .fracpoly import reduce_mod_p
        sop = [reduce_mod_p(f) for f in cfg.sop_elements(ring)]
    table = limcm_diagnostic(spec, top, sop=sop, seed=args.seed)
    out = [Result("sop", "Chosen", None, ", ".join(x.render() for x in table.sop))]
    for r in table.rows:
        ls = ", ".join(str(v) for v in r.lengths)
        rs = ", ".join(str(v) for v in r.ratios)
        out.append(Result(f"level {r.level}", "Computed", None,
                          f"nu={r.nu} lengths=[{ls}] ratios=[{rs}] chi={r.euler}"))
    out.append(Result("euler scaling", "Holds" if table.euler_scaling_holds else "Fails"))
    out.append(Result("verdict", table.verdict))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(table.to_csv())
    return out


def cmd_fsplit(cfg, args):
    from .deltaring import SplitsUpTo, check_phi_splits
    R = cfg.presentation()
    v = check_phi_splits(R)
    out = [Result("hypothesis", "Unverified", None, w) for w in v.warnings]
    if isinstance(v, SplitsUpTo):
        table = v.render_table(R.ring.names, R.p)
        body = "; ".join(f"{k} -> {val}" for k, val in table.items() if val != "0")
        out.append(Result("phi_splits", "SplitsUpTo", v.window, body))
    else:
        out.append(Result("phi_splits", "NoSplittingUpTo", v.window, v.certificate))
    return out


def cmd_delta_check(cfg, args, pairs: int = 20):
    from .deltaring import ConsistentUpTo, Obstruction, admits_delta_on_quotient, check_delta_axioms
    from .fracpoly import random_poly
    R = cfg.presentation()
    rng = random.Random(args.seed)
    bad = None
    for _ in range(pairs):
        f = random_poly(R.ring, rng, 3, max(1, R.cap // R.p))
        g = random_poly(R.ring, rng, 3, max(1, R.cap // R.p))
        v = check_delta_axioms(f, g)
        if not v.holds:
            bad = f"f = {f.render()}, g = {g.render()}"
            break
    out = [Result("delta identities", "Holds" if bad is None else "Failed", None, bad)]
    v = admits_delta_on_quotient(R)
    if isinstance(v, ConsistentUpTo):
        vals = ", ".join(f"delta({k}) = {val}" for k, val in v.delta_values.items())
        out.append(Result("delta on quotient", "ConsistentUpTo", v.window, vals))
    elif isinstance(v, Obstruction):
        out.append(Result("delta on quotient", "Obstruction", v.window, v.statement))
    else:
        out.append(Result("delta on quotient", "Inconclusive", v.window, v.reason))
    return out


HANDLERS = {
    "check-stable": cmd_check_stable,
    "build": cmd_build,
    "verify": cmd_verify,
    "tilt": cmd_tilt,
    "torsion": cmd_torsion,
    "limcm": cmd_limcm,
    "fsplit": cmd_fsplit,
    "delta-check": cmd_delta_check,
}


# --- reports --------------------------------------------------------------------

def run(command: str, cfg, args):
    """Run one command; returns (report dict, exit status)."""
    start = time.perf_counter()
    try:
        results = HANDLERS[command](cfg, args)
    except HypothesisFailed as exc:
        results = [Result("hypotheses", "Failed", None, str(exc))]
    ms = round((time.perf_counter() - start) * 1000)
    report = {
        "version": __version__,
        "config": cfg.as_dict(),
        "command": command,
        "results": [r.as_dict() for r in results],
        "elapsed_ms": None if args.no_timing else ms,
    }
    return report, exit_status(results)


def render_text(report) -> str:
    cfg = report["config"]
    lines = [f"ptower {report['version']}  {report['command']}"]
    lines.append("config: " + " ".join(
        f"{k}={json.dumps(v) if isinstance(v, list) else v}" for k, v in cfg.items()))
    for r in report["results"]:
        status = r["status"] if r["window"] is None else f"{r['status']}({r['window']})"
        line = f"  [{status}] {r['check']}"
        if r["witness"]:
            line += f": {r['witness']}"
        lines.append(line)
    if report["elapsed_ms"] is not None:
        lines.append(f"elapsed: {report['elapsed_ms']} ms")
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser():
    ap = _Parser(prog="ptower", description="Perfectoid tower toolkit.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("config")
    ap.add_argument("--level", type=int, default=None)
    ap.add_argument("--max-level", type=int, default=None)
    ap.add_argument("--format", choices=("text", "json"), default="text")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--csv", default=None, help="write the limcm table as CSV")
    ap.add_argument("--no-timing", action="store_true", help="omit wall time from reports")
    ap.add_argument("--version", action="version", version=f"ptower {__version__}")
    return ap


def main(argv=None) -> int:
    from .dsl import parse_config
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        sys.stderr.write(f"ptower: cannot read {args.config}: {exc}\n")
        return EXIT_USAGE
    try:
        cfg = parse_config(text)
    except (ParseError, ValidationError) as exc:
        sys.stderr.write(f"ptower: {args.config}: {exc}\n")
        return EXIT_USAGE
    if args.seed is None:
        args.seed = cfg.seed
    try:
        report, status = run(args.command, cfg, args)
    except ModeMismatch as exc:
        sys.stderr.write(f"ptower: {exc}\n")
        return EXIT_USAGE
    except PtowerError as exc:
        sys.stderr.write(f"ptower: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL
    if args.format == "json":
        sys.stdout.write(json.dumps(report, indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(render_text(report))
    return status


if __name__ == "__main__":
    sys.exit(main())
