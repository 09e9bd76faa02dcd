"""Command-line entry point: ``wkserver {parse,simulate,opt,verify,gen,bench}``.

Exit codes: 0 ok, 1 usage or input error, 2 invariant violation,
3 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from ..adversary import GeneratorSpec, generate
from ..core import (
    format_config, format_requests, parse_config, parse_requests, parse_weights, round_weights,
)
from ..errors import ConstantTooLargeError, InstanceTooLargeError, WkServerError
from ..gks import GksModel, gks_setting, parse_tuple_requests
from ..offline import opt_cost, verify_corpus
from ..phase_model import parse_multiphase, parse_phase, split_phases, to_pretty, to_text
from ..phase_model.constants import ConstantsProfile
from ..setting import Setting
from ..strategy import TRACE_HEADER, serve_online
from .config import load_config
from .experiment import aggregate, bounds_for, experiment_setting, run_experiment, summary_csv, trials_csv

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_BUDGET = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_text(path: Optional[str], inline: Optional[str]) -> str:
    if inline is not None:
        return inline
    if path is None or path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: Optional[str], text: str) -> None:
    if not path or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _setting(args) -> Setting:
    w = round_weights(parse_weights(args.weights))
    if getattr(args, "gks", None):
        sizes = tuple(int(x) for x in args.gks.split(","))
        return gks_setting(sizes, w, ConstantsProfile.parse(args.d).overrides)
    return Setting.uniform(args.n_points, w, ConstantsProfile.parse(args.d).overrides)


def _requests(setting, text: str) -> list:
    if isinstance(setting.model, GksModel):
        return parse_tuple_requests(text)
    return list(parse_requests(text))


def _anchors(setting, text: str) -> list:
    if not text:
        return []
    out = []
    for tok in text.split(","):
        if ":" in tok:
            a, b = tok.split(":")
            out.append((int(a), int(b)))
        else:
            out.append(int(tok))
    return out


def _add_setting_args(p, gks=True):
    p.add_argument("--weights", default="1,2", help="comma-separated weights (rounded up to the constrained regime)")
    p.add_argument("--n-points", type=int, default=20, help="uniform metric size")
    p.add_argument("--d", default="default", help="'default' or d_1,d_2,... override (non-theoretical mode)")
    if gks:
        p.add_argument("--gks", default=None, metavar="SIZES",
                       help="generalized k-server with these space sizes; requests are (a,b,...) tuples")


def _note_profile(setting) -> None:
    if not setting.profile.theoretical:
        print(f"# non-theoretical mode: {setting.profile.describe()}", file=sys.stderr)


# -- subcommands -------------------------------------------------------------------


def cmd_parse(args) -> int:
    setting = _setting(args)
    rho = _requests(setting, _read_text(args.input, args.requests))
    if args.split:
        split = split_phases(setting, rho)
        for t in split.phases:
            print(f"phase [{t.start},{t.end})")
        tail = "phase" if split.tail_is_phase else "incomplete"
        print(f"tail [{split.tail_start},{len(rho)}) {tail}")
        return EXIT_OK
    level = args.level or setting.k
    fn = parse_multiphase if args.multiphase else parse_phase
    out = fn(setting, level, _anchors(setting, args.anchors), rho)
    print(out)
    if out.tree is not None:
        print(to_pretty(out.tree) if args.pretty else to_text(out.tree))
    return EXIT_OK


def _coverage_ok(setting, trace) -> bool:
    return all(setting.model.covers(rec.config, rec.request) for rec in trace)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, {"seed": args.seed, "weights": args.weights, "d": args.d,
                                    "n_points": args.n_points, "initial": args.initial,
                                    "trace": args.trace})
    setting = experiment_setting(cfg)
    _note_profile(setting)
    if args.input is not None or args.requests is not None:
        rho = list(parse_requests(_read_text(args.input, args.requests)))
    else:
        spec = GeneratorSpec(kind=cfg.generator, n_points=cfg.n_points, weights=tuple(setting.weights),
                             d=setting.profile.overrides, seed=cfg.seed, length=cfg.length,
                             phases=cfg.phases, alphabet=cfg.alphabet_points)
        rho = generate(spec).requests
    res = serve_online(setting, cfg.initial_config, rho, cfg.seed)
    if cfg.trace:
        lines = [TRACE_HEADER] + [rec.to_line() for rec in res.trace]
        _write(cfg.trace, "\n".join(lines) + "\n")
    print(f"requests {len(rho)}")
    print(f"phases {res.phases} completed {res.completed}")
    print(f"cost {res.cost}")
    print("phase_costs " + (" ".join(str(c) for c in res.phase_costs) or "-"))
    print(f"final {format_config(res.final_config)}")
    if not _coverage_ok(setting, res.trace):
        print("violation: a consumed request was not covered", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_opt(args) -> int:
    setting = _setting(args)
    rho = _requests(setting, _read_text(args.input, args.requests))
    if args.free:
        initial = None
    elif args.initial:
        initial = parse_config(args.initial)
    elif args.gks:
        initial = (0,) * setting.k
    else:
        initial = tuple(i % args.n_points for i in range(setting.k))
    res = opt_cost(setting, rho, initial, args.budget)
    print(f"mode {res.mode}")
    print(f"cost {res.cost}")
    for c in res.witness.configs:
        print(format_config(c))
    return EXIT_OK


def cmd_verify(args) -> int:
    setting = _setting(args)
    text = _read_text(args.input, args.requests)
    bad = 0
    n = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        rho = _requests(setting, line)
        for check in verify_corpus(setting, rho, args.budget):
            n += 1
            status = "ok" if check.ok else "FAIL"
            if not check.applicable:
                status = "n/a"
            print(f"line {lineno}: opt {check.opt} bound {check.bound} margin {check.margin} {status}")
            bad += not check.ok
    print(f"phases {n} failures {bad}")
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_gen(args) -> int:
    spec = GeneratorSpec(kind=args.kind, n_points=args.n_points,
                         weights=tuple(round_weights(parse_weights(args.weights))),
                         d=ConstantsProfile.parse(args.d).overrides, seed=args.seed,
                         length=args.length, phases=args.phases,
                         alphabet=tuple(int(x) for x in args.alphabet.split(",")) if args.alphabet else None,
                         terminate=not args.open_tail)
    lines = []
    for i in range(args.count):
        g = generate(GeneratorSpec(**{**spec.__dict__, "seed": args.seed + i}))
        if args.boundaries and g.boundaries:
            lines.append("# " + " ".join(f"[{a},{b})" for a, b in g.boundaries))
        lines.append(format_requests(g.requests))
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    flags = {
        "trials": args.trials, "seed": args.seed, "weights": args.weights, "d": args.d,
        "n_points": args.n_points, "generator": args.generator, "phases": args.phases,
        "opt_mode": args.opt_mode, "report": args.report,
        "verify": True if args.verify else None,
    }
    cfg = load_config(args.config, flags)
    setting = experiment_setting(cfg)
    _note_profile(setting)
    trials = run_experiment(cfg)
    report = aggregate(trials, bounds_for(setting))
    if cfg.report:
        _write(cfg.report, trials_csv(trials))
        _write(cfg.report + ".summary.csv", summary_csv(report))
    else:
        _write(None, trials_csv(trials))
        _write(None, summary_csv(report))
    if report.violation():
        print(f"violation: bound exceeded in {report.exceeded}/{report.trials} trials", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="wkserver", description="Weighted k-server phase simulator.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="parse a request sequence into a phase tree")
    _add_setting_args(p)
    p.add_argument("input", nargs="?", help="request file ('-' for stdin)")
    p.add_argument("--requests", help="inline request sequence")
    p.add_argument("--level", type=int, default=None)
    p.add_argument("--anchors", default="", help="comma-separated anchor points (GKS: space:index)")
    p.add_argument("--multiphase", action="store_true")
    p.add_argument("--pretty", action="store_true")
    p.add_argument("--split", action="store_true", help="cut into complete (k,{})-phases")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("simulate", help="run the online algorithm and write a trace")
    p.add_argument("input", nargs="?", help="request file; generated from the config when omitted")
    p.add_argument("--requests")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--weights")
    p.add_argument("--n-points", type=int)
    p.add_argument("--d")
    p.add_argument("--initial")
    p.add_argument("--trace")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("opt", help="exact offline optimum with a witness")
    _add_setting_args(p)
    p.add_argument("input", nargs="?")
    p.add_argument("--requests")
    p.add_argument("--initial", help="starting configuration (default 0,1,..,k-1)")
    p.add_argument("--free", action="store_true", help="minimise over the starting configuration too")
    p.add_argument("--budget", type=int, default=200_000)
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("verify", help="check OPT >= w_k/2^k on every complete phase")
    _add_setting_args(p)
    p.add_argument("input", nargs="?", help="one request sequence per line")
    p.add_argument("--requests")
    p.add_argument("--budget", type=int, default=200_000)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate request sequences")
    _add_setting_args(p, gks=False)
    p.add_argument("--kind", choices=("uniform", "phase", "chaser"), default="phase")
    p.add_argument("--phases", type=int, default=1)
    p.add_argument("--length", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1, help="sequences to emit (seeds seed, seed+1, ...)")
    p.add_argument("--alphabet", default="")
    p.add_argument("--open-tail", action="store_true", help="leave the last phase unterminated")
    p.add_argument("--boundaries", action="store_true", help="emit phase spans as comment lines")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run seeded trials and emit CSV reports")
    p.add_argument("--config")
    for flag, kind in (("--trials", int), ("--seed", int), ("--weights", str), ("--d", str),
                       ("--n-points", int), ("--phases", int), ("--report", str)):
        p.add_argument(flag, type=kind)
    p.add_argument("--generator", choices=("uniform", "phase", "chaser"))
    p.add_argument("--opt-mode", choices=("fixed", "free"))
    p.add_argument("--verify", action="store_true")
    p.set_defaults(func=cmd_bench)
    return top


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (InstanceTooLargeError, ConstantTooLargeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (WkServerError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
