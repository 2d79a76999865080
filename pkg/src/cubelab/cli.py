"""Command-line front end. Exit codes: 0 success, 1 usage/validation, 2 assertion failure."""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import asdict, dataclass, field

from . import _io
from . import asymptotics as asy
from . import dualnorm, khintchine, profile, verify

DEFAULT_SEED = 42
DEFAULT_BUDGET = 60.0
HEATMAP_MAX_SIDE = 201


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    subcommand: str
    seed: int
    threads: int
    budget: float
    format: str
    out: str | None
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _range(text: str):
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or A..B, got {text!r}") from None
    return lo, hi


def _floats(text: str):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("CUBELAB_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"CUBELAB_SEED must be an integer, got {env!r}") from None


def cmd_dual(args, cfg: RunConfig) -> int:
    lo, hi = args.n
    if lo < 1 or hi < lo or hi > dualnorm.MULTISTART_MAX:
        raise UsageError(f"--n must satisfy 1 <= A <= B <= {dualnorm.MULTISTART_MAX}")
    if args.restarts is not None and args.restarts < 0:
        raise UsageError("--restarts must be nonnegative")
    config = dualnorm.DualConfig(restarts=args.restarts, seed=cfg.seed, workers=cfg.threads)
    fig = dualnorm.figure1(lo, hi, config, budget=cfg.budget)
    if not fig.complete:
        done = f"rows up to n={fig.rows[-1].n}" if fig.rows else "no rows completed"
        print(f"budget of {cfg.budget:g}s exhausted; {done}", file=sys.stderr)
    _emit(fig.to_csv() if cfg.format == "csv" else fig.to_json(), cfg.out)
    return 0


def _check_p(ps, lo_closed: bool):
    for p in ps:
        ok = (0.5 <= p < 1.0) if lo_closed else (0.5 < p < 1.0)
        if not ok:
            raise UsageError(f"p must lie in {'[' if lo_closed else '('}0.5, 1), got {p}")


def cmd_khintchine(args, cfg: RunConfig) -> int:
    _check_p(args.p, lo_closed=True)
    if not 1 <= args.n <= khintchine.ENUM_MAX:
        raise UsageError(f"--n must lie in 1..{khintchine.ENUM_MAX}")
    rows = khintchine.profile_rows(args.p, args.n, khintchine.QConfig(seed=cfg.seed))
    header = ["p", "q_lower", "n_used", "q_upper", "epsilon", "branch2"]
    if cfg.format == "csv":
        _emit(_io.csv_text(header, rows), cfg.out)
    else:
        _emit(_io.json_text([dict(zip(header, r)) for r in rows]), cfg.out)
    return 0


def cmd_certify(args, cfg: RunConfig) -> int:
    _check_p(args.p, lo_closed=False)
    results = []
    for p in args.p:
        try:
            results.append(khintchine.certify_epsilon(p, args.theta))
        except khintchine.CertificationError as exc:
            results.append(exc)
    if len(results) == 1 and isinstance(results[0], Exception):
        print(f"certification failed at p={args.p[0]}: {results[0]}", file=sys.stderr)
        return 2
    if cfg.format == "json":
        payload = [r.to_dict() if not isinstance(r, Exception) else {"p": p, "error": str(r)}
                   for p, r in zip(args.p, results)]
        _emit(_io.json_text(payload[0] if len(payload) == 1 else payload), cfg.out)
    else:
        rows = []
        for p, r in zip(args.p, results):
            if isinstance(r, Exception):
                rows.append((p, math.nan, math.nan, math.nan, math.nan, math.nan))
            else:
                rows.append((p, r.epsilon, r.B_bound, r.branch1, r.branch2, r.q_upper))
        _emit(_io.csv_text(["p", "epsilon", "B_bound", "branch1", "branch2", "q_upper"], rows), cfg.out)
    return 0


def cmd_bound(args, cfg: RunConfig) -> int:
    if args.grid < 100:
        raise UsageError("--grid must be at least 100")
    value = khintchine.improved_cdual_bound(args.grid, method=args.method)
    margin = math.pi / 2 - value
    report = {"bound": value, "pi_over_2": math.pi / 2, "margin": margin, "grid": args.grid, "method": args.method}
    if cfg.format == "json":
        _emit(_io.json_text(report), cfg.out)
    else:
        _emit(_io.csv_text(list(report), [list(report.values())]), cfg.out)
    if not value < math.pi / 2 - 1e-3:
        print(f"bound {value!r} is not below pi/2 - 1e-3", file=sys.stderr)
        return 2
    return 0


BELLMAN_CHECKS = ("two-point", "curvature", "mb", "two-value", "symmetric")


def cmd_bellman(args, cfg: RunConfig) -> int:
    if args.check not in BELLMAN_CHECKS:
        raise UsageError(f"unknown check {args.check!r}; available: {', '.join(BELLMAN_CHECKS)}")
    if args.check == "two-point":
        if args.grid < 3:
            raise UsageError("--grid must be at least 3")
        g, d = profile.defect_grid(args.grid, args.k if args.k is not None else profile.SQRT_2PI)
        stride = max(1, -(-args.grid // HEATMAP_MAX_SIDE))
        rows = [(g[i], g[j], d[i, j]) for i in range(0, len(g), stride) for j in range(0, len(g), stride)]
        _emit(_io.csv_text(["a", "b", "defect"], rows), cfg.out)
        m = float(d.min())
        print(f"min defect {m:.6e}", file=sys.stderr)
        if args.k is None and m < -1e-12:
            return 2
        return 0
    if args.check == "curvature":
        rows = []
        for c in (args.c if args.c else [1.0, 0.1, 0.01]):
            if c <= 0:
                raise UsageError("c must be positive")
            w = profile.two_point_curvature_fails(c)
            rows.append((c, w.a, w.b, w.value))
        _emit(_io.csv_text(["c", "a", "b", "value"], rows), cfg.out)
        return 0
    if args.check == "mb":
        fam = profile.family_mb()
        rows = [(str(k), v) for k, v in fam.items()]
        rows += [("chain(1/8)", profile.chain_constant(0.125)), ("chain(M_I)", profile.chain_constant(fam["I"]))]
        _emit(_io.csv_text(["candidate", "M_B"], rows), cfg.out)
        return 0
    if args.check == "two-value":
        val, arg = profile.two_value_constant()
        _emit(_io.csv_text(["value", "argmax", "reference"], [(val, arg, math.sqrt(math.pi / 2))]), cfg.out)
        return 0
    r = profile.symmetric_set_constants()
    _emit(_io.csv_text(["c1", "c2", "ana_max", "ana_argmax"], [(r.c1, r.c2, r.ana_max, r.ana_argmax)]), cfg.out)
    return 0


def cmd_series(args, cfg: RunConfig) -> int:
    if args.name not in asy.SERIES:
        raise UsageError(f"unknown series {args.name!r}; available: {', '.join(asy.SERIES)}")
    if args.n_max < 2:
        raise UsageError("--n-max must be at least 2")
    ns = asy.default_indices(args.name, args.n_max)
    last = args.n_max
    if args.name in ("majority-odd", "clt") and last % 2 == 0:
        last -= 1
    if args.name == "majority-even" and last % 2:
        last -= 1
    if last not in ns:
        ns.append(last)
    points = asy.series_points(args.name, ns)
    _emit(_io.csv_text(["n", "value", "reference", "gap"], [(p.n, p.value, p.reference, p.gap) for p in points]),
          cfg.out)
    print(f"final gap {points[-1].gap:.6e} at n={points[-1].n}", file=sys.stderr)
    return 0


def cmd_verify(args, cfg: RunConfig) -> int:
    results = verify.run_groups(cfg.seed)
    lines = [f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}" for r in results]
    for name, value in verify.CONSTANTS.items():
        lines.append(f"const {name} = {_io.fmt(value)}")
    text = "\n".join(lines) + "\n"
    _emit(text, cfg.out)
    if cfg.out is not None:
        sys.stdout.write(text)
    return 0 if all(r.passed for r in results) else 2


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cubelab", description="Hamming-cube Poincare constant laboratory")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $CUBELAB_SEED or 42)")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--budget", type=float, default=DEFAULT_BUDGET, help="time budget in seconds")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("dual", parents=[common], help="dual constant per dimension")
    p.add_argument("--n", type=_range, default=(1, 10), help="N or A..B")
    p.add_argument("--restarts", type=int, default=None, help="random restarts (default 200 + 50 n)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("khintchine", parents=[common], help="q(p) profile")
    p.add_argument("--p", type=_floats, required=True)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_khintchine)

    p = sub.add_parser("certify", parents=[common], help="moment certificate for q(p) < 1")
    p.add_argument("--p", type=_floats, required=True)
    p.add_argument("--theta", type=float, default=0.99)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("bound", parents=[common], help="improved upper bound below pi/2")
    p.add_argument("--grid", type=int, default=400)
    p.add_argument("--method", choices=("combined", "pz", "envelope"), default="combined")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("bellman", parents=[common], help="profile inequalities and constants")
    p.add_argument("--check", required=True, help=", ".join(BELLMAN_CHECKS))
    p.add_argument("--grid", type=int, default=2001)
    p.add_argument("--k", type=float, default=None, help="two-point constant (default sqrt(2 pi))")
    p.add_argument("--c", type=_floats, default=None, help="curvature constants")
    p.set_defaults(func=cmd_bellman, format="csv")

    p = sub.add_parser("series", parents=[common], help="asymptotic sequences")
    p.add_argument("--name", required=True, help=", ".join(asy.SERIES))
    p.add_argument("--n-max", type=int, default=10_000)
    p.set_defaults(func=cmd_series, format="csv")

    p = sub.add_parser("verify", parents=[common], help="run all invariant groups")
    p.set_defaults(func=cmd_verify, format="text")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.threads < 1:
            raise UsageError("--threads must be positive")
        if args.budget <= 0:
            raise UsageError("--budget must be positive")
        cfg = RunConfig(
            subcommand=args.subcommand,
            seed=_resolve_seed(args),
            threads=args.threads,
            budget=args.budget,
            format=args.format,
            out=args.out,
        )
        return args.func(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"cubelab: error: {exc}", file=sys.stderr)
        return 1
    except AssertionError as exc:
        print(f"cubelab: assertion failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
