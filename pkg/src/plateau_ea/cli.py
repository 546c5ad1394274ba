"""Command-line front end: chain / simulate / theory / tail / compare / validate.

Every command emits a deterministic CSV (header row, value rows, provenance
footer comments) to --out or stdout. Configuration can also come from an INI
file (--config) with one section per command; explicit flags win.

Exit codes: 0 success, 1 usage error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import configparser
import io
import math
import sys
import warnings
from fractions import Fraction

from . import __version__
from . import levelchain as lc
from . import theory
from .bitcore import PlateauParams
from .engine import RunConfig, StartPolicy, run_trials
from .levelchain import InternalConsistencyError
from .mutation import HyperHeuristicPolicy, OperatorSpec, custom_from_file, pmf_of
from .validate import format_report, run_validation

_HH_NAMES = {
    "simple-random": "simple_random",
    "random-gradient": "random_gradient",
    "permutation": "permutation",
    "greedy": "greedy",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_operator(text: str):
    """rls | 2bit | stdbit:<gamma> | fastga:<beta> | custom:<file> | hh:<policy>"""
    if text == "rls":
        return OperatorSpec.rls()
    if text == "2bit":
        return OperatorSpec.two_bit()
    head, _, arg = text.partition(":")
    if head == "stdbit" and arg:
        return OperatorSpec.standard_bit(Fraction(arg))
    if head == "fastga" and arg:
        return OperatorSpec.fast_ga(float(arg))
    if head == "custom" and arg:
        return custom_from_file(arg)
    if head == "hh" and arg in _HH_NAMES:
        return HyperHeuristicPolicy(_HH_NAMES[arg])
    raise UsageError(f"unknown operator {text!r}")


def parse_start(text: str) -> StartPolicy:
    if text == "random":
        return StartPolicy.random_string()
    if text == "plateau":
        return StartPolicy.plateau_uniform()
    head, _, arg = text.partition(":")
    if head == "level" and arg:
        return StartPolicy.fixed_level(int(arg))
    if head == "string" and arg:
        from .bitcore import BitString

        return StartPolicy.fixed_string(BitString.from01(arg))
    raise UsageError(f"unknown start policy {text!r}")


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError:
        raise UsageError(f"not an integer list: {text!r}") from None


def parse_grid(text: str) -> list[int]:
    """Comma list, or start:stop:step range (inclusive stop)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid range must be start:stop:step, got {text!r}")
        try:
            a, b, s = (int(p) for p in parts)
        except ValueError:
            raise UsageError(f"grid range must be integers: {text!r}") from None
        if s <= 0:
            raise UsageError("grid step must be positive")
        return list(range(a, b + 1, s))
    return parse_int_list(text)


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    return str(x) if x is not None else ""


def write_csv(out, header, rows, footer: dict) -> None:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    for key, value in footer.items():
        buf.write(f"# {key}={value}\n")
    text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _op_label(op) -> str:
    return op.label()


def cmd_chain(args) -> int:
    ops = [parse_operator(s) for s in args.op]
    ns, ks = args.n, args.k
    exact = args.mode == "rational"
    kmax = max(ks)
    header = ["n", "k", "op", "mode"]
    header += [f"p_{i}_{j}" for i in range(kmax) for j in range(kmax)]
    header += [f"exit_{i}" for i in range(kmax)]
    header += [f"rowsum_{i}" for i in range(kmax)]
    header += [f"ET_{i}" for i in range(kmax)]
    header += [f"eig_{i}" for i in range(kmax)]
    header += [f"pistar_{i}" for i in range(kmax)]
    header += [f"u_{i}" for i in range(kmax)]
    header += ["lambda0_pred", "eps"]
    rows = []
    dumps = []
    for n in ns:
        for k in ks:
            for op in ops:
                dist = pmf_of(op, n, exact=exact)
                chain = lc.build(n, k, dist, exact=exact)
                if args.dump:
                    dumps.append(lc.dump_matrix(chain))
                times = lc.absorption_times(chain)
                spec = lc.spectrum(chain)
                stat = lc.conditional_stationary(chain, spec)
                u = lc.uniform_level_vector(n, k, exact=exact)
                sums = lc.row_sums(chain)

                def pad(vals):
                    vals = list(vals)
                    return vals + [None] * (kmax - len(vals))

                row = [n, k, _op_label(op), args.mode]
                for i in range(kmax):
                    for j in range(kmax):
                        row.append(chain.P[i][j] if i < k and j < k else None)
                row += pad(chain.exit)
                row += pad(sums)
                row += pad(times)
                row += pad(spec.eigenvalues)
                row += pad(stat.pi_star)
                row += pad(u)
                row.append(theory.lambda0_prediction(n, k, dist))
                row.append(float(lc.gap_bound(dist, k)) if dist.p_one > 0 else None)
                rows.append(row)
    write_csv(args.out, header, rows, {"seed": "n/a", "version": __version__, "mode": args.mode})
    if args.dump:
        with open(args.dump, "w") as fh:
            fh.write("".join(dumps))
    return 0


def _exact_mean(n, k, op, start):
    """Exact E[T] for chain-predictable operators and plateau starts.

    None when no exact value applies: non-reducible policies, random-string
    starts, or chains where the optimum is unreachable from some level (then
    the simulation itself can only report cap failures).
    """
    if isinstance(op, HyperHeuristicPolicy) and op.kind in ("permutation", "greedy"):
        return None
    if start.kind == "level" and start.level == k:
        return 0.0
    if start.kind not in ("plateau", "level"):
        return None
    use_exact = not (isinstance(op, OperatorSpec) and op.kind == "fast_ga")
    dist = pmf_of(op, n, exact=use_exact)
    chain = lc.build(n, k, dist, exact=dist.exact)
    try:
        times = [float(t) for t in lc.absorption_times(chain)]
    except lc.NoExitPathError:
        return None
    if start.kind == "plateau":
        u = lc.uniform_level_vector(n, k, exact=False)
        return sum(p * t for p, t in zip(u, times))
    return times[start.level]


def cmd_simulate(args) -> int:
    ops = [parse_operator(s) for s in args.op]
    start = parse_start(args.start)
    header = [
        "n", "k", "op", "start", "trials", "mean", "std_error",
        "failure_fraction", "exact_ET", "z",
    ]
    rows = []
    for n in args.n:
        for k in args.k:
            for op in ops:
                cfg = RunConfig(
                    params=PlateauParams(n, k),
                    operator=op,
                    start=start,
                    seed=args.seed,
                    max_iters=args.tmax,
                )
                s = run_trials(cfg, args.trials, threads=args.threads)
                exact = _exact_mean(n, k, op, start)
                z = None
                if exact is not None and s.std_error > 0:
                    z = (s.mean - exact) / s.std_error
                rows.append(
                    [n, k, _op_label(op), start.describe(), s.trials, s.mean,
                     s.std_error, s.failure_fraction, exact, z]
                )
    write_csv(
        args.out, header, rows,
        {"seed": args.seed, "version": __version__, "mode": "float"},
    )
    return 0


def cmd_theory(args) -> int:
    if args.optimal_rate:
        header = ["k", "optimal_gamma"]
        rows = [[k, theory.optimal_gamma(k)] for k in args.k]
        write_csv(args.out, header, rows, {"seed": "n/a", "version": __version__, "mode": "float"})
        return 0
    if args.table1:
        ks = tuple(args.k) if args.k_explicit else (2, 4, 6)
        header = ["operator"] + [f"k={k}" for k in ks]
        rows = [[label] + [vals[k] for k in ks] for label, vals in theory.table1(ks)]
        write_csv(args.out, header, rows, {"seed": "n/a", "version": __version__, "mode": "float"})
        return 0
    if not args.op_explicit:
        raise UsageError("theory needs --table1, --optimal-rate, or --op")
    ops = [parse_operator(s) for s in args.op]
    header = ["op", "k", "n", "leading_constant", "asymptotic_ET", "lambda0_pred", "eps"]
    rows = []
    for op in ops:
        for k in args.k:
            const = None
            try:
                const = theory.leading_constant(op, k)
            except theory.NoPredictorError:
                pass
            for n in args.n:
                try:
                    dist = pmf_of(op, n)
                except ValueError:
                    rows.append([_op_label(op), k, n, const, None, None, None])
                    continue
                pred = theory.predict(n, k, dist)
                rows.append(
                    [_op_label(op), k, n, const, pred.asymptotic_ET, pred.lambda0_pred, pred.eps]
                )
    write_csv(args.out, header, rows, {"seed": "n/a", "version": __version__, "mode": "float"})
    return 0


def cmd_tail(args) -> int:
    op = parse_operator(args.op[0]) if args.op else OperatorSpec.rls()
    n, k = args.n[0], args.k[0]
    dist_exact = pmf_of(op, n, exact=True) if not (isinstance(op, OperatorSpec) and op.kind == "fast_ga") else None
    dist = pmf_of(op, n, exact=False)
    chain = lc.build(n, k, dist, exact=False)
    u = lc.uniform_level_vector(n, k, exact=False)
    times = [float(t) for t in lc.absorption_times(chain)]
    et = sum(p * t for p, t in zip(u, times))
    tmax = args.tmax if args.tmax else int(math.ceil(5 * et))
    grid = args.grid if args.grid else sorted({int(round(tmax * i / 20)) for i in range(21)})
    grid = [t for t in grid if t <= tmax]

    stat = lc.conditional_stationary(chain)
    pi0 = lc.leading_mass(chain, u, stat)
    eps = float(lc.gap_bound(dist, k))
    N = lc.plateau_size(n, k)
    exact_vals = lc.tail_curve(chain, u, grid)

    emp = {}
    sig = {}
    if args.trials:
        cfg = RunConfig(
            params=PlateauParams(n, k),
            operator=op,
            start=StartPolicy.plateau_uniform(),
            seed=args.seed,
        )
        s = run_trials(cfg, args.trials, threads=args.threads, tail_grid=grid)
        for t, c in zip(grid, s.tail_counts):
            p = c / s.trials
            emp[t] = p
            sig[t] = math.sqrt(max(p * (1 - p), 1e-12) / s.trials)

    header = ["t", "exact", "main", "envelope", "empirical", "empirical_sigma",
              "ci95_lo", "ci95_hi"]
    rows = []
    for t, ex in zip(grid, exact_vals):
        main = pi0 * stat.lambda0**t
        env = math.sqrt(N) * (1 - eps) ** t
        lo = hi = None
        if t in emp:
            lo = max(0.0, emp[t] - 1.96 * sig[t])
            hi = min(1.0, emp[t] + 1.96 * sig[t])
        rows.append([t, float(ex), main, env, emp.get(t), sig.get(t), lo, hi])
    footer = {
        "seed": args.seed if args.trials else "n/a",
        "version": __version__,
        "mode": "float",
        "pi0_norm": repr(pi0),
        "lambda0": repr(stat.lambda0),
    }
    status = 0
    if args.check_envelope:
        if dist_exact is None:
            raise UsageError("--check-envelope needs an exactly representable operator")
        rep = lc.check_tail_envelope(n, k, dist_exact, t_max=tmax)
        footer["envelope_min_slack"] = f"{rep.min_slack:.6f}"
        footer["envelope_holds"] = str(rep.holds)
        if not rep.holds:
            status = 2
    write_csv(args.out, header, rows, footer)
    return status


def cmd_compare(args) -> int:
    ops = [parse_operator(s) for s in args.op]
    header = [
        "n", "k", "op", "exact_ET_plateau_uniform", "asymptotic_ET", "ratio",
        "lambda0", "lambda0_pred", "gap", "eps",
    ]
    rows = []
    for k in args.k:
        for op in ops:
            for n in args.n:
                exact_ok = not (isinstance(op, OperatorSpec) and op.kind == "fast_ga")
                dist = pmf_of(op, n, exact=exact_ok)
                chain = lc.build(n, k, dist, exact=exact_ok)
                u = lc.uniform_level_vector(n, k, exact=exact_ok)
                et = float(sum(p * t for p, t in zip(u, lc.absorption_times(chain))))
                asym = theory.asymptotic_runtime(n, k, dist)
                s = lc.spectrum(chain)
                gap = 1 - max(abs(l) for l in s.eigenvalues[1:])
                rows.append(
                    [n, k, _op_label(op), et, asym, et / asym, s.eigenvalues[0],
                     theory.lambda0_prediction(n, k, dist),
                     gap, float(lc.gap_bound(dist, k)) if dist.p_one > 0 else None]
                )
    write_csv(args.out, header, rows, {"seed": "n/a", "version": __version__, "mode": "float"})
    return 0


def cmd_validate(args) -> int:
    results = run_validation(inject_fault=args.inject_fault, fast=args.fast)
    report = format_report(results)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report + "\n")
    else:
        print(report)
    return 0 if all(r.passed for r in results) else 2


_DEFAULTS = {
    "n": "10",
    "k": "2",
    "op": ["rls"],
    "trials": "1000",
    "seed": "0",
    "mode": "float",
    "tmax": "",
    "grid": "",
    "start": "plateau",
    "threads": "",
}


def build_parser() -> _Parser:
    parser = _Parser(prog="plateau-ea", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, trials=False):
        p.add_argument("--config", default=None, help="INI file; section per command")
        p.add_argument("--n", default=None, help="problem size or comma list")
        p.add_argument("--k", default=None, help="plateau radius or comma list")
        p.add_argument("--op", action="append", default=None,
                       help="rls|2bit|stdbit:<g>|fastga:<b>|custom:<file>|hh:<policy>")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        if trials:
            p.add_argument("--trials", default=None)
            p.add_argument("--seed", default=None)
            p.add_argument("--threads", default=None)

    p = sub.add_parser("chain", help="exact level-chain quantities")
    common(p)
    p.add_argument("--mode", choices=("float", "rational"), default=None)
    p.add_argument("--dump", default=None,
                   help="also write plain-text matrix dumps to this path")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("simulate", help="Monte Carlo runs vs the exact chain")
    common(p, trials=True)
    p.add_argument("--start", default=None, help="random|plateau|level:<i>|string:<bits>")
    p.add_argument("--tmax", default=None, help="iteration cap per run")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("theory", help="closed-form predictions")
    common(p)
    p.add_argument("--table1", action="store_true", help="emit the comparison table")
    p.add_argument("--optimal-rate", action="store_true", dest="optimal_rate")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("tail", help="exact, predicted, and empirical tails")
    common(p, trials=True)
    p.add_argument("--tmax", default=None)
    p.add_argument("--grid", default=None, help="t grid: comma list or a:b:step")
    p.add_argument("--check-envelope", action="store_true", dest="check_envelope",
                   help="verify the sqrt(N)(1-eps)^t envelope at every t (high precision)")
    p.set_defaults(func=cmd_tail)

    p = sub.add_parser("compare", help="exact chain vs closed forms over a grid")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="run the full identity/trend suite")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--inject-fault", action="store_true", dest="inject_fault",
                   help="perturb one matrix entry; the balance check must fail")
    p.add_argument("--fast", action="store_true")
    p.set_defaults(func=cmd_validate)
    return parser


def _apply_config_and_defaults(args) -> None:
    file_vals = {}
    if getattr(args, "config", None):
        cp = configparser.ConfigParser()
        read = cp.read(args.config)
        if not read:
            raise UsageError(f"config file not found: {args.config}")
        if cp.has_section(args.command):
            file_vals = dict(cp.items(args.command))

    def resolve(name, fallback):
        current = getattr(args, name, None)
        if current is not None:
            return current
        if name in file_vals:
            val = file_vals[name]
            return [val] if name == "op" else val
        return fallback

    args.k_explicit = getattr(args, "k", None) is not None or "k" in file_vals
    args.op_explicit = getattr(args, "op", None) is not None or "op" in file_vals
    for name in ("n", "k"):
        if hasattr(args, name):
            setattr(args, name, parse_int_list(resolve(name, _DEFAULTS[name])))
    if hasattr(args, "op"):
        args.op = resolve("op", _DEFAULTS["op"])
    if hasattr(args, "trials"):
        args.trials = int(resolve("trials", _DEFAULTS["trials"]))
        args.seed = int(resolve("seed", _DEFAULTS["seed"]))
        threads = resolve("threads", _DEFAULTS["threads"])
        args.threads = int(threads) if threads else None
    if hasattr(args, "start"):
        args.start = resolve("start", _DEFAULTS["start"])
    if hasattr(args, "mode"):
        args.mode = resolve("mode", _DEFAULTS["mode"])
    if hasattr(args, "tmax"):
        tmax = resolve("tmax", _DEFAULTS["tmax"])
        args.tmax = int(tmax) if tmax else None
    if hasattr(args, "grid"):
        grid = resolve("grid", _DEFAULTS["grid"])
        args.grid = parse_grid(grid) if grid else None
    if getattr(args, "out", None) is not None and not args.out:
        args.out = None


def main(argv=None) -> int:
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config_and_defaults(args)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InternalConsistencyError as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
