"""Command-line front end.

Every subcommand writes one table, as CSV (header row, LF endings, floats
with 17 significant digits, exact rationals split into ``*_num``/``*_den``
columns) or JSON.  ``WEAVER_SEED`` and ``WEAVER_FORMAT`` override the
default seed and output format.

Exit status: 0 on success, 2 on validation errors, 3 when a size cap would
be exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from . import core, hem, oracle, process
from .errors import DomainError, ResourceError, ValidationError

EXIT_OK, EXIT_VALIDATION, EXIT_RESOURCE = 0, 2, 3


class CliError(Exception):
    def __init__(self, flag: str, message: str, status: int = EXIT_VALIDATION):
        super().__init__(f"{flag}: {message}")
        self.status = status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_VALIDATION, f"weaver: error: {message}\n")


# ---------------------------------------------------------------------------
# rendering


def _fmt_float(x: float) -> str:
    return format(x, ".17g")


def render_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    names = list(rows[0])
    rational = {c for c in names if any(isinstance(r.get(c), Fraction) for r in rows)}
    header = []
    for c in names:
        header += [f"{c}_num", f"{c}_den"] if c in rational else [c]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        out = []
        for c in names:
            v = r.get(c)
            if c in rational:
                out += ["", ""] if v is None else [Fraction(v).numerator, Fraction(v).denominator]
            elif isinstance(v, bool):
                out.append("true" if v else "false")
            elif isinstance(v, float):
                out.append(_fmt_float(v))
            else:
                out.append("" if v is None else v)
        writer.writerow(out)
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, Fraction):
        return str(v)
    return v


def render_json(payload) -> str:
    def convert(obj):
        if isinstance(obj, dict):
            return {k: convert(v) for k, v in obj.items()}
        if isinstance(obj, list):
            return [convert(v) for v in obj]
        return _json_value(obj)

    return json.dumps(convert(payload), indent=2) + "\n"


def emit(args, rows: list[dict], extra: dict | None = None) -> str:
    if args.format == "json":
        payload = {"command": args.command, **(extra or {}), "rows": rows}
        return render_json(payload)
    return render_csv(rows)


# ---------------------------------------------------------------------------
# argument helpers


def _prob(args, flag="--p"):
    text = args.p
    try:
        if args.mode == "exact":
            return core.as_prob(core.parse_rational(text), "exact")[0]
        return core.as_prob(float(core.parse_rational(text)), "float")[0]
    except DomainError as exc:
        raise CliError(flag, str(exc)) from None


def _cap_n(args, n: int, cap: int, flag="--n", minimum=1):
    if n < minimum:
        raise CliError(flag, f"{n} is below the minimum {minimum}")
    limit = min(cap, args.max_n) if args.max_n is not None else cap
    if n > limit:
        raise CliError(flag, f"{n} exceeds the cap of {limit}", EXIT_RESOURCE)


def _value(x, mode):
    return x if mode == "exact" else float(x)


# ---------------------------------------------------------------------------
# subcommands


def cmd_pmf(args):
    _cap_n(args, args.n, core.vector_cap(args.mode))
    dist = core.pmf_vector(args.n, _prob(args), args.method, args.mode)
    rows = []
    for k, (y, pk) in enumerate(zip(dist.support(), dist.probs)):
        rows.append(
            {
                "k": k,
                "bits": core.ChoiceVector(args.n, k).as_string(),
                "y": _value(y, args.mode),
                "p_k": _value(pk, args.mode),
            }
        )
    return emit(args, rows, {"n": args.n, "method": args.method, "mode": args.mode})


def cmd_cdf(args):
    p = _prob(args)
    rows = []
    if args.points == "support":
        _cap_n(args, args.n, core.vector_cap(args.mode))
        dist = core.pmf_vector(args.n, p, "direct", args.mode)
        acc = 0 if args.mode == "exact" else 0.0
        for y, pk in zip(dist.support(), dist.probs):
            acc = acc + pk
            rows.append({"x": _value(y, args.mode), "F": _value(acc, args.mode)})
    else:
        _cap_n(args, args.n, core.POINT_MAX_N)
        level = args.n if args.level is None else args.level
        _cap_n(args, level, 20, flag="--level", minimum=0)
        for k in range((1 << level) + 1):
            x = Fraction(k, 1 << level)
            rows.append({"x": _value(x, args.mode), "F": core.cdf_eval(args.n, p, x, args.mode)})
    return emit(args, rows, {"n": args.n, "points": args.points, "mode": args.mode})


def cmd_moments(args):
    _cap_n(args, args.n, core.vector_cap(args.mode))
    p = _prob(args)
    m = args.mode
    rows = [
        {"quantity": "mean", "index": None, "value": core.mean(args.n, p, m)},
        {"quantity": "variance", "index": None, "value": core.variance(args.n, p, m)},
        {"quantity": "variance_ratio", "index": None, "value": _value(core.variance_ratio(args.n), m)},
    ]
    for i in range(args.n):
        rows.append({"quantity": "variance_per_bit", "index": i, "value": core.variance_per_bit(args.n, p, i, m)})
    for j, t in enumerate(core.mean_decomposition(args.n, p, m)):
        rows.append({"quantity": "mean_term", "index": j, "value": t})
    return emit(args, rows, {"n": args.n, "mode": m})


def cmd_triangle(args):
    _cap_n(args, args.n, core.EXACT_VECTOR_MAX_N, minimum=0)
    row = core.triangle_row(args.n)
    rows = [{"n": row.n, "exponents": ",".join(map(str, row.exponents)), "row_sum": row.row_sum}]
    return emit(args, rows)


def cmd_hem(args):
    if args.mode != "exact":
        raise CliError("--mode", "hem evaluators are exact-only")
    p = _prob(args)
    _cap_n(args, args.level, 20, flag="--level", minimum=0)
    mean, var = hem.hem_moments(p)
    if args.moments:
        rows = [{"quantity": "mean", "value": mean}, {"quantity": "variance", "value": var}]
        return emit(args, rows, {"p": p})
    masses = hem.interval_masses(p, args.level)
    rows = []
    for k, (x, F) in enumerate(hem.staircase(p, args.level)):
        rows.append({"k": k, "x": x, "F": F, "mass": masses[k] if k < len(masses) else None})
    return emit(args, rows, {"p": p, "level": args.level, "mean": mean, "variance": var})


def _variance_arg(text, flag):
    try:
        v = core.parse_rational(text)
    except DomainError as exc:
        raise CliError(flag, str(exc)) from None
    if v < 0:
        raise CliError(flag, "variance must be nonnegative")
    return v


def cmd_decompose(args):
    p = _prob(args)
    if args.n < 1:
        raise CliError("--n", f"{args.n} is below the minimum 1")
    if args.n > oracle.SPLIT_MAX_N:
        raise CliError("--n", f"{args.n} exceeds the cap of {oracle.SPLIT_MAX_N}", EXIT_RESOURCE)
    s0 = _variance_arg(args.s0, "--s0")
    s1 = _variance_arg(args.s1, "--s1")
    if args.mode == "float":
        s0, s1 = float(s0), float(s1)
    d = process.variance_decomposition(args.n, p, s0, s1)
    weaving, mixing, holds = oracle.square_split_check(args.n)
    rows = [
        {
            "n": args.n,
            "between_weaving": d.between_weaving,
            "mixing": d.mixing,
            "within": d.within,
            "total": d.total,
            "weaving_sum": weaving,
            "mixing_sum": mixing,
            "identity_holds": holds,
        }
    ]
    return emit(args, rows)


def cmd_enumerate(args):
    if args.mode != "exact":
        raise CliError("--mode", "enumeration is exact-only")
    _cap_n(args, args.n, oracle.ENUMERATION_MAX_N)
    p = _prob(args)
    if args.format == "csv":
        return oracle.enumeration_csv(args.n, p)
    rows = [
        {
            "k": r.k,
            "bits": r.bits.as_string(),
            "conditional_sum": r.conditional_sum,
            "support": r.support,
            "prob": r.prob,
        }
        for r in oracle.enumerate_rows(args.n, p)
    ]
    return emit(args, rows, {"n": args.n, "p": p})


def _component(text, flag):
    try:
        return process.parse_component(text)
    except ValidationError as exc:
        raise CliError(flag, str(exc)) from None


def cmd_simulate(args):
    p = _prob(args)
    h0 = _component(args.h0, "--h0")
    h1 = _component(args.h1, "--h1")
    try:
        process.validate_pair(h0, h1)
    except ValidationError as exc:
        raise CliError("--h0/--h1", str(exc)) from None
    n_cap = process.CONDITIONAL_MAX_N if args.process == "condmean" else process.PATH_MAX_N
    _cap_n(args, args.n, n_cap)
    if args.reps < 1:
        raise CliError("--reps", "must be at least 1")
    if args.workers < 1:
        raise CliError("--workers", "must be at least 1")
    if args.process != "condmean" and args.reps * ((1 << args.n) - 1) > args.max_obs:
        raise CliError("--max-obs", f"reps * (2**n - 1) exceeds the budget {args.max_obs}", EXIT_RESOURCE)
    try:
        cfg = process.SimulationConfig(
            process=args.process, n=args.n, p=p, h0=h0, h1=h1, reps=args.reps,
            seed=args.seed, epsilon=args.epsilon, max_obs=args.max_obs,
        )
    except ValidationError as exc:
        raise CliError("--seed/--epsilon", str(exc)) from None
    report = process.simulate(cfg, workers=args.workers)
    if args.format == "json":
        return report.to_json()
    return render_csv([report.to_dict()])


COMMANDS = {
    "pmf": cmd_pmf,
    "cdf": cmd_cdf,
    "moments": cmd_moments,
    "triangle": cmd_triangle,
    "hem": cmd_hem,
    "decompose": cmd_decompose,
    "simulate": cmd_simulate,
    "enumerate": cmd_enumerate,
}


def build_parser() -> argparse.ArgumentParser:
    try:
        env_seed = int(os.environ.get("WEAVER_SEED", "20240517"))
    except ValueError:
        env_seed = 20240517

    common = _Parser(add_help=False)
    common.add_argument("--mode", choices=core.MODES, default="exact")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--output", "-o", default=None, help="file path (default: standard output)")
    common.add_argument("--max-n", type=int, default=None, help="lower the size cap on --n")

    parser = _Parser(prog="weaver", description="Weaver's distribution toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, help=help_text, parents=[common])

    p = add("pmf", "probability table of W(n, p)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--method", choices=core.METHODS, default="direct")

    p = add("cdf", "distribution function staircase")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--points", choices=("dyadic", "support"), default="dyadic")
    p.add_argument("--level", type=int, default=None, help="dyadic level (default: n)")

    p = add("moments", "mean, variance and their decompositions")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", required=True)

    p = add("triangle", "exponent row of the geometric triangle")
    p.add_argument("--n", type=int, required=True)

    p = add("hem", "limit distribution at dyadic points")
    p.add_argument("--p", required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--moments", action="store_true", help="emit the limit moments instead")

    p = add("decompose", "variance decomposition of the mixture process")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--s0", default="0")
    p.add_argument("--s1", default="0")

    p = add("simulate", "Monte Carlo run, reported as JSON")
    p.add_argument("--process", choices=("pathmean", "mixdraw", "condmean"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--h0", default="point:0")
    p.add_argument("--h1", default="point:1")
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=env_seed)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--max-obs", type=int, default=process.DEFAULT_MAX_OBS)
    p.add_argument("--workers", type=int, default=1)

    p = add("enumerate", "exhaustive table over all choice vectors")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", required=True)
    return parser


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.format is None:
        # simulate reports are JSON unless asked otherwise
        env_format = os.environ.get("WEAVER_FORMAT")
        if env_format in ("csv", "json"):
            args.format = env_format
        else:
            args.format = "json" if args.command == "simulate" else "csv"
    try:
        text = COMMANDS[args.command](args)
    except CliError as exc:
        print(f"weaver: error: {exc}", file=stderr)
        return exc.status
    except ResourceError as exc:
        print(f"weaver: error: {exc}", file=stderr)
        return EXIT_RESOURCE
    except (DomainError, ValidationError) as exc:
        print(f"weaver: error: {exc}", file=stderr)
        return EXIT_VALIDATION
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
