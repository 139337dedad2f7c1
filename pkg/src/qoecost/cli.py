"""Command-line front end: ``qoe-cost <subcommand> [options]``.

Exit status is 0 on success, 1 on a domain error and 2 on a usage error.
Errors go to stderr as a single ``error: ...`` line.

Defaults for any flag can be set in a ``key=value`` file named by the
``QOE_COST_CONFIG`` environment variable; keys are flag names without the
leading dashes (``sources=80``, ``rtt=0.2``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .errors import DomainError
from .power_fit import FitOptions, FitResult, PowerLaw, fit_power_law, goodness_of_fit, sum_abs_residuals
from .pricing import PUBLISHED_COST_MODEL, CostModel, bandwidth_from_cost, cost_from_bandwidth, load_pricing
from .sweeps import DEFAULT_BUFFER_VALUES, SweepSpec, emit, run_sweep
from .tcp_qoe import TcpScenario, capacity_from_bandwidth, mos_from_plp, mos_label, plp

CONFIG_ENV = "QOE_COST_CONFIG"

# Published goodness-of-fit for the tariff fit, shown next to our own numbers.
PUBLISHED_FIT = {"sse": 38.4806, "r_square": 0.9589, "adj_r_square": 0.9530, "rmse": 2.3446, "dfe": 7}

SWEEP_DEFAULTS = {
    "bandwidth": (15.0, 120.0, 15.0),
    "cost": (30.0, 46.0, 1.0),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(value: float) -> str:
    return f"{value:.7g}"


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from None
    return a, b


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def parse_model(spec: str) -> CostModel:
    """``paper-eq4``, ``fit:<pricing.csv>`` (LAR fit of the file) or a literal ``a,b``."""
    if spec in ("paper-eq4", "paper_eq4"):
        return PUBLISHED_COST_MODEL
    if spec.startswith("fit:"):
        table = load_pricing(spec[4:])
        result = fit_power_law(table.to_dataset(), FitOptions(robust="lar"))
        return CostModel(result.model, provenance="fitted")
    try:
        a, b = _pair(spec)
    except argparse.ArgumentTypeError:
        raise DomainError(f"bad model {spec!r}: use paper-eq4, fit:<file> or a,b") from None
    return CostModel(PowerLaw(a, b), provenance="user_supplied")


def describe_fit(result: FitResult, compare_reference: bool = True, data=None) -> str:
    """Human-readable fit report laid out like a goodness-of-fit table."""
    d = result.diagnostics

    def opt(v):
        return "n/a" if v is None else f"{v:.10g}"

    lines = [
        "Fit: power1  f(x) = a*x^b",
        f"Robust: {result.robust.upper() if result.robust != 'none' else 'off'}",
    ]
    conf = result.confidence
    if conf is None:
        lines.append("Coefficients (confidence bounds n/a):")
        lines.append(f"  a = {result.model.a:.6g}")
        lines.append(f"  b = {result.model.b:.6g}")
    else:
        lines.append(f"Coefficients (with {conf.level:.0%} confidence bounds):")
        for name in ("a", "b"):
            lo, hi = getattr(conf, name)
            lines.append(f"  {name} = {getattr(result.model, name):.6g} ({lo:.6g}, {hi:.6g})")
    lines += [
        "Goodness of fit:",
        f"  SSE: {d.sse:.10g}",
        f"  R-square: {opt(d.r_square)}",
        f"  Adjusted R-square: {opt(d.adj_r_square)}",
        f"  RMSE: {opt(d.rmse)}",
        f"  DFE: {d.dfe}",
        f"  coeff: {d.n_coeff}",
        f"  Sum |residual|: {result.sum_abs_residuals:.10g}",
        f"Termination: {result.termination} after {result.iterations} iterations"
        f" ({'converged' if result.converged else 'not converged'})",
    ]
    if compare_reference:
        ref = PUBLISHED_COST_MODEL.law
        lines.append(f"paper reference: a={ref.a:g}, b={ref.b:g}")
        if data is not None:
            ref_diag = goodness_of_fit(data, ref)
            lines.append(
                f"  on this data: SSE {ref_diag.sse:.6g}, sum |residual| {sum_abs_residuals(data, ref):.6g},"
                f" R-square {opt(ref_diag.r_square)}"
            )
        lines.append(
            "  published: SSE {sse}, R-square {r_square}, Adj R-sq {adj_r_square}, RMSE {rmse}, DFE {dfe}".format(
                **PUBLISHED_FIT
            )
        )
    return "\n".join(lines) + "\n"


def _fit_csv(result: FitResult) -> str:
    flat = result.to_dict()
    diag = flat.pop("diagnostics")
    conf = flat.pop("confidence")
    flat.update(diag)
    if conf is not None:
        flat.update(a_lower=conf["a"][0], a_upper=conf["a"][1], b_lower=conf["b"][0], b_upper=conf["b"][1])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(flat.keys())
    writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in flat.values()])
    return buf.getvalue()


def _scalar(args, record: dict, primary: str) -> str:
    if args.format == "json":
        return json.dumps(record) + "\n"
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(record.keys())
        writer.writerow([repr(v) if isinstance(v, float) else v for v in record.values()])
        return buf.getvalue()
    return _fmt(record[primary]) + "\n"


def _scenario(args, capacity: float = 12_500.0) -> TcpScenario:
    return TcpScenario(
        n_sources=args.sources,
        ack_ratio=args.ack_ratio,
        rate_reduction=args.rate_reduction,
        rtt=args.rtt,
        buffer_len=args.buffer,
        capacity=capacity,
    )


def cmd_plp(args) -> str:
    capacity = args.capacity if args.capacity is not None else capacity_from_bandwidth(args.bandwidth)
    p = plp(_scenario(args, capacity))
    return _scalar(args, {"capacity_pps": capacity, "plp": p.value, "saturated": p.saturated}, "plp")


def cmd_mos(args) -> str:
    record: dict = {}
    if args.plp is not None:
        p = args.plp
    else:
        if args.cost is not None:
            model = parse_model(args.model)
            record["cost"] = args.cost
            record["bandwidth_mbps"] = bandwidth_from_cost(model, args.cost)
            capacity = capacity_from_bandwidth(record["bandwidth_mbps"])
        elif args.bandwidth is not None:
            record["bandwidth_mbps"] = args.bandwidth
            capacity = capacity_from_bandwidth(args.bandwidth)
        else:
            capacity = args.capacity
        record["capacity_pps"] = capacity
        pl = plp(_scenario(args, capacity))
        p = pl.value
    record["plp"] = p
    score = mos_from_plp(p)
    record.update(
        mos_raw=score.value,
        mos_clamped=score.clamped_value,
        mos=score.clamped_value if args.clamp else score.value,
        label=mos_label(score),
    )
    return _scalar(args, record, "mos")


def cmd_capacity(args) -> str:
    return _scalar(args, {"bandwidth_mbps": args.bandwidth, "capacity_pps": capacity_from_bandwidth(args.bandwidth)}, "capacity_pps")


def cmd_cost(args) -> str:
    model = parse_model(args.model)
    return _scalar(args, {"bandwidth_mbps": args.bandwidth, "cost": cost_from_bandwidth(model, args.bandwidth)}, "cost")


def cmd_bandwidth(args) -> str:
    model = parse_model(args.model)
    return _scalar(args, {"cost": args.cost, "bandwidth_mbps": bandwidth_from_cost(model, args.cost)}, "bandwidth_mbps")


def cmd_fit(args) -> str:
    table = load_pricing(args.file)
    data = table.to_dataset()
    opts = FitOptions(
        robust=args.robust,
        start=args.start,
        tol_fun=args.tol_fun,
        tol_x=args.tol_x,
        max_iter=args.max_iter,
        max_fun_evals=args.max_fun_evals,
    )
    result = fit_power_law(data, opts)
    if args.format == "json":
        return json.dumps(result.to_dict(), indent=1) + "\n"
    if args.format == "csv":
        return _fit_csv(result)
    return describe_fit(result, compare_reference=not args.no_compare, data=data)


def cmd_sweep(args) -> str:
    model = None
    if args.axis == "cost" or args.model is not None:
        model = parse_model(args.model or "paper-eq4")
    capacity = capacity_from_bandwidth(args.bandwidth)
    values = args.values
    if args.axis == "buffer" and values is None and args.start is None:
        values = DEFAULT_BUFFER_VALUES
    start, stop, step = SWEEP_DEFAULTS.get(args.axis, (10.0, 1000.0, 10.0))
    spec = SweepSpec(
        axis=args.axis,
        start=start if args.start is None else args.start,
        stop=stop if args.stop is None else args.stop,
        step=step if args.step is None else args.step,
        scenario=_scenario(args, capacity),
        cost_model=model,
        clamp_mos=args.clamp,
        values=values,
    )
    return emit(run_sweep(spec), args.format)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qoe-cost", description="MOS versus bandwidth and bandwidth cost for TCP access links.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    scenario = _Parser(add_help=False)
    g = scenario.add_argument_group("scenario")
    g.add_argument("--sources", type=int, default=50, help="number of TCP sources N (default 50)")
    g.add_argument("--ack-ratio", type=int, default=1, help="packets acknowledged per ACK (default 1)")
    g.add_argument("--rate-reduction", type=float, default=0.5, help="sending-rate reduction factor m (default 0.5)")
    g.add_argument("--rtt", type=float, default=0.1, help="round trip time in seconds (default 0.1)")
    g.add_argument("--buffer", type=float, default=10.0, help="buffer length Q in packets (default 10)")

    def output(default_format: str, formats=("text", "csv", "json")) -> argparse.ArgumentParser:
        p = _Parser(add_help=False)
        o = p.add_argument_group("output")
        o.add_argument("--format", choices=formats, default=default_format)
        o.add_argument("--out", help="write to this file instead of stdout")
        return p

    def model_arg(p, default: Optional[str] = "paper-eq4"):
        p.add_argument("--model", default=default, help="paper-eq4 | fit:<pricing.csv> | a,b (default paper-eq4)")

    p = sub.add_parser("plp", parents=[scenario, output("text")], help="packet loss probability")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--bandwidth", type=float, help="link bandwidth in Mbps")
    src.add_argument("--capacity", type=float, help="bottleneck capacity in packets/s")
    p.set_defaults(func=cmd_plp)

    p = sub.add_parser("mos", parents=[scenario, output("text")], help="mean opinion score")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--bandwidth", type=float, help="link bandwidth in Mbps")
    src.add_argument("--capacity", type=float, help="bottleneck capacity in packets/s")
    src.add_argument("--cost", type=float, help="monthly cost, converted to bandwidth via --model")
    src.add_argument("--plp", type=float, help="packet loss probability")
    p.add_argument("--clamp", action="store_true", help="clamp MOS to [1, 5]")
    model_arg(p)
    p.set_defaults(func=cmd_mos)

    p = sub.add_parser("capacity", parents=[output("text")], help="bandwidth (Mbps) to capacity (packets/s)")
    p.add_argument("--bandwidth", type=float, required=True)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("cost", parents=[output("text")], help="monthly cost of a bandwidth")
    p.add_argument("--bandwidth", type=float, required=True)
    model_arg(p)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("bandwidth", parents=[output("text")], help="bandwidth bought by a monthly cost")
    p.add_argument("--cost", type=float, required=True)
    model_arg(p)
    p.set_defaults(func=cmd_bandwidth)

    p = sub.add_parser("fit", parents=[output("text")], help="fit cost = a*bandwidth^b to a pricing CSV")
    p.add_argument("file", help="CSV with header bandwidth_mbps,cost")
    p.add_argument("--robust", choices=("none", "lar"), default="none")
    p.add_argument("--start", type=_pair, help="start point a,b (default: log-log regression)")
    p.add_argument("--tol-fun", type=float, default=1e-6)
    p.add_argument("--tol-x", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=400)
    p.add_argument("--max-fun-evals", type=int, default=600)
    p.add_argument("--no-compare", action="store_true", help="omit the reference-model comparison block")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", parents=[scenario, output("csv", ("csv", "json"))], help="tabulate PLP/MOS along an axis")
    p.add_argument("--axis", choices=("bandwidth", "cost", "buffer"), default="bandwidth")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--values", type=_floats, help="explicit comma-separated grid (overrides start/stop/step)")
    p.add_argument("--bandwidth", type=float, default=15.0, help="link bandwidth for buffer sweeps (default 15)")
    p.add_argument("--clamp", action="store_true", help="report clamped MOS in the 'mos' column")
    model_arg(p, default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def _subparsers(parser: argparse.ArgumentParser) -> dict:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return dict(action.choices)
    return {}


def apply_config(parser: argparse.ArgumentParser, path: str) -> None:
    """Override flag defaults from a ``key=value`` file."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"{CONFIG_ENV}: cannot read {path}: {exc.strerror or exc}") from None
    subs = _subparsers(parser)
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{CONFIG_ENV}: line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.lstrip("-")
        matched = False
        for sp in subs.values():
            for action in sp._actions:
                if flag not in action.option_strings:
                    continue
                matched = True
                if action.nargs == 0:
                    converted = value.lower() in ("1", "true", "yes", "on")
                else:
                    try:
                        converted = action.type(value) if action.type else value
                    except (ValueError, argparse.ArgumentTypeError):
                        raise UsageError(f"{CONFIG_ENV}: line {lineno}: bad value for {key}: {value!r}") from None
                    if action.choices is not None and converted not in action.choices:
                        raise UsageError(f"{CONFIG_ENV}: line {lineno}: invalid choice for {key}: {value!r}")
                sp.set_defaults(**{action.dest: converted})
        if not matched:
            raise UsageError(f"{CONFIG_ENV}: line {lineno}: unknown key {key!r}")


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        config = os.environ.get(CONFIG_ENV)
        if config:
            apply_config(parser, config)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    try:
        text = args.func(args)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            stdout.write(text)
    except (DomainError, NotImplementedError) as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
