"""Command-line driver.

Subcommands: ``params`` (parameter selection), ``lattice-bench``
(goodness figures), ``simulate`` (Monte Carlo distortion), ``sweep``
(simulate over an SNR grid), ``broadcast`` (two-receiver SDR region).

Output files start with two comment lines: a tool-version line and a
JSON config echo.  Given the same arguments and seed the body below
those lines is byte-identical across runs.  Exit codes: 0 success,
2 invalid configuration, 3 estimation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .analysis import broadcast_curve, no_interference_point, separation_curve
from .codec import (
    MODE_ASYMPTOTIC,
    MODE_FINITE_K,
    MODE_MANUAL,
    make_params,
    params_to_json,
    sdr_opt,
)
from .errors import EstimationError, InvalidInputError
from .lattices import builtin_names, from_name, goodness_report, scale_to_second_moment
from .rng import EXPERIMENT_GOODNESS, EXPERIMENT_SIMULATE, EXPERIMENT_SWEEP_BASE, block_stream
from .simulate import Generators, monte_carlo_with_trace, parse_generator

SIMULATE_COLUMNS = [
    "blocks", "k", "lattice", "snr_db", "d_total", "sdr", "sdr_db", "pe_hat",
    "d_correct", "d_correct_pred", "d_incorrect", "ci_d", "ci_pe", "lemma_residual_max",
]
SWEEP_COLUMNS = SIMULATE_COLUMNS + ["sdr_opt"]
REGION_COLUMNS = ["alpha_c", "sdr1", "sdr2", "sdr1_db", "sdr2_db", "series"]
BENCH_COLUMNS = [
    "lattice", "k", "pe", "alpha", "samples",
    "nsm_g", "vnr_mu", "loss_l", "covering_loss_ltilde", "g_times_mu", "ci_loss",
]
TRACE_COLUMNS = ["block", "sq_error", "failed", "lemma_residual"]


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def _db(x: float) -> float:
    return 10.0 * math.log10(x)


def _from_db(db: float) -> float:
    return 10.0 ** (db / 10.0)


def write_table(path: str | None, config: dict, columns: list[str],
                rows: list[list], fmt: str) -> None:
    if fmt == "json":
        doc = {
            "tool": "mlmsim",
            "version": __version__,
            "config": config,
            "columns": columns,
            "rows": [[_fmt(v) for v in row] for row in rows],
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        lines = [f"# mlmsim {__version__}", "# config = " + json.dumps(config, sort_keys=True)]
        lines.append(",".join(columns))
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def parse_config_header(path: str) -> dict:
    """Recover the config echo from a CSV written by :func:`write_table`."""
    prefix = "# config = "
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith(prefix):
                return json.loads(line[len(prefix):])
            if not line.startswith("#"):
                break
    raise InvalidInputError(f"no config header found in {path}")


# ---------------------------------------------------------------------------
# Shared argument plumbing


def _add_channel_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--power", type=float, default=1.0, help="channel power constraint P")
    sub.add_argument("--snr-db", help="channel SNR in dB (sweep: comma-separated list)")
    sub.add_argument("--noise", type=float, help="channel noise variance N (conflicts with --snr-db)")
    sub.add_argument("--sigma-q2", type=float, default=1.0, help="unknown-source-part variance")


def _add_mode_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--mode", choices=["finite-k", "asymptotic", "manual"],
                     default="asymptotic")
    sub.add_argument("--pe", type=float, default=1e-3,
                     help="target failure probability for finite-k loss estimation")
    sub.add_argument("--alpha", type=float, default=None,
                     help="mixture weight for loss estimation (default: alpha_0)")
    sub.add_argument("--loss-samples", type=int, default=200_000,
                     help="samples for the finite-k loss estimate")
    sub.add_argument("--beta", type=float, help="manual mode source gain")
    sub.add_argument("--alpha-c", type=float, help="manual mode channel gain")
    sub.add_argument("--alpha-s", type=float, help="manual mode estimate gain")


def _noise_values(args, parser) -> list[float]:
    if args.snr_db is not None and args.noise is not None:
        raise InvalidInputError("--snr-db conflicts with --noise; give one of them")
    if args.noise is not None:
        if args.noise <= 0:
            raise InvalidInputError("--noise must be positive")
        return [args.noise]
    if args.snr_db is None:
        raise InvalidInputError("one of --snr-db or --noise is required")
    return [args.power / _from_db(float(tok)) for tok in str(args.snr_db).split(",") if tok.strip()]


def _mode_name(cli_mode: str) -> str:
    return {"finite-k": MODE_FINITE_K, "asymptotic": MODE_ASYMPTOTIC,
            "manual": MODE_MANUAL}[cli_mode]


def _build_params(args, p: float, n: float, lattice=None, seed: int = 0):
    mode = _mode_name(args.mode)
    if mode == MODE_MANUAL:
        return make_params(p, n, args.sigma_q2, mode, alpha_c=args.alpha_c,
                           alpha_s=args.alpha_s, beta=args.beta)
    if mode == MODE_FINITE_K:
        if lattice is None:
            if getattr(args, "l_est", None) is None:
                raise InvalidInputError("finite-k mode needs --l-est here")
            l_est = args.l_est
        else:
            alpha = args.alpha if args.alpha is not None else p / (p + n)
            rng = block_stream(seed, EXPERIMENT_GOODNESS, 0)
            l_est = goodness_report(lattice, args.pe, alpha, args.loss_samples, rng).loss
        return make_params(p, n, args.sigma_q2, mode, l_est=l_est)
    return make_params(p, n, args.sigma_q2, mode)


def _config_echo(args, command: str) -> dict:
    skip = {"func"}
    doc = {"command": command}
    for key, value in sorted(vars(args).items()):
        if key not in skip and value is not None:
            doc[key.replace("_", "-")] = value
    return doc


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_params(args, parser) -> int:
    (n,) = _noise_values(args, parser)
    args_l = getattr(args, "l_est", None)
    mode = _mode_name(args.mode)
    if mode == MODE_FINITE_K:
        if args_l is None:
            raise InvalidInputError("params --mode finite-k needs --l-est")
        params = make_params(args.power, n, args.sigma_q2, mode, l_est=args_l)
    elif mode == MODE_MANUAL:
        params = make_params(args.power, n, args.sigma_q2, mode, alpha_c=args.alpha_c,
                             alpha_s=args.alpha_s, beta=args.beta)
    else:
        params = make_params(args.power, n, args.sigma_q2, mode)
    text = params_to_json(params) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"params: mode={params.mode} alpha_c={params.alpha_c:.6g} "
          f"alpha_s={params.alpha_s:.6g} beta^2={params.beta**2:.6g}", file=sys.stderr)
    return 0


def _cmd_lattice_bench(args, parser) -> int:
    lattice = from_name(args.lattice)
    rng = block_stream(args.seed, EXPERIMENT_GOODNESS, 0)
    alpha = 1.0 if args.alpha is None else args.alpha
    report = goodness_report(lattice, args.pe, alpha, args.samples, rng)
    row = [
        lattice.name, lattice.dimension, report.p_e, report.alpha, report.sample_count,
        report.nsm, report.vnr, report.loss, report.covering_loss,
        report.nsm * report.vnr, report.confidence_halfwidth,
    ]
    write_table(args.out, _config_echo(args, "lattice-bench"), BENCH_COLUMNS, [row], args.format)
    print(f"lattice-bench: {lattice.name} L={report.loss:.4f} "
          f"G*mu={report.nsm * report.vnr:.4f} L~={report.covering_loss:.4f}")
    return 0


def _simulate_row(args, n: float, experiment: int, trace_path: str | None = None):
    lattice = scale_to_second_moment(from_name(args.lattice), args.power)
    params = _build_params(args, args.power, n, lattice, seed=args.seed)
    generators = Generators(
        interference=parse_generator(args.interference),
        side_info=parse_generator(args.si),
    )
    report, trace = monte_carlo_with_trace(
        params, lattice, generators, args.blocks, args.seed,
        experiment=experiment, workers=args.threads,
    )
    snr_db = _db(params.snr)
    row = [
        report.blocks, report.k, lattice.name, snr_db, report.d_total, report.sdr,
        _db(report.sdr), report.pe_hat, report.d_correct, report.predicted_d_correct,
        report.d_incorrect, report.ci_d_total, report.ci_pe, report.lemma_residual_max,
    ]
    if trace_path:
        rows = [
            [b, trace["sq_error"][b], bool(trace["failed"][b]), trace["lemma_residual"][b]]
            for b in range(report.blocks)
        ]
        write_table(trace_path, _config_echo(args, "trace"), TRACE_COLUMNS, rows, "csv")
    return report, row


def _cmd_simulate(args, parser) -> int:
    (n,) = _noise_values(args, parser)
    report, row = _simulate_row(args, n, EXPERIMENT_SIMULATE, args.trace)
    write_table(args.out, _config_echo(args, "simulate"), SIMULATE_COLUMNS, [row], args.format)
    print(f"simulate: blocks={report.blocks} sdr_db={_db(report.sdr):.4f} "
          f"pe_hat={report.pe_hat:.3g} d_total={report.d_total:.6g}")
    return 0


def _cmd_sweep(args, parser) -> int:
    noises = _noise_values(args, parser)
    if len(noises) < 1:
        raise InvalidInputError("sweep needs at least one SNR point")
    rows = []
    for idx, n in enumerate(noises):
        _, row = _simulate_row(args, n, EXPERIMENT_SWEEP_BASE + idx)
        rows.append(row + [sdr_opt(args.power / n)])
    write_table(args.out, _config_echo(args, "sweep"), SWEEP_COLUMNS, rows, args.format)
    print(f"sweep: {len(rows)} SNR points written")
    return 0


def _cmd_broadcast(args, parser) -> int:
    snr1 = _from_db(args.snr1_db)
    snr2 = _from_db(args.snr2_db)
    region = broadcast_curve(snr1, snr2, args.grid)
    rows: list[list] = []

    def emit(alpha_c, s1, s2, series):
        rows.append([alpha_c, s1, s2, _db(s1), _db(s2), series])

    for pt in region.points:
        emit(pt.alpha_c, pt.sdr1, pt.sdr2, "mlm")
    s1, s2 = no_interference_point(snr1, snr2)
    emit(float("nan"), s1, s2, "mlm_no_interference")
    for s1, s2 in separation_curve(snr1, snr2, args.grid):
        emit(float("nan"), s1, s2, "separation")
    for s1, s2 in region.hull:
        emit(float("nan"), s1, s2, "hull")
    emit(float("nan"), 1.0 + snr1, 1.0 + snr2, "ideal")
    write_table(args.out, _config_echo(args, "broadcast"), REGION_COLUMNS, rows, args.format)
    print(f"broadcast: {len(region.points)} curve points, {len(region.hull)} hull points")
    return 0


# ---------------------------------------------------------------------------
# Parser and dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlmsim", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("params", help="compute and print codec parameters")
    _add_channel_args(p)
    _add_mode_args(p)
    p.add_argument("--l-est", type=float, help="loss estimate for finite-k mode")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_params)

    p = subs.add_parser("lattice-bench", help="measure lattice goodness figures")
    p.add_argument("--lattice", choices=builtin_names(), required=True)
    p.add_argument("--pe", type=float, required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=_cmd_lattice_bench)

    for name in ("simulate", "sweep"):
        p = subs.add_parser(name, help=f"{name} Monte Carlo distortion")
        p.add_argument("--lattice", choices=builtin_names(), required=True)
        _add_channel_args(p)
        _add_mode_args(p)
        p.add_argument("--interference", default="zero", help="I process, kind:args")
        p.add_argument("--si", default="zero", help="J process, kind:args")
        p.add_argument("--blocks", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        if name == "simulate":
            p.add_argument("--trace", help="write per-block trace CSV here")
            p.set_defaults(func=_cmd_simulate)
        else:
            p.set_defaults(func=_cmd_sweep)

    p = subs.add_parser("broadcast", help="two-receiver SDR region")
    p.add_argument("--snr1-db", type=float, required=True)
    p.add_argument("--snr2-db", type=float, required=True)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=_cmd_broadcast)
    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args, parser)
    except EstimationError as exc:
        print(f"estimation failure: {exc}", file=sys.stderr)
        return 3
    except (InvalidInputError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    return dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
