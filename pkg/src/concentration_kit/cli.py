"""Command-line front end: every analysis is a subcommand emitting CSV or JSON.

Exit status: 0 on success, 1 when a verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import channel_rates as cr
from . import coding_apps as ca
from . import entropy_method_lab as eml
from . import info_measures as im
from . import ofdm
from . import simulation_harness as sh
from . import tail_bounds as tb
from . import transport_concentration as tc
from .reports import _jsonable
from .special_functions import DomainError

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2
PRECISION = 12


class UsageError(Exception):
    pass


def fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.{PRECISION}g}"
    return str(value)


def write_csv(rows: list, columns: list, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])


def _round(obj):
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round(v) for v in obj]
    if isinstance(obj, float) and math.isfinite(obj):
        return float(f"{obj:.{PRECISION}g}")
    return obj


def write_json(payload, out) -> None:
    out.write(json.dumps(_round(_jsonable(payload)), indent=2) + "\n")


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _range(text: str) -> list:
    """'start:stop:step' inclusive of stop (within rounding), or a comma list."""
    if ":" not in text:
        return _float_list(text)
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"expected start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise UsageError("range needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def _degree_distribution(text: str) -> ca.DegreeDistribution:
    path = Path(text)
    if path.exists():
        return ca.DegreeDistribution.parse(path.read_text())
    try:
        d_v, d_c = (int(v) for v in text.split(","))
    except ValueError:
        raise UsageError("--dd takes 'd_v,d_c' or a degree-distribution file") from None
    return ca.DegreeDistribution.regular(d_v, d_c)


def _distribution(text: str) -> im.FiniteDistribution:
    path = Path(text)
    raw = path.read_text() if path.exists() else text
    try:
        return im.FiniteDistribution.from_json(raw)
    except (json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"cannot read distribution: {exc}") from None


def _matrix(text: str | None) -> cr.ChannelMatrix:
    if text is None:
        raise UsageError("--matrix is required")
    path = Path(text)
    raw = path.read_text() if path.exists() else text
    try:
        return cr.ChannelMatrix(json.loads(raw))
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot read channel matrix: {exc}") from None


def _require_seed(args):
    if args.seed is None:
        raise UsageError(f"'{args.command}' is stochastic; pass --seed explicitly")


# ---------------------------------------------------------------------------
# bounds

BOUNDS_COMPARE_COLUMNS = ["delta", "gamma", "refined_exponent", "gaussian_small_deviation_exponent",
                          "f_delta_exponent", "azuma_exponent"]


def bounds_compare_rows(gammas, grid: int) -> list:
    """Per-step exponents on delta in [0, 1]; f(delta) and Azuma's delta^2/2 for reference."""
    rows = []
    for delta in np.linspace(0.0, 1.0, grid + 1):
        delta = float(delta)
        for gamma in gammas:
            rows.append({
                "delta": delta,
                "gamma": gamma,
                "refined_exponent": tb.refined_exponent(gamma, delta),
                "gaussian_small_deviation_exponent": delta * delta / (2.0 * gamma),
                "f_delta_exponent": tb.f_delta(delta),
                "azuma_exponent": delta * delta / 2.0,
            })
    return rows


def cmd_bounds(args, out):
    if args.action == "compare":
        gammas = _float_list(args.gamma)
        if not gammas or any(not 0 < g <= 1 for g in gammas):
            raise UsageError("--gamma values must lie in (0, 1]")
        if args.grid < 1:
            raise UsageError("--grid must be positive")
        write_csv(bounds_compare_rows(gammas, args.grid), BOUNDS_COMPARE_COLUMNS, out)
    else:
        spec = tb.MartingaleSpec(args.n, args.d, args.sigma2)
        rows = []
        for alpha in _float_list(args.alpha):
            rows.append({
                "alpha": alpha,
                "azuma_two_sided": tb.azuma_bound(alpha * math.sqrt(args.n), [args.d] * args.n),
                "refined_two_sided": tb.refined_bound(spec, alpha / math.sqrt(args.n)),
                "clt_limit": tb.gaussian_clt_limit(alpha, args.d, spec.gamma),
            })
        write_csv(rows, ["alpha", "azuma_two_sided", "refined_two_sided", "clt_limit"], out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# info


def cmd_info(args, out):
    P, Q = _distribution(args.P), _distribution(args.Q)
    if args.action == "pinsker":
        rep = im.pinsker_suite(P, Q)
        write_json({"total_variation": rep.tv, "kl_divergence_Q_from_P": im.kl_divergence(Q, P),
                    "pinsker_bound": rep.pinsker_rhs, "balance_refined_bound": rep.ow_rhs,
                    "balance_coefficient": rep.balance, "balance_exact": rep.balance_exact}, out)
    else:
        space = im.FiniteMetricSpace.hamming(len(P))
        payload = {"kl_divergence_P_Q": im.kl_divergence(P, Q),
                   "total_variation": im.total_variation(P, Q),
                   "wasserstein1_hamming": im.wasserstein_p(P, Q, space).value}
        for alpha in _float_list(args.renyi or ""):
            payload[f"renyi_divergence_order_{alpha:g}"] = im.renyi_divergence(P, Q, alpha)
        write_json(payload, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# lsi


def cmd_lsi(args, out):
    _require_seed(args)
    rng = np.random.default_rng(args.seed)
    rows = []
    for index in range(args.instances):
        if args.kind in ("cube", "bernoulli"):
            n = args.n
            f = rng.uniform(-args.bound, args.bound, size=2 ** n)
            p = 0.5 if args.kind == "cube" else args.p
            res = eml.discrete_lsi_check(n, p, f)
            lhs, rhs = res.lhs, res.rhs
        else:
            f = rng.uniform(-args.bound, args.bound, size=args.trunc + 1)
            compound = None
            if args.kind == "compound-poisson":
                compound = im.FiniteDistribution((1, 2, 3), np.array([0.5, 0.3, 0.2]))
            res = eml.poisson_lsi_check(args.lam, f, args.trunc, compound=compound)
            lhs, rhs = res.lhs, res.rhs
        rows.append({"instance": index, "tilted_divergence": lhs, "lsi_energy_bound": rhs,
                     "gap": rhs - lhs, "pass": lhs <= rhs + 1e-12 * max(1.0, rhs)})
    write_csv(rows, ["instance", "tilted_divergence", "lsi_energy_bound", "gap", "pass"], out)
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# transport


def cmd_transport(args, out):
    if args.action == "exponent":
        rows = []
        for delta in _range(args.delta):
            res = tc.concentration_exponent_bernoulli(delta, args.p)
            rows.append({"delta": delta, "concentration_exponent_brute_force": res.brute,
                         "concentration_exponent_upper_bound": res.upper})
        write_csv(rows, ["delta", "concentration_exponent_brute_force",
                         "concentration_exponent_upper_bound"], out)
    else:
        members = [int(v) for v in args.members.split(",") if v.strip()]
        spec = tc.BlowupSpec.bernoulli(args.n, args.p, members)
        profile = tc.blowup_profile(spec)
        rows = [{"radius": r, "blowup_mass": float(profile[r]),
                 "blowup_lower_bound": tc.blowup_bound(float(profile[0]), args.n, r).value}
                for r in range(args.n + 1)]
        write_csv(rows, ["radius", "blowup_mass", "blowup_lower_bound"], out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# ldpc


def cmd_ldpc(args, out):
    dd = _degree_distribution(args.dd)
    if args.action == "cond-entropy":
        channel = args.channel.upper()
        res = ca.cond_entropy_concentration(dd, args.C, channel)
        write_json({"channel": channel, "capacity_bits": args.C,
                    "design_rate": float(dd.design_rate),
                    "original_exponent_coefficient": res.B_orig,
                    "tightened_exponent_coefficient": res.B_tight,
                    "improvement_factor": res.factor,
                    "weighted_parity_entropy_sum": res.weighted_sum}, out)
    elif args.action == "bp-threshold":
        res = ca.bec_bp_threshold(dd)
        write_json({"bp_erasure_threshold": res.p_bp, "capacity_at_threshold": res.capacity,
                    "interior_minimizer": res.bracketed}, out)
    else:
        stats = ca.degree_stats(dd)
        write_json({"design_rate": float(stats.design_rate),
                    "average_check_degree": float(stats.avg_check_degree),
                    "check_node_fractions": {str(k): float(v) for k, v in stats.check_fractions.items()},
                    "degree_identity_gap": stats.identity_gap}, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# rates


def _unit(value, bits: bool):
    return value / math.log(2.0) if bits else value


def cmd_rates(args, out):
    unit = "bits" if args.bits else "nats"
    if args.action == "biawgn":
        rows = []
        for snr_db in _range(args.snr_db):
            snr = 10.0 ** (snr_db / 10.0)
            rows.append({"snr_db": snr_db, "snr": snr,
                         f"mutual_information_{unit}": _unit(cr.biawgn_capacity(snr, args.terms).value, args.bits),
                         f"martingale_achievable_rate_{unit}": _unit(cr.biawgn_rate(snr), args.bits)})
        write_csv(rows, ["snr_db", "snr", f"mutual_information_{unit}",
                         f"martingale_achievable_rate_{unit}"], out)
    elif args.action == "volterra":
        if args.kernel == "table":
            kernel = cr.table_kernel()
        else:
            kernel = cr.VolterraKernel.parse(Path(args.kernel).read_text())
        if args.m < 2 or args.m % 2:
            raise UsageError("--m must be an even integer >= 2")
        rows = []
        for amplitude in _range(args.A):
            params = cr.volterra_martingale_params(kernel, amplitude, args.alpha, max(args.m, 2))
            rates = cr.achievable_rates(params, args.sigma2, args.m)
            rows.append({"A": amplitude, f"bennett_rate_R1_{unit}": _unit(rates.R1, args.bits),
                         f"moment_rate_R2_{unit}": _unit(rates.R2, args.bits),
                         "output_variance": params.D_v, "jump_bound": params.d,
                         "variance_bound": params.sigma2})
        write_csv(rows, ["A", f"bennett_rate_R1_{unit}", f"moment_rate_R2_{unit}",
                         "output_variance", "jump_bound", "variance_bound"], out)
    elif args.action == "dmc":
        res = cr.dmc_capacity(_matrix(args.matrix))
        write_json({f"capacity_{unit}": _unit(res.capacity, args.bits),
                    "capacity_achieving_output": res.caod.probs.tolist(),
                    "capacity_achieving_input": res.input_distribution.tolist(),
                    "iterations": res.iterations, "converged": res.converged}, out)
    else:
        kwargs = {"log_M": args.log_M} if args.log_M is not None else {"M": args.M}
        res = cr.converse_output_bounds(args.n, eps=args.eps, T=_matrix(args.matrix), **kwargs)
        write_json({"output_divergence_bound_sharpened": res.pv1,
                    "output_divergence_bound_general": res.pv2,
                    "log_ratio_constant": res.c_T, "capacity_nats": res.capacity,
                    "good_code_concentration_constant": res.good_code_constant}, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# ofdm


def cmd_ofdm(args, out):
    alphas = _float_list(args.alphas)
    if args.action == "bounds":
        rows = [{"alpha": a, **ofdm.cf_bounds(args.n, a)._asdict()} for a in alphas]
        write_csv(rows, ["alpha", "azuma", "refined", "talagrand_median", "mcdiarmid"], out)
        return EXIT_OK
    _require_seed(args)
    spec = ofdm.OfdmSpec(args.n, args.M, args.oversample, args.trials, args.seed)
    report = ofdm.cf_monte_carlo(spec, alphas)
    rows = []
    for row in report["tails"]:
        flat = {"alpha": row["alpha"], "empirical_mean_centred": row["azuma"]["empirical"],
                "empirical_median_centred": row["talagrand_median"]["empirical"]}
        for name in ofdm.BOUND_CENTRES:
            flat[name] = row[name]["bound"]
        rows.append(flat)
    write_csv(rows, ["alpha", "empirical_mean_centred", "empirical_median_centred",
                     "azuma", "refined", "talagrand_median", "mcdiarmid"], out)
    if args.summary:
        summary = {k: v for k, v in report.items() if k != "tails"}
        Path(args.summary).write_text(json.dumps(_round(_jsonable(summary)), indent=2) + "\n")
    return EXIT_OK if report["all_dominate"] else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args, out):
    if args.config:
        try:
            configs = sh.load_scenarios(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad scenario file: {exc}") from None
        if args.seed is not None:
            for offset, cfg in enumerate(configs):
                cfg["seed"] = args.seed + offset
    else:
        _require_seed(args)
        configs = sh.default_scenarios(args.trials, args.seed)
    report = sh.bound_dominance_suite(configs)
    write_json(report.to_dict() if args.full else
               {"passed": report.passed, "total": len(report.records),
                "failures": [r.to_dict() for r in report.failures]}, out)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# verify-all


def cmd_verify_all(args, out):
    from .acceptance import run_all

    only = {int(v) for v in args.only.split(",")} if args.only else None
    results = run_all(trials=args.trials, only=only)
    for res in results:
        out.write(res.line() + "\n")
    if args.json:
        Path(args.json).write_text(json.dumps(_jsonable([r.to_dict() for r in results]), indent=2) + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="concentration-kit", description=__doc__)
    parser.add_argument("--out", help="write output to this file instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="martingale tail bounds and exponent curves")
    p.add_argument("action", choices=["compare", "tail"])
    p.add_argument("--gamma", default="0.125,0.25,0.5")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--alpha", default="0.5,1,2,3")
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser("info", help="divergences and Pinsker-type inequalities")
    p.add_argument("action", choices=["pinsker", "divergence"])
    p.add_argument("--P", required=True, help='JSON {"labels": [...], "probs": [...]} or a file')
    p.add_argument("--Q", required=True)
    p.add_argument("--renyi", help="comma-separated Renyi orders")
    p.set_defaults(handler=cmd_info)

    p = sub.add_parser("lsi", help="random-function log-Sobolev checks")
    p.add_argument("kind", choices=["cube", "bernoulli", "poisson", "compound-poisson"])
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--p", type=float, default=0.3)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--trunc", type=int, default=80)
    p.add_argument("--bound", type=float, default=2.0, help="functions drawn uniformly in [-bound, bound]")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_lsi)

    p = sub.add_parser("transport", help="blow-up profiles and concentration exponents")
    p.add_argument("action", choices=["blowup", "exponent"])
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--p", type=float, default=0.3)
    p.add_argument("--members", default="0")
    p.add_argument("--delta", default="0:1:0.05")
    p.set_defaults(handler=cmd_transport)

    p = sub.add_parser("ldpc", help="LDPC ensemble constants")
    p.add_argument("action", choices=["cond-entropy", "bp-threshold", "degree-stats"])
    p.add_argument("--dd", required=True, help="'d_v,d_c' for a regular ensemble or a file")
    p.add_argument("--C", type=float, default=0.98, help="channel capacity in bits")
    p.add_argument("--channel", default="mbios", choices=["mbios", "bec", "bsc", "biawgn"])
    p.set_defaults(handler=cmd_ldpc)

    p = sub.add_parser("rates", help="achievable rates and converse bounds")
    p.add_argument("action", choices=["biawgn", "volterra", "dmc", "converse"])
    p.add_argument("--snr-db", default="-10:20:0.5")
    p.add_argument("--terms", type=int, default=2000)
    p.add_argument("--kernel", default="table", help="'table' or a kernel file")
    p.add_argument("--A", default="0.25:3:0.25")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--matrix", help="JSON row-stochastic matrix or a file")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--M", type=int, default=2)
    p.add_argument("--log-M", dest="log_M", type=float)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--bits", action="store_true", help="report rates in bits")
    p.set_defaults(handler=cmd_rates)

    p = sub.add_parser("ofdm", help="crest-factor bounds and simulation")
    p.add_argument("action", choices=["bounds", "simulate"])
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--M", type=int, default=4)
    p.add_argument("--oversample", type=int, default=ofdm.DEFAULT_OVERSAMPLE)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--alphas", default="0,0.25,0.5,1,1.5,2,3")
    p.add_argument("--summary", help="also write a JSON summary here")
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_ofdm)

    p = sub.add_parser("simulate", help="bound-dominance Monte Carlo suite")
    p.add_argument("--config", help="scenario JSON (object or list)")
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--full", action="store_true", help="include every record")
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("verify-all", help="run the acceptance checks")
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--json", help="write the full result matrix here")
    p.set_defaults(handler=cmd_verify_all)
    return parser


def _attach_negative_values(argv: list) -> list:
    """Let '--snr-db -10:20:0.5' through: argparse would read '-10...' as an option."""
    out, i = [], 0
    while i < len(argv):
        token = argv[i]
        if (token.startswith("--") and "=" not in token and i + 1 < len(argv)
                and re.match(r"^-[0-9.]", argv[i + 1])):
            out.append(f"{token}={argv[i + 1]}")
            i += 2
            continue
        out.append(token)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _attach_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    buffer = io.StringIO()
    try:
        status = args.handler(args, buffer)
    except (UsageError, DomainError, FileNotFoundError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    text = buffer.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
