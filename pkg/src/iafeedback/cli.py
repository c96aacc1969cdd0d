"""Command-line pipeline: feasibility checks, profile optimization, one-shot
transceiver design, and Monte Carlo throughput experiments.

Exit codes: 0 success / feasible-sufficient, 2 necessary-only, 3 infeasible,
4 requested streams unachievable, 64 unparseable input.
"""

import argparse
import json
import sys

from .evaluate import (
    FIXED_RULE,
    SCALED_RULE,
    UNQUANTIZED_RULE,
    InfeasibleProfileError,
    baseline_profile,
    simulate_profile,
    simulate_random_beamforming,
)
from .feasibility import check_sufficient, render_verdict
from .feedback import FeedbackProfile, apply_filter, feedback_dimension, fixed_outer_precoders
from .network import ConfigError, NetworkConfig, draw_channels, validate_config
from .profile_opt import UnachievableDofError, d_lower_bound, g_one, greedy_profile
from .rng import derive_seed
from .transceiver import (
    reconstruct,
    solve_with_restarts,
    verify_ia,
    write_leakage_trace,
)

EXIT_OK = 0
EXIT_NECESSARY_ONLY = 2
EXIT_INFEASIBLE = 3
EXIT_UNACHIEVABLE = 4
EXIT_PARSE = 64

CSV_HEADER = (
    "scheme,snr_db,b_tot,trials,r_per_mean,r_lim_mean,r_lb_mean,"
    "stderr,leakage_mean,feedback_dim\n"
)


class CliParseError(ValueError):
    pass


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliParseError(f"cannot read {path}: {exc}") from exc


def config_from_dict(data):
    try:
        cfg = NetworkConfig(
            G=int(data["G"]), K=int(data["K"]), N=int(data["N"]),
            M=int(data["M"]), d=int(data["d"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CliParseError(f"bad network config: {exc}") from exc
    return cfg, int(data.get("seed", 0))


def _resolve_config(args):
    data = _load_json(args.config) if args.config else {}
    for name in ("G", "K", "N", "M", "d"):
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    cfg, seed = config_from_dict(data)
    try:
        validate_config(cfg)
    except ConfigError as exc:
        raise CliParseError(str(exc)) from exc
    return cfg, seed


def _load_profile(path):
    try:
        return FeedbackProfile.from_dict(_load_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise CliParseError(f"bad profile file {path}: {exc}") from exc


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _append_rows(path, rows):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            has_header = fh.readline().strip() != ""
    except OSError:
        has_header = False
    with open(path, "a", encoding="utf-8") as fh:
        if not has_header:
            fh.write(CSV_HEADER)
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _sample_rows(scheme, samples, dim):
    return [
        (
            scheme,
            _fmt(float(s.snr_db)),
            s.b_tot if s.b_tot is not None else "inf",
            s.trials,
            _fmt(s.r_per),
            _fmt(s.r_lim),
            _fmt(s.r_lb),
            _fmt(s.r_lim_se),
            _fmt(s.leakage_mean),
            dim,
        )
        for s in samples
    ]


def cmd_feasible(args):
    cfg, _ = _resolve_config(args)
    profile = _load_profile(args.profile)
    verdict = check_sufficient(profile, cfg)
    print(render_verdict(verdict, profile, cfg))
    if verdict.sufficient_ok:
        return EXIT_OK
    if verdict.necessary_ok:
        return EXIT_NECESSARY_ONLY
    return EXIT_INFEASIBLE


def cmd_optimize(args):
    cfg, _ = _resolve_config(args)
    try:
        result = greedy_profile(cfg)
    except UnachievableDofError as exc:
        print(f"unachievable: {exc}", file=sys.stderr)
        return EXIT_UNACHIEVABLE
    profile = result.profile
    dim = feedback_dimension(profile, cfg)
    print(f"g0 = {result.g0} (counting formula gives {result.g0_formula})")
    print(f"g1 lower bound = {g_one(cfg)}")
    print(f"initial transmit antennas N0 = {result.n0}")
    print(f"profile m grid: {[list(r) for r in profile.m]}")
    print(f"profile g = {profile.g}, n = {list(profile.n)}")
    print(f"feedback dimension D = {dim}")
    print(f"dimension lower bound D_low = {d_lower_bound(cfg)}")
    if result.witness:
        print("flow witness (user j,k | cell i | f_r | f_t):")
        for (j, k, i), (fr, ft) in sorted(result.witness.items()):
            print(f"  {j + 1},{k + 1} | {i + 1} | {fr} | {ft}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(profile.to_dict(), fh, indent=2)
            fh.write("\n")
        print(f"profile written to {args.out}")
    return EXIT_OK


def cmd_design(args):
    cfg, seed = _resolve_config(args)
    profile = _load_profile(args.profile) if args.profile else greedy_profile(cfg).profile
    verdict = check_sufficient(profile, cfg)
    if not verdict.necessary_ok:
        print(render_verdict(verdict, profile, cfg), file=sys.stderr)
        return EXIT_INFEASIBLE
    t2 = fixed_outer_precoders(cfg, profile, derive_seed(seed, "type2"))
    channels = draw_channels(cfg, derive_seed(seed, "channels"))
    eff = apply_filter(channels, profile, t2, cfg)
    # alignment residuals are bounded by sqrt(leakage), so aim below tol^2
    # (floored where floating point plateaus)
    leak_target = max(min(1e-10, 0.25 * args.tol ** 2), 1e-14)
    sol = solve_with_restarts(
        eff, profile, cfg, rng_state=derive_seed(seed, "ailm"),
        tol_leakage=leak_target, max_iters=8000,
    )
    print(f"iterations: {sol.iterations}, final leakage: {sol.leakage_trace[-1]:.3e}")
    if args.trace:
        write_leakage_trace(args.trace, sol.leakage_trace)
        print(f"leakage trace written to {args.trace}")
    if not sol.converged:
        print("solver did not converge; profile may be infeasible in practice",
              file=sys.stderr)
        return 1
    ts = reconstruct(sol, eff, t2, profile, cfg)
    report = verify_ia(channels, ts, cfg, tol=args.tol)
    print(
        f"verify: rank_min={report.rank_min:.3e} "
        f"intracell_max={report.intracell_max:.3e} "
        f"intercell_max={report.intercell_max:.3e} "
        f"passed={report.passed}"
    )
    return EXIT_OK if report.passed else 1


def _parse_rule(data):
    if not isinstance(data, dict) or len(data) != 1:
        raise CliParseError("b_tot_rule must have exactly one of: fixed, scaled, none")
    if "fixed" in data:
        return (FIXED_RULE, int(data["fixed"]))
    if "scaled" in data:
        ref = data["scaled"]
        return (SCALED_RULE, None if ref in (None, True) else int(ref))
    if "none" in data:
        return (UNQUANTIZED_RULE,)
    raise CliParseError(f"unknown b_tot_rule {data!r}")


def _run_scheme(scheme, cfg, profile, snr_grid, rule, trials, seed):
    if scheme == "baseline3":
        samples = simulate_random_beamforming(cfg, snr_grid, trials, seed)
        return samples, 0
    if scheme == "proposed":
        prof = profile if profile is not None else greedy_profile(cfg).profile
    elif scheme == "baseline1":
        prof = baseline_profile(1, cfg)
    elif scheme == "baseline2":
        prof = baseline_profile(2, cfg)
    else:
        raise CliParseError(f"unknown scheme {scheme!r}")
    samples = simulate_profile(cfg, prof, snr_grid, rule, trials, seed)
    return samples, feedback_dimension(prof, cfg)


def cmd_simulate(args):
    spec = _load_json(args.spec)
    try:
        cfg, cfg_seed = config_from_dict(spec["config"])
        validate_config(cfg)
        scheme = spec["scheme"]
        snr_grid = [float(x) for x in spec["snr_grid_db"]]
        if any(b <= a for a, b in zip(snr_grid, snr_grid[1:])):
            raise CliParseError("snr_grid_db must be strictly increasing")
        rule = _parse_rule(spec["b_tot_rule"])
        trials = int(spec["trials"])
        seed = int(spec.get("seed", cfg_seed))
        out = args.out or spec.get("out")
        if not out:
            raise CliParseError("no output path (spec 'out' or --out)")
        profile = FeedbackProfile.from_dict(spec["profile"]) if spec.get("profile") else None
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CliParseError):
            raise
        raise CliParseError(f"bad experiment spec: {exc}") from exc
    try:
        samples, dim = _run_scheme(scheme, cfg, profile, snr_grid, rule, trials, seed)
    except InfeasibleProfileError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _append_rows(out, _sample_rows(scheme, samples, dim))
    print(f"wrote {len(samples)} rows to {out}")
    return EXIT_OK


def cmd_sweep(args):
    cfg, seed = _resolve_config(args)
    snr_grid = [float(x) for x in args.snr.split(",")]
    trials = args.trials
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    proposed = greedy_profile(cfg).profile
    if args.btot == "scaled":
        rule = (SCALED_RULE, feedback_dimension(proposed, cfg))
    elif args.btot == "none":
        rule = (UNQUANTIZED_RULE,)
    else:
        try:
            rule = (FIXED_RULE, int(args.btot))
        except ValueError as exc:
            raise CliParseError("--btot must be an integer, 'scaled' or 'none'") from exc
    rows = []
    for scheme in schemes:
        try:
            samples, dim = _run_scheme(
                scheme, cfg, proposed if scheme == "proposed" else None,
                snr_grid, rule, trials, seed,
            )
        except InfeasibleProfileError as exc:
            print(f"{scheme}: infeasible: {exc}", file=sys.stderr)
            return EXIT_INFEASIBLE
        rows.extend(_sample_rows(scheme, samples, dim))
        print(f"{scheme}: done ({len(samples)} SNR points)")
    _append_rows(args.out, rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def _add_config_flags(parser):
    parser.add_argument("--config", help="JSON file with keys G, K, N, M, d, seed")
    for name in ("G", "K", "N", "M", "d"):
        parser.add_argument(f"--{name}", type=int, help=f"override {name}")
    parser.add_argument("--seed", type=int, help="override seed")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="iafeedback",
        description="Interference alignment under partial CSI feedback",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("feasible", help="decide whether a feedback profile supports alignment")
    _add_config_flags(p)
    p.add_argument("--profile", required=True, help="profile JSON file")
    p.set_defaults(func=cmd_feasible)

    p = sub.add_parser("optimize", help="greedy minimum-dimension feedback profile")
    _add_config_flags(p)
    p.add_argument("--out", help="write the profile JSON here")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("design", help="one-shot transceiver solve with leakage trace")
    _add_config_flags(p)
    p.add_argument("--profile", help="profile JSON file (default: greedy)")
    p.add_argument("--trace", help="write per-iteration leakage CSV here")
    p.add_argument("--tol", type=float, default=1e-7, help="verification tolerance")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="run one experiment spec to CSV")
    p.add_argument("--spec", required=True, help="experiment spec JSON file")
    p.add_argument("--out", help="override the spec's output CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run several schemes over an SNR grid to one CSV")
    _add_config_flags(p)
    p.add_argument("--schemes", default="proposed,baseline1,baseline2,baseline3")
    p.add_argument("--snr", default="0,10,20,30,40", help="comma-separated dB grid")
    p.add_argument("--btot", default="800", help="total feedback bits, 'scaled' or 'none'")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0,) else 0
    try:
        return args.func(args)
    except UnachievableDofError as exc:
        print(f"unachievable: {exc}", file=sys.stderr)
        return EXIT_UNACHIEVABLE
    except (CliParseError, ValueError) as exc:
        # covers malformed JSON, profiles inconsistent with the config, and
        # misconfigured baselines
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
