"""Throughput evaluation, analytic bounds, and the Monte Carlo drivers.

All rates are in bits per channel use (base-2 logs), so the high-SNR slope of
a scheme against log2(P) is its degrees of freedom. Expectations are Monte
Carlo means over seeded channel/codebook draws with fixed-order aggregation;
the driver exposes per-trial samples so tests can run paired comparisons.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .feedback import (
    FeedbackProfile,
    apply_filter,
    feedback_dimension,
    fixed_outer_precoders,
    grassmann_tuple,
)
from .feasibility import check_necessary_flow
from .network import draw_channels, validate_config
from .quantize import quantize_feedback
from .rng import derive_seed, trial_seed
from .transceiver import (
    random_transceivers,
    reconstruct,
    solve_with_restarts,
)


class InfeasibleProfileError(RuntimeError):
    pass


def snr_db_to_power(snr_db):
    return 10.0 ** (snr_db / 10.0)


def _log2det_psd(a):
    sign, logdet = np.linalg.slogdet(a)
    return float(np.real(logdet)) / math.log(2.0)


def residual_interference(channels, ts, cfg, p):
    """Per-user residual interference covariance under the given transceivers.

    phi[j][k] is the d x d Hermitian PSD covariance of all streams not
    intended for user (j,k), measured on the true channels.
    """
    kd = cfg.K * cfg.d
    v_full = [[ts.t[i] @ ts.v_s[i][q] for q in range(cfg.K)] for i in range(cfg.G)]
    phi = []
    for j in range(cfg.G):
        row = []
        for k in range(cfg.K):
            u_h = ts.u[j][k].conj().T
            acc = np.zeros((cfg.d, cfg.d), dtype=complex)
            for i in range(cfg.G):
                for q in range(cfg.K):
                    if i == j and q == k:
                        continue
                    x = u_h @ channels[j, k, i] @ v_full[i][q]
                    acc += x @ x.conj().T
            row.append(acc * (p / kd))
        phi.append(row)
    return phi


def throughput_perfect(channels, ts, cfg, p):
    """Sum rate when interference is fully aligned and nulled."""
    kd = cfg.K * cfg.d
    total = 0.0
    eye = np.eye(cfg.d)
    for j in range(cfg.G):
        for k in range(cfg.K):
            x = ts.u[j][k].conj().T @ channels[j, k, j] @ ts.t[j] @ ts.v_s[j][k]
            total += _log2det_psd(eye + (p / kd) * (x @ x.conj().T))
    return total


def throughput_limited(channels, ts, phi, cfg, p):
    """Sum rate treating residual interference as additional noise."""
    kd = cfg.K * cfg.d
    total = 0.0
    eye = np.eye(cfg.d)
    for j in range(cfg.G):
        for k in range(cfg.K):
            x = ts.u[j][k].conj().T @ channels[j, k, j] @ ts.t[j] @ ts.v_s[j][k]
            signal = (p / kd) * (x @ x.conj().T)
            total += _log2det_psd(eye + signal @ np.linalg.inv(eye + phi[j][k]))
    return total


def _dimension_weights(profile, cfg):
    """c_jk: summed manifold dimensions of user (j,k)'s fed-back matrices."""
    return [
        [
            sum(b - a for a, b in grassmann_tuple(profile, cfg, j, k))
            for k in range(cfg.K)
        ]
        for j in range(cfg.G)
    ]


def leakage_bound(profile, cfg, p, b):
    """Per-user upper bound on the mean residual interference power."""
    c = _dimension_weights(profile, cfg)
    return [
        [(p / cfg.d) * c[j][k] * 2.0 ** (-b) for k in range(cfg.K)]
        for j in range(cfg.G)
    ]


def throughput_lower_bound(r_per, profile, cfg, p, b):
    """Perfect-CSI rate minus the quantization penalty at b bits/dimension."""
    c = _dimension_weights(profile, cfg)
    penalty = sum(
        cfg.d * math.log2(1.0 + (p / cfg.d ** 2) * c[j][k] * 2.0 ** (-b))
        for j in range(cfg.G)
        for k in range(cfg.K)
    )
    return r_per - penalty


@dataclass
class ThroughputSample:
    snr_db: float
    r_per: float
    r_lim: float
    r_lb: float
    leakage_mean: float
    trials: int
    b_tot: int | None = None
    r_per_se: float = 0.0
    r_lim_se: float = 0.0
    solver_failures: int = 0
    samples: dict = field(default_factory=dict)  # per-trial arrays when requested


def dof_slope(sweep, rate="r_lim"):
    """Least-squares slope of a rate against log2(P) over an SNR sweep."""
    if len(sweep) < 3:
        raise ValueError("need at least 3 SNR points for a slope estimate")
    snrs = [s.snr_db for s in sweep]
    if max(snrs) - min(snrs) < 15.0:
        raise ValueError("SNR sweep must span at least 15 dB")
    x = np.array([math.log2(snr_db_to_power(s)) for s in snrs])
    y = np.array([getattr(s, rate) for s in sweep])
    x_centered = x - x.mean()
    return float(np.dot(x_centered, y) / np.dot(x_centered, x_centered))


def dof_slope_se(sweep, rate="r_lim", se="r_lim_se"):
    """Standard error of dof_slope propagated from per-point standard errors."""
    x = np.array([math.log2(snr_db_to_power(s.snr_db)) for s in sweep])
    w = (x - x.mean()) / np.dot(x - x.mean(), x - x.mean())
    return float(np.sqrt(np.sum(w ** 2 * np.array([getattr(s, se) for s in sweep]) ** 2)))


def _mean_se(values):
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return math.nan, math.nan
    se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return float(arr.mean()), se


FIXED_RULE = "fixed"
SCALED_RULE = "scaled"
UNQUANTIZED_RULE = "none"


def budget_for(rule, snr_db, own_dim):
    """Total feedback bits for one SNR point under a budget rule.

    rule is ("fixed", bits), ("scaled", reference_dim or None) where the
    budget is reference_dim * log2(P), or ("none",) for unquantized feedback.
    """
    kind = rule[0]
    if kind == FIXED_RULE:
        return int(rule[1])
    if kind == SCALED_RULE:
        ref = rule[1] if rule[1] is not None else own_dim
        return int(math.floor(ref * math.log2(snr_db_to_power(snr_db))))
    if kind == UNQUANTIZED_RULE:
        return None
    raise ValueError(f"unknown budget rule {rule!r}")


def simulate_profile(
    cfg,
    profile,
    snr_grid_db,
    b_tot_rule,
    trials,
    seed,
    restarts=5,
    max_iters=20000,
    tol_leakage=1e-10,
    keep_samples=False,
):
    """Monte Carlo throughput of one feedback profile over an SNR grid.

    Per trial: draw channels, filter, solve on exact filtered CSI (perfect
    reference), quantize under the budget rule, solve again on quantized CSI,
    and evaluate both on the true channels. Channel draws depend only on
    (seed, trial), so runs with equal seeds are paired across profiles. The
    iteration budget is far above the solver default: quantized realizations
    occasionally converge slowly, and a skipped trial would bias the means.
    """
    validate_config(cfg)
    verdict = check_necessary_flow(profile, cfg)
    if not verdict.necessary_ok:
        raise InfeasibleProfileError(verdict.violated_condition)
    dim = feedback_dimension(profile, cfg)
    t2 = fixed_outer_precoders(cfg, profile, derive_seed(seed, "type2"))
    chan_seed = derive_seed(seed, "channels")
    quant_seed = derive_seed(seed, "quant")
    solver_seed = derive_seed(seed, "ailm")
    budgets = [budget_for(b_tot_rule, snr, dim) for snr in snr_grid_db]
    per_point = {
        snr: {"r_per": [], "r_lim": [], "r_lb": [], "leak": []} for snr in snr_grid_db
    }
    failures = 0
    for t in range(trials):
        channels = draw_channels(cfg, trial_seed(chan_seed, t))
        eff = apply_filter(channels, profile, t2, cfg)
        sol = solve_with_restarts(
            eff, profile, cfg, rng_state=trial_seed(solver_seed, t),
            restarts=restarts, max_iters=max_iters, tol_leakage=tol_leakage,
        )
        if not sol.converged:
            failures += 1
            continue
        ts_perfect = reconstruct(sol, eff, t2, profile, cfg)

        def design_for(budget):
            if budget is None:
                return ts_perfect
            qf = quantize_feedback(eff, profile, cfg, budget, trial_seed(quant_seed, t))
            sol_hat = solve_with_restarts(
                qf.eff, profile, cfg,
                rng_state=trial_seed(derive_seed(solver_seed, "hat"), t),
                restarts=restarts, max_iters=max_iters, tol_leakage=tol_leakage,
            )
            if not sol_hat.converged:
                return None
            return reconstruct(sol_hat, qf.eff, t2, profile, cfg)

        cache = {}
        trial_ok = True
        designs = {}
        for snr, budget in zip(snr_grid_db, budgets):
            if budget not in cache:
                cache[budget] = design_for(budget)
            designs[snr] = cache[budget]
            if cache[budget] is None:
                trial_ok = False
        if not trial_ok:
            failures += 1
            continue
        for snr, budget in zip(snr_grid_db, budgets):
            p = snr_db_to_power(snr)
            ts_hat = designs[snr]
            r_per = throughput_perfect(channels, ts_perfect, cfg, p)
            phi = residual_interference(channels, ts_hat, cfg, p)
            r_lim = throughput_limited(channels, ts_hat, phi, cfg, p)
            if budget is None:
                r_lb = r_per
            else:
                r_lb = throughput_lower_bound(r_per, profile, cfg, p, budget // dim)
            leak = float(np.mean([np.real(np.trace(phi[j][k]))
                                  for j in range(cfg.G) for k in range(cfg.K)]))
            rec = per_point[snr]
            rec["r_per"].append(r_per)
            rec["r_lim"].append(r_lim)
            rec["r_lb"].append(r_lb)
            rec["leak"].append(leak)
    out = []
    for snr, budget in zip(snr_grid_db, budgets):
        rec = per_point[snr]
        r_per_mean, r_per_se = _mean_se(rec["r_per"])
        r_lim_mean, r_lim_se = _mean_se(rec["r_lim"])
        r_lb_mean, _ = _mean_se(rec["r_lb"])
        leak_mean, _ = _mean_se(rec["leak"])
        out.append(
            ThroughputSample(
                snr_db=snr,
                r_per=r_per_mean,
                r_lim=r_lim_mean,
                r_lb=r_lb_mean,
                leakage_mean=leak_mean,
                trials=len(rec["r_lim"]),
                b_tot=budget,
                r_per_se=r_per_se,
                r_lim_se=r_lim_se,
                solver_failures=failures,
                samples={k: np.array(v) for k, v in rec.items()} if keep_samples else {},
            )
        )
    return out


def simulate_random_beamforming(cfg, snr_grid_db, trials, seed, keep_samples=False):
    """Channel-oblivious random transceivers: the no-feedback reference."""
    validate_config(cfg)
    chan_seed = derive_seed(seed, "channels")
    tx_seed = derive_seed(seed, "randbf")
    per_point = {snr: {"r_lim": [], "leak": []} for snr in snr_grid_db}
    for t in range(trials):
        channels = draw_channels(cfg, trial_seed(chan_seed, t))
        ts = random_transceivers(cfg, trial_seed(tx_seed, t))
        for snr in snr_grid_db:
            p = snr_db_to_power(snr)
            phi = residual_interference(channels, ts, cfg, p)
            r_lim = throughput_limited(channels, ts, phi, cfg, p)
            leak = float(np.mean([np.real(np.trace(phi[j][k]))
                                  for j in range(cfg.G) for k in range(cfg.K)]))
            per_point[snr]["r_lim"].append(r_lim)
            per_point[snr]["leak"].append(leak)
    out = []
    for snr in snr_grid_db:
        rec = per_point[snr]
        r_lim_mean, r_lim_se = _mean_se(rec["r_lim"])
        leak_mean, _ = _mean_se(rec["leak"])
        out.append(
            ThroughputSample(
                snr_db=snr,
                r_per=math.nan,
                r_lim=r_lim_mean,
                r_lb=math.nan,
                leakage_mean=leak_mean,
                trials=len(rec["r_lim"]),
                b_tot=0,
                r_lim_se=r_lim_se,
                samples={k: np.array(v) for k, v in rec.items()} if keep_samples else {},
            )
        )
    return out


def baseline_profile(baseline_id, cfg):
    """Feedback profile of the two quantized reference schemes.

    Baseline 1 feeds back every direction at full size. Baseline 2 truncates
    receive antennas to the tightly feasible count G*K*d + d - N (raised to d
    if smaller; rejected if it exceeds M).
    """
    if baseline_id == 1:
        return FeedbackProfile.uniform(cfg, cfg.M, cfg.G, cfg.N)
    if baseline_id == 2:
        m = cfg.G * cfg.K * cfg.d + cfg.d - cfg.N
        if m > cfg.M:
            raise ValueError(
                f"baseline 2 misconfigured: truncated antenna count {m} exceeds M={cfg.M}"
            )
        return FeedbackProfile.uniform(cfg, max(m, cfg.d), cfg.G, cfg.N)
    raise ValueError(f"no profile for baseline {baseline_id}")


def run_baseline(baseline_id, cfg, snr_db, b_tot, trials, seed, **opts):
    """One Monte Carlo point for baseline 1, 2 (quantized) or 3 (random)."""
    if baseline_id == 3:
        return simulate_random_beamforming(cfg, [snr_db], trials, seed, **opts)[0]
    if baseline_id not in (1, 2):
        raise ValueError(f"unknown baseline {baseline_id}")
    profile = baseline_profile(baseline_id, cfg)
    return simulate_profile(
        cfg, profile, [snr_db], (FIXED_RULE, b_tot), trials, seed, **opts
    )[0]
