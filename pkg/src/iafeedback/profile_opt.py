"""Greedy feedback-profile construction and the bounds around it.

The greedy profile starts from full receive antennas, the largest workable
number of fixed-precoder cells, and a stream-aligned transmit antenna count,
then prunes antennas whose supply a max flow leaves unused. The companion
bounds give a floor on the type-I cell count, a lower bound on the optimal
feedback dimension, and the large-network limits of both.
"""

from dataclasses import dataclass

from .feasibility import build_flow_network, demand_pairs, max_flow
from .feedback import FeedbackProfile, feedback_dimension
from .network import validate_config


class UnachievableDofError(RuntimeError):
    """The antenna configuration cannot support the requested streams."""


def _ceil_div(a, b):
    return -(-a // b)


def n_one(cfg):
    return min(cfg.G * cfg.K * cfg.d, cfg.N)


def g_one(cfg):
    """Lower bound on the number of adaptive cells in any feasible profile."""
    validate_config(cfg)
    n1 = n_one(cfg)
    kd = cfg.K * cfg.d
    if n1 <= kd:
        raise UnachievableDofError(f"min(G*K*d, N) = {n1} must exceed K*d = {kd}")
    num = cfg.G * ((cfg.G - 1) * kd - cfg.M + cfg.d)
    return max(num // (n1 - kd), 0)


def d_lower_bound(cfg):
    """Lower bound on the minimum feedback dimension (may be negative)."""
    g1 = g_one(cfg)
    n1 = n_one(cfg)
    kd = cfg.K * cfg.d
    return cfg.K * cfg.G * n1 * g1 * (cfg.M - (cfg.G - g1) * kd) - cfg.K * cfg.G ** 2


def _min_g_condition1(cfg):
    """Smallest g for which full-antenna users survive condition 1."""
    kd = cfg.K * cfg.d
    if cfg.M - (cfg.G - 1) * kd - cfg.d >= 0:
        return 0
    return cfg.G - (cfg.M - cfg.d) // kd


@dataclass
class GreedyResult:
    profile: FeedbackProfile
    g0_formula: int
    g0: int
    n0: int
    flow_value: int
    witness: dict


def greedy_profile(cfg):
    """Greedy low-dimension feasible profile.

    The aggregate counting formula alone can undershoot the per-user antenna
    requirement (condition 1), so the initial adaptive-cell count is raised to
    the smallest value satisfying both, then bumped further in the (unseen in
    practice) event the flow does not saturate. Transmit/receive antennas are
    pruned by the unused supply of a canonical max flow.
    """
    validate_config(cfg)
    kd = cfg.K * cfg.d
    n0 = min(cfg.G * kd, (cfg.N // cfg.d) * cfg.d)
    if n0 <= kd:
        raise UnachievableDofError(f"min(G*K*d, floor(N/d)*d) = {n0} must exceed K*d = {kd}")
    num = cfg.G * ((cfg.G - 1) * kd - cfg.M + cfg.d)
    g0_formula = max(_ceil_div(num, n0 - kd), 0)
    if g0_formula > cfg.G:
        raise UnachievableDofError(
            f"required adaptive-cell count {g0_formula} exceeds G={cfg.G}: "
            "requested streams unreachable for this antenna configuration"
        )
    g0 = max(g0_formula, _min_g_condition1(cfg))
    while True:
        if g0 > cfg.G:
            raise UnachievableDofError(
                "no adaptive-cell count makes the initial profile feasible"
            )
        init = FeedbackProfile.uniform(cfg, cfg.M, g0, n0)
        deficits = [
            init.m_at(j, k) - sum(kd for i in init.fixed_cells(cfg.G) if i != j) - cfg.d
            for j in range(cfg.G)
            for k in range(cfg.K)
        ]
        pairs = demand_pairs(init, cfg)
        demand = kd * len(pairs)
        if min(deficits) >= 0:
            if not pairs:
                value, flows = 0, {}
                break
            net = build_flow_network(init, cfg)
            value, flows = max_flow(net)
            if value == demand:
                break
        g0 += 1

    n_pruned = []
    for i in range(g0):
        slack = cfg.K * (n0 - kd) - flows.get(("a", ("v", i)), 0)
        n_pruned.append(n0 - (slack // kd) * cfg.d)
    m_pruned = []
    for j in range(cfg.G):
        row = []
        for k in range(cfg.K):
            cap = init.m_at(j, k) - sum(kd for i in init.fixed_cells(cfg.G) if i != j) - cfg.d
            slack = cap - flows.get(("a", ("u", j, k)), 0)
            row.append(cfg.M - slack)
        m_pruned.append(tuple(row))
    profile = FeedbackProfile(m=tuple(m_pruned), g=g0, n=tuple(n_pruned))
    witness = {
        (j, k, i): (flows[(("u", j, k), ("c", j, k, i))], flows[(("v", i), ("c", j, k, i))])
        for j, k, i in demand_pairs(profile, cfg)
    } if flows else {}
    return GreedyResult(
        profile=profile,
        g0_formula=g0_formula,
        g0=g0,
        n0=n0,
        flow_value=value,
        witness=witness,
    )


@dataclass
class ProfileBounds:
    g1: int
    n1: int
    d_low: int
    d_upper: int


def profile_bounds(cfg):
    """Analytic bounds bracketing the optimal feedback dimension."""
    result = greedy_profile(cfg)
    return ProfileBounds(
        g1=g_one(cfg),
        n1=n_one(cfg),
        d_low=d_lower_bound(cfg),
        d_upper=feedback_dimension(result.profile, cfg),
    )


def _check_ratio_args(c1, c2, d):
    if not (0 < c1 < d and 0 < c2 < d):
        raise ValueError(f"need 0 < C1, C2 < d: got C1={c1}, C2={c2}, d={d}")
    if not c1 + c2 > d:
        raise ValueError(f"need C1 + C2 > d: got {c1} + {c2} <= {d}")


def asymptotic_ratio(c1, c2, d):
    """Large-network limit of D(greedy) / (G^4 K^3) for N=C1*K*G, M=C2*K*G."""
    _check_ratio_args(c1, c2, d)
    return (d - c1) * (d - c2) ** 2 / c1


def full_cdi_ratio(c1, c2, d):
    """Large-network ratio of greedy dimension to full-direction feedback; < 1."""
    _check_ratio_args(c1, c2, d)
    return (d - c1) * (d - c2) ** 2 / (c1 ** 2 * c2)
