import itertools

import numpy as np
import pytest

from iafeedback.feasibility import (
    EnumerationTooLarge,
    FlowNetwork,
    build_flow_network,
    check_necessary_enum,
    check_necessary_flow,
    check_sufficient,
    demand_pairs,
    max_flow,
    render_verdict,
)
from iafeedback.feedback import FeedbackProfile
from iafeedback.network import NetworkConfig, validate_config
from iafeedback.rng import generator

CFG_REF = NetworkConfig(G=3, K=2, N=4, M=4, d=1)
PROF_REF = FeedbackProfile.uniform(CFG_REF, 4, 2, (4, 3))

CFG_TOY1 = NetworkConfig(G=2, K=2, N=3, M=3, d=1)
CFG_TOY2 = NetworkConfig(G=2, K=3, N=5, M=3, d=1)


def brute_force_max_flow(edges, source, sink):
    """Enumerate all integer edge flows; exponential, for tiny oracles only."""
    nodes = sorted({u for u, _, _ in edges} | {v for _, v, _ in edges})
    best = 0
    for combo in itertools.product(*[range(c + 1) for _, _, c in edges]):
        balance = {n: 0 for n in nodes}
        for (u, v, _), f in zip(edges, combo):
            balance[u] -= f
            balance[v] += f
        if all(balance[n] == 0 for n in nodes if n not in (source, sink)):
            best = max(best, balance[sink])
    return best


def _net_from(edges):
    net = FlowNetwork()
    net.add_node("a")
    for u, v, c in edges:
        net.add_edge(u, v, c)
    net.add_node("b")
    return net


def test_max_flow_single_path():
    value, flows = max_flow(_net_from([("a", "x", 3), ("x", "b", 3)]))
    assert value == 3
    assert flows[("a", "x")] == flows[("x", "b")] == 3


def test_max_flow_matches_brute_force_oracle():
    edges = [
        ("a", "x", 3), ("a", "y", 2),
        ("x", "y", 1), ("x", "z", 2),
        ("y", "z", 2), ("y", "b", 1),
        ("z", "b", 3),
    ]
    value, flows = max_flow(_net_from(edges))
    assert value == brute_force_max_flow(edges, "a", "b")
    # flow conservation and capacity bounds on the returned assignment
    balance = {}
    caps = {(u, v): c for u, v, c in edges}
    for (u, v), f in flows.items():
        assert 0 <= f <= caps[(u, v)]
        balance[u] = balance.get(u, 0) - f
        balance[v] = balance.get(v, 0) + f
    for node in ("x", "y", "z"):
        assert balance[node] == 0


def test_max_flow_reference_network_saturates():
    net = build_flow_network(PROF_REF, CFG_REF)
    value, _ = max_flow(net)
    assert value == 16  # 8 demand pairs of size K*d = 2


def test_max_flow_rejects_negative_capacity():
    net = FlowNetwork()
    with pytest.raises(ValueError):
        net.add_edge("a", "b", -1)


def test_network_reusable_after_max_flow():
    net = build_flow_network(PROF_REF, CFG_REF)
    assert max_flow(net)[0] == 16
    assert max_flow(net)[0] == 16


def test_enum_toy1_feasible():
    verdict = check_necessary_enum(
        FeedbackProfile.uniform(CFG_TOY1, 3, 0, ()), CFG_TOY1
    )
    assert verdict.necessary_ok


def test_enum_toy1_starved_user():
    verdict = check_necessary_enum(
        FeedbackProfile.uniform(CFG_TOY1, 2, 0, ()), CFG_TOY1
    )
    assert not verdict.necessary_ok
    assert "condition 1" in verdict.violated_condition


def test_enum_reference_profile_feasible():
    assert check_necessary_enum(PROF_REF, CFG_REF).necessary_ok


def test_enum_guard():
    cfg = NetworkConfig(G=5, K=3, N=15, M=4, d=1)
    profile = FeedbackProfile.uniform(cfg, 4, 5, 15)
    with pytest.raises(EnumerationTooLarge):
        check_necessary_enum(profile, cfg)


def test_flow_reference_profile_with_witness():
    verdict = check_necessary_flow(PROF_REF, CFG_REF)
    assert verdict.necessary_ok
    assert len(verdict.witness) == 8
    _assert_witness_valid(PROF_REF, CFG_REF, verdict.witness)


def _assert_witness_valid(profile, cfg, witness):
    kd = cfg.K * cfg.d
    for (j, k, i), (fr, ft) in witness.items():
        assert fr >= 0 and ft >= 0
        assert fr + ft >= kd
    for j in range(cfg.G):
        for k in range(cfg.K):
            used = sum(fr for (jj, kk, _), (fr, _) in witness.items() if (jj, kk) == (j, k))
            fixed_others = sum(1 for i in profile.fixed_cells(cfg.G) if i != j)
            assert used <= profile.m_at(j, k) - fixed_others * kd - cfg.d
    for i in profile.adaptive_cells():
        used = sum(ft for (_, _, ii), (_, ft) in witness.items() if ii == i)
        assert used <= cfg.K * (profile.n[i] - kd)


def test_flow_no_adaptive_cells_trivial():
    verdict = check_necessary_flow(FeedbackProfile.uniform(CFG_TOY1, 3, 0, ()), CFG_TOY1)
    assert verdict.necessary_ok
    assert verdict.witness == {}


def test_flow_toy2_feasible():
    verdict = check_necessary_flow(FeedbackProfile.uniform(CFG_TOY2, 2, 2, 5), CFG_TOY2)
    assert verdict.necessary_ok
    _assert_witness_valid(FeedbackProfile.uniform(CFG_TOY2, 2, 2, 5), CFG_TOY2, verdict.witness)


def test_flow_small_bs_antenna_infeasible():
    # shrinking one adaptive cell to n=(3,3) starves the 16-unit demand
    profile = FeedbackProfile.uniform(CFG_REF, 4, 2, (3, 3))
    verdict = check_necessary_flow(profile, CFG_REF)
    assert not verdict.necessary_ok
    assert "condition 3" in verdict.violated_condition


def test_sufficient_reference_profile():
    verdict = check_sufficient(PROF_REF, CFG_REF)
    assert verdict.necessary_ok and verdict.sufficient_ok


def test_sufficient_divisibility_failure():
    # d=2, odd n everywhere, K*d does not divide m - d: necessary-only
    cfg = NetworkConfig(G=2, K=2, N=5, M=6, d=2)
    validate_config(cfg)
    profile = FeedbackProfile.uniform(cfg, 5, 2, 5)
    verdict = check_sufficient(profile, cfg)
    assert verdict.necessary_ok
    assert verdict.sufficient_ok is False


def test_sufficient_toy2():
    assert check_sufficient(FeedbackProfile.uniform(CFG_TOY2, 2, 2, 5), CFG_TOY2).sufficient_ok


def test_full_csit_single_user_spot_check():
    # classic 3-cell, 2x2, single user, one stream network is feasible under
    # the full-feedback profile
    cfg = NetworkConfig(G=3, K=1, N=2, M=2, d=1)
    profile = FeedbackProfile.uniform(cfg, 2, 3, 2)
    verdict = check_sufficient(profile, cfg)
    assert verdict.necessary_ok and verdict.sufficient_ok


def _valid_configs(g_max=3, k_max=2, nm_max=5, d_max=2):
    for G in range(2, g_max + 1):
        for K in range(1, k_max + 1):
            for d in range(1, d_max + 1):
                for N in range(1, nm_max + 1):
                    for M in range(1, nm_max + 1):
                        cfg = NetworkConfig(G=G, K=K, N=N, M=M, d=d)
                        try:
                            validate_config(cfg)
                        except Exception:
                            continue
                        yield cfg


def _all_uniform_profiles(cfg):
    for m in range(1, cfg.M + 1):
        for g in range(cfg.G + 1):
            for n in itertools.product(range(1, cfg.N + 1), repeat=g):
                yield FeedbackProfile.uniform(cfg, m, g, n)


def test_enum_flow_agreement_sample():
    # quick slice of the exhaustive oracle-equivalence acceptance check
    cfg = CFG_TOY1
    count = 0
    for profile in _all_uniform_profiles(cfg):
        enum = check_necessary_enum(profile, cfg)
        flow = check_necessary_flow(profile, cfg)
        assert enum.necessary_ok == flow.necessary_ok, profile
        count += 1
    assert count == 3 * (1 + 3 + 9)


def test_enum_flow_agreement_heterogeneous_m():
    rng = generator(424)
    checked = 0
    configs = list(_valid_configs())
    for _ in range(300):
        cfg = configs[rng.integers(len(configs))]
        g = int(rng.integers(cfg.G + 1))
        profile = FeedbackProfile(
            m=tuple(
                tuple(int(rng.integers(1, cfg.M + 1)) for _ in range(cfg.K))
                for _ in range(cfg.G)
            ),
            g=g,
            n=tuple(int(rng.integers(1, cfg.N + 1)) for _ in range(g)),
        )
        enum = check_necessary_enum(profile, cfg)
        flow = check_necessary_flow(profile, cfg)
        assert enum.necessary_ok == flow.necessary_ok, (cfg, profile)
        if flow.witness:
            _assert_witness_valid(profile, cfg, flow.witness)
        checked += 1
    assert checked == 300


def test_monotonicity_in_antennas():
    # growing any antenna count never flips feasible -> infeasible
    rng = generator(77)
    configs = list(_valid_configs())
    for _ in range(150):
        cfg = configs[rng.integers(len(configs))]
        g = int(rng.integers(cfg.G + 1))
        m = int(rng.integers(1, cfg.M + 1))
        n = tuple(int(rng.integers(1, cfg.N + 1)) for _ in range(g))
        profile = FeedbackProfile.uniform(cfg, m, g, n)
        if not check_necessary_flow(profile, cfg).necessary_ok:
            continue
        if m < cfg.M:
            grown = FeedbackProfile.uniform(cfg, m + 1, g, n)
            assert check_necessary_flow(grown, cfg).necessary_ok
        for idx in range(g):
            if n[idx] < cfg.N:
                grown_n = n[:idx] + (n[idx] + 1,) + n[idx + 1 :]
                grown = FeedbackProfile.uniform(cfg, m, g, grown_n)
                assert check_necessary_flow(grown, cfg).necessary_ok
        if g < cfg.G and cfg.N >= cfg.K * cfg.d:
            grown = FeedbackProfile.uniform(cfg, m, g + 1, n + (cfg.N,))
            assert check_necessary_flow(grown, cfg).necessary_ok


def test_render_verdict_mentions_dimension_and_witness():
    text = render_verdict(check_sufficient(PROF_REF, CFG_REF), PROF_REF, CFG_REF)
    assert "feasible" in text
    assert "D = 114" in text
    assert "f_r" in text
