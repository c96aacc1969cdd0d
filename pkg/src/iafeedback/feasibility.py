"""Feasibility of a feedback profile: can every user get d aligned streams?

Two interchangeable deciders are provided. The enumerative one checks the
per-user antenna condition, the per-cell antenna condition, and a subset
counting inequality over every (receiver subset, adaptive-cell subset) pair.
The flow-based one builds a supply/demand graph whose max flow saturates all
demands exactly when the same conditions hold, and additionally extracts an
integer witness split (f_r, f_t) of each pairwise demand. A divisibility test
upgrades a necessary verdict to a sufficient one.
"""

from dataclasses import dataclass, field

import numpy as np

from .feedback import feedback_dimension, validate_profile

SOURCE = "a"
SINK = "b"


class EnumerationTooLarge(ValueError):
    pass


@dataclass
class FeasibilityVerdict:
    necessary_ok: bool
    sufficient_ok: bool | None = None
    witness: dict | None = None
    violated_condition: str | None = None


@dataclass
class FlowNetwork:
    """Directed graph with integer capacities and residual-arc storage.

    Adjacency preserves insertion order, which makes the max-flow routine
    fully deterministic.
    """

    labels: list = field(default_factory=list)
    index: dict = field(default_factory=dict)
    adj: list = field(default_factory=list)
    head: list = field(default_factory=list)
    cap: list = field(default_factory=list)
    _forward: list = field(default_factory=list)  # (tail, head, arc_id)

    def add_node(self, label):
        if label in self.index:
            return self.index[label]
        self.index[label] = len(self.labels)
        self.labels.append(label)
        self.adj.append([])
        return self.index[label]

    def add_edge(self, tail, head, capacity):
        if capacity < 0:
            raise ValueError(f"negative capacity on edge {tail} -> {head}")
        u, v = self.add_node(tail), self.add_node(head)
        arc = len(self.cap)
        self.head.extend([v, u])
        self.cap.extend([int(capacity), 0])
        self.adj[u].append(arc)
        self.adj[v].append(arc + 1)
        self._forward.append((tail, head, arc))

    def edges(self):
        return [(t, h, self.cap[a] + self.cap[a ^ 1]) for t, h, a in self._forward]


def max_flow(net, source=SOURCE, sink=SINK):
    """Exact integer max flow (level-graph augmentation, deterministic).

    Returns (value, flows) where flows maps (tail_label, head_label) to the
    integer flow on that edge.
    """
    s, t = net.index[source], net.index[sink]
    n = len(net.labels)
    original = {arc: net.cap[arc] + net.cap[arc ^ 1] for _, _, arc in net._forward}
    total = 0
    while True:
        level = [-1] * n
        level[s] = 0
        queue = [s]
        for u in queue:
            for arc in net.adj[u]:
                v = net.head[arc]
                if net.cap[arc] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        if level[t] < 0:
            break
        it = [0] * n

        def push(u, limit):
            if u == t:
                return limit
            while it[u] < len(net.adj[u]):
                arc = net.adj[u][it[u]]
                v = net.head[arc]
                if net.cap[arc] > 0 and level[v] == level[u] + 1:
                    sent = push(v, min(limit, net.cap[arc]))
                    if sent > 0:
                        net.cap[arc] -= sent
                        net.cap[arc ^ 1] += sent
                        return sent
                it[u] += 1
            return 0

        while True:
            sent = push(s, int(1 << 62))
            if sent == 0:
                break
            total += sent
    flows = {}
    for tail, head, arc in net._forward:
        flows[(tail, head)] = original[arc] - net.cap[arc]
        net.cap[arc] = original[arc]  # restore so the network can be reused
        net.cap[arc ^ 1] = 0
    return total, flows


def _deficit(profile, cfg, j, k):
    fixed_others = sum(1 for i in profile.fixed_cells(cfg.G) if i != j)
    return profile.m_at(j, k) - fixed_others * cfg.K * cfg.d - cfg.d


def demand_pairs(profile, cfg):
    """(user, adaptive cell != serving cell) pairs carrying a Kd demand."""
    return [
        (j, k, i)
        for j in range(cfg.G)
        for k in range(cfg.K)
        for i in profile.adaptive_cells()
        if i != j
    ]


def build_flow_network(profile, cfg):
    """Supply/demand graph for the pairwise alignment budget.

    Edge capacities: a->u_jk and u_jk->c_jk_i carry the user's spare receive
    dimensions, a->v_i and v_i->c_jk_i carry cell i's spare transmit
    dimensions, and each c_jk_i->b carries the Kd demand of that pair.
    Raises ValueError if any capacity would be negative.
    """
    kd = cfg.K * cfg.d
    net = FlowNetwork()
    net.add_node(SOURCE)
    pairs = demand_pairs(profile, cfg)
    for j in range(cfg.G):
        for k in range(cfg.K):
            net.add_edge(SOURCE, ("u", j, k), _deficit(profile, cfg, j, k))
    for i in profile.adaptive_cells():
        net.add_edge(SOURCE, ("v", i), cfg.K * (profile.n[i] - kd))
    for j, k, i in pairs:
        net.add_edge(("u", j, k), ("c", j, k, i), _deficit(profile, cfg, j, k))
        net.add_edge(("v", i), ("c", j, k, i), cfg.K * (profile.n[i] - kd))
        net.add_edge(("c", j, k, i), SINK, kd)
    net.add_node(SINK)
    return net


def _condition_1_violation(profile, cfg):
    for j in range(cfg.G):
        for k in range(cfg.K):
            if _deficit(profile, cfg, j, k) < 0:
                return (
                    f"condition 1 violated at user ({j + 1},{k + 1}): "
                    f"m={profile.m_at(j, k)} leaves fewer than d={cfg.d} "
                    "dimensions after fixed-cell cancellation"
                )
    return None


def _condition_2_violation(profile, cfg):
    kd = cfg.K * cfg.d
    if cfg.N < kd:
        return f"condition 2 violated: N={cfg.N} < K*d={kd}"
    for i in profile.adaptive_cells():
        if profile.n[i] < kd:
            return f"condition 2 violated at cell {i + 1}: n={profile.n[i]} < K*d={kd}"
    return None


def check_necessary_enum(profile, cfg):
    """Necessary conditions by exhaustive subset enumeration.

    Subset pairs are evaluated vectorized; the reported violation is the
    lexicographically first (receiver mask, cell mask) as little-endian
    integers.
    """
    validate_profile(profile, cfg)
    gk = cfg.G * cfg.K
    if gk + profile.g > 14:
        raise EnumerationTooLarge(
            f"{2 ** (gk + profile.g)} subset pairs exceed the enumeration guard"
        )
    for checker in (_condition_1_violation, _condition_2_violation):
        reason = checker(profile, cfg)
        if reason:
            return FeasibilityVerdict(necessary_ok=False, violated_condition=reason)
    kd = cfg.K * cfg.d
    deficits = np.array(
        [_deficit(profile, cfg, j, k) for j in range(cfg.G) for k in range(cfg.K)]
    )
    cell_of = np.array([j for j in range(cfg.G) for _ in range(cfg.K)])
    masks_r = np.arange(2 ** gk)
    bits_r = (masks_r[:, None] >> np.arange(gk)[None, :]) & 1  # (2^gk, gk)
    sum_def = bits_r @ deficits
    size_r = bits_r.sum(axis=1)
    counts = np.zeros((len(masks_r), cfg.G), dtype=np.int64)
    for idx in range(gk):
        counts[:, cell_of[idx]] += bits_r[:, idx]
    g = profile.g
    masks_t = np.arange(2 ** g)
    bits_t = (masks_t[:, None] >> np.arange(g)[None, :]) & 1 if g else np.zeros((1, 0), int)
    surplus = np.array([cfg.K * (profile.n[i] - kd) for i in range(g)], dtype=np.int64)
    sum_sur = bits_t @ surplus if g else np.zeros(1, dtype=np.int64)
    size_t = bits_t.sum(axis=1) if g else np.zeros(1, dtype=np.int64)
    cross = counts[:, :g] @ bits_t.T if g else np.zeros((len(masks_r), 1), dtype=np.int64)
    lhs = sum_def[:, None] + sum_sur[None, :]
    rhs = kd * (size_r[:, None] * size_t[None, :] - cross)
    violated = lhs < rhs
    if violated.any():
        r_idx = int(np.argmax(violated.any(axis=1)))
        t_idx = int(np.argmax(violated[r_idx]))
        users = [
            f"({idx // cfg.K + 1},{idx % cfg.K + 1})"
            for idx in range(gk)
            if (r_idx >> idx) & 1
        ]
        cells = [str(i + 1) for i in range(g) if (t_idx >> i) & 1]
        return FeasibilityVerdict(
            necessary_ok=False,
            violated_condition=(
                "condition 3 violated for receiver subset {" + ", ".join(users) + "} "
                "and adaptive-cell subset {" + ", ".join(cells) + "}"
            ),
        )
    return FeasibilityVerdict(necessary_ok=True)


def check_necessary_flow(profile, cfg):
    """Necessary conditions by max flow, with an integer witness on success."""
    validate_profile(profile, cfg)
    for checker in (_condition_1_violation, _condition_2_violation):
        reason = checker(profile, cfg)
        if reason:
            return FeasibilityVerdict(necessary_ok=False, violated_condition=reason)
    pairs = demand_pairs(profile, cfg)
    if not pairs:
        return FeasibilityVerdict(necessary_ok=True, witness={})
    kd = cfg.K * cfg.d
    demand = kd * len(pairs)
    net = build_flow_network(profile, cfg)
    value, flows = max_flow(net)
    if value < demand:
        return FeasibilityVerdict(
            necessary_ok=False,
            violated_condition=(
                f"condition 3 violated: max flow {value} < total demand {demand}"
            ),
        )
    witness = {
        (j, k, i): (flows[(("u", j, k), ("c", j, k, i))], flows[(("v", i), ("c", j, k, i))])
        for j, k, i in pairs
    }
    return FeasibilityVerdict(necessary_ok=True, witness=witness)


def check_sufficient(profile, cfg):
    """Necessary check plus the divisibility conditions that make it sufficient."""
    verdict = check_necessary_flow(profile, cfg)
    if not verdict.necessary_ok:
        verdict.sufficient_ok = False
        return verdict
    kd = cfg.K * cfg.d
    n_divisible = all(n % cfg.d == 0 for n in profile.n)
    m_divisible = all(
        (profile.m_at(j, k) - cfg.d) % kd == 0
        for j in range(cfg.G)
        for k in range(cfg.K)
    )
    verdict.sufficient_ok = n_divisible or m_divisible
    if not verdict.sufficient_ok:
        verdict.violated_condition = (
            "divisibility not met: neither d | n_i for all adaptive cells "
            "nor K*d | (m_jk - d) for all users"
        )
    return verdict


def render_verdict(verdict, profile, cfg):
    """Human-readable verdict block for the CLI."""
    lines = []
    status = (
        "feasible (sufficient)"
        if verdict.sufficient_ok
        else "necessary conditions hold; sufficiency undetermined"
        if verdict.necessary_ok
        else "infeasible"
    )
    lines.append(f"verdict: {status}")
    lines.append(f"feedback dimension D = {feedback_dimension(profile, cfg)}"
                 if verdict.necessary_ok else "feedback dimension D = n/a")
    if verdict.violated_condition:
        lines.append(f"detail: {verdict.violated_condition}")
    if verdict.witness:
        lines.append("witness (user j,k | cell i | f_r | f_t):")
        for (j, k, i), (fr, ft) in sorted(verdict.witness.items()):
            lines.append(f"  {j + 1},{k + 1} | {i + 1} | {fr} | {ft}")
    return "\n".join(lines)
