"""Transceiver design on filtered CSI and verification on true channels.

The solver alternates eigenvector updates that monotonically shrink the
cross-cell interference leakage in the reduced space carved out by the
feedback profile. A converged reduced solution is then lifted to full-size
precoders/decorrelators using only information the base stations and users
actually hold: the reduced solution, the effective CSI, the fixed outer
precoders, and the users' own null-space bases. Nothing here may read raw
channels except `verify_ia`, which is the report-only auditor.
"""

from dataclasses import dataclass, field

import numpy as np

from .feedback import validate_profile
from .linalg import frob, random_semi_unitary, smallest_eigvecs
from .rng import derive_seed


class NotConvergedError(RuntimeError):
    pass


@dataclass
class ReducedSolution:
    t_tilde: dict  # adaptive cell -> n_i x Kd semi-unitary
    u_tilde: list  # [j][k] -> A_jk x d semi-unitary
    leakage_trace: list
    converged: bool
    iterations: int


@dataclass
class TransceiverSet:
    t: list  # per cell, N x Kd outer precoder
    v_s: list  # [j][k] Kd x d inner precoder
    u: list  # [j][k] M x d decorrelator


def _cross_pairs(profile, cfg):
    return [
        (j, k, i)
        for j in range(cfg.G)
        for k in range(cfg.K)
        for i in profile.adaptive_cells()
        if i != j
    ]


def leakage(eff, sol, profile, cfg):
    """Total residual cross-cell power in the reduced space (>= 0)."""
    total = 0.0
    for j, k, i in _cross_pairs(profile, cfg):
        x = sol.u_tilde[j][k].conj().T @ eff.he[j][k][i] @ sol.t_tilde[i]
        total += float(np.sum(np.abs(x) ** 2))
    return total


def ailm_solve(
    eff,
    profile,
    cfg,
    rng_state=0,
    max_iters=2000,
    tol_leakage=1e-10,
    tol_rel_change=1e-12,
):
    """Alternating leakage minimization on the effective CSI.

    Each pass replaces every user filter with the d least-interfered receive
    directions and every adaptive outer precoder with the Kd least-interfering
    transmit directions; the objective is non-increasing and bounded below,
    but reaching zero is only guaranteed empirically on feasible profiles.
    """
    validate_profile(profile, cfg)
    kd = cfg.K * cfg.d
    for i in profile.adaptive_cells():
        if profile.n[i] < kd:
            raise ValueError(f"adaptive cell {i}: n={profile.n[i]} < K*d={kd}")
    for j in range(cfg.G):
        for k in range(cfg.K):
            if eff.a[j][k] < cfg.d:
                raise ValueError(f"user ({j},{k}): A={eff.a[j][k]} < d={cfg.d}")
    t_tilde = {
        i: random_semi_unitary(profile.n[i], kd, derive_seed(rng_state, "t", i))
        for i in profile.adaptive_cells()
    }
    u_tilde = [
        [
            random_semi_unitary(eff.a[j][k], cfg.d, derive_seed(rng_state, "u", j, k))
            for k in range(cfg.K)
        ]
        for j in range(cfg.G)
    ]
    sol = ReducedSolution(
        t_tilde=t_tilde, u_tilde=u_tilde, leakage_trace=[], converged=False, iterations=0
    )
    pairs = _cross_pairs(profile, cfg)
    current = leakage(eff, sol, profile, cfg)
    sol.leakage_trace.append(current)
    if not pairs or current < tol_leakage:
        sol.converged = True
        return sol
    cross_sources = [
        [[i for i in profile.adaptive_cells() if i != j] for k in range(cfg.K)]
        for j in range(cfg.G)
    ]
    cross_users = {
        i: [(j, k) for j in range(cfg.G) for k in range(cfg.K) if j != i]
        for i in profile.adaptive_cells()
    }
    eigh = np.linalg.eigh
    for iteration in range(1, max_iters + 1):
        for j in range(cfg.G):
            for k in range(cfg.K):
                sources = cross_sources[j][k]
                if not sources:
                    continue
                q = np.zeros((eff.a[j][k], eff.a[j][k]), dtype=complex)
                for i in sources:
                    x = eff.he[j][k][i] @ t_tilde[i]
                    q += x @ x.conj().T
                u_tilde[j][k] = eigh(q)[1][:, : cfg.d]
        # After the precoder update, the leakage equals the sum of the kept
        # (smallest) eigenvalues of the per-cell interference matrices.
        current_new = 0.0
        for i in profile.adaptive_cells():
            q = np.zeros((profile.n[i], profile.n[i]), dtype=complex)
            for j, k in cross_users[i]:
                x = eff.he[j][k][i].conj().T @ u_tilde[j][k]
                q += x @ x.conj().T
            w, vecs = eigh(q)
            t_tilde[i] = vecs[:, :kd]
            current_new += max(float(np.sum(w[:kd])), 0.0)
        previous, current = current, current_new
        sol.leakage_trace.append(current)
        sol.iterations = iteration
        if current < tol_leakage:
            sol.converged = True
            break
        if previous > 0 and (previous - current) / previous < tol_rel_change:
            break
    return sol


def solve_with_restarts(eff, profile, cfg, rng_state=0, restarts=5, **opts):
    """Run the solver from derived seeds until convergence; keep the best run."""
    best = None
    for attempt in range(max(restarts, 1)):
        sol = ailm_solve(eff, profile, cfg, rng_state=derive_seed(rng_state, "restart", attempt), **opts)
        if best is None or sol.leakage_trace[-1] < best.leakage_trace[-1]:
            best = sol
        if sol.converged:
            return sol
    return best


def reconstruct(sol, eff, t2, profile, cfg):
    """Lift a converged reduced solution to full-size transceivers.

    Outer precoders are zero-padded onto unused transmit antennas, user
    filters ride the receiver null-space bases, and inner precoders take the
    d least-coupled directions of the within-cell interference each user
    would otherwise leak to its neighbours.
    """
    if not sol.converged:
        raise NotConvergedError(
            f"reduced solution not converged (final leakage "
            f"{sol.leakage_trace[-1]:.3e}); refusing to reconstruct"
        )
    kd = cfg.K * cfg.d
    t_full = []
    for i in range(cfg.G):
        if profile.is_adaptive(i):
            block = np.zeros((cfg.N, kd), dtype=complex)
            block[: profile.n[i], :] = sol.t_tilde[i]
            t_full.append(block)
        else:
            t_full.append(t2[i])
    u_full = []
    for j in range(cfg.G):
        row = []
        for k in range(cfg.K):
            ru = eff.r[j][k] @ sol.u_tilde[j][k]
            block = np.zeros((cfg.M, cfg.d), dtype=complex)
            block[: ru.shape[0], :] = ru
            row.append(block)
        u_full.append(row)
    v_s = []
    for j in range(cfg.G):
        row = []
        for k in range(cfg.K):
            if cfg.K == 1:
                row.append(np.eye(kd, dtype=complex)[:, : cfg.d])
                continue
            gram = np.zeros((kd, kd), dtype=complex)
            for p in range(cfg.K):
                if p == k:
                    continue
                x = sol.u_tilde[j][p].conj().T @ eff.he[j][p][j]
                if profile.is_adaptive(j):
                    x = x @ sol.t_tilde[j]
                gram += x.conj().T @ x
            row.append(smallest_eigvecs(gram, cfg.d))
        v_s.append(row)
    return TransceiverSet(t=t_full, v_s=v_s, u=u_full)


def random_transceivers(cfg, rng_state):
    """Channel-oblivious random semi-unitary transceivers."""
    kd = cfg.K * cfg.d
    t = [random_semi_unitary(cfg.N, kd, derive_seed(rng_state, "t", i)) for i in range(cfg.G)]
    v_s = [
        [random_semi_unitary(kd, cfg.d, derive_seed(rng_state, "v", j, k)) for k in range(cfg.K)]
        for j in range(cfg.G)
    ]
    u = [
        [random_semi_unitary(cfg.M, cfg.d, derive_seed(rng_state, "u", j, k)) for k in range(cfg.K)]
        for j in range(cfg.G)
    ]
    return TransceiverSet(t=t, v_s=v_s, u=u)


RANK_TOL = 1e-6


@dataclass
class IaReport:
    """Worst relative residuals of the alignment conditions on true channels."""

    rank_min: float
    intracell_max: float
    intercell_max: float
    tol: float
    rank_tol: float = RANK_TOL
    details: dict = field(default_factory=dict)

    @property
    def rank_ok(self):
        return self.rank_min > self.rank_tol

    @property
    def intracell_ok(self):
        return self.intracell_max < self.tol

    @property
    def intercell_ok(self):
        return self.intercell_max < self.tol

    @property
    def passed(self):
        return self.rank_ok and self.intracell_ok and self.intercell_ok


def verify_ia(channels, ts, cfg, tol):
    """Audit rank, within-cell and cross-cell nulling on the raw channels."""
    rank_min = np.inf
    intra_max = 0.0
    inter_max = 0.0
    for j in range(cfg.G):
        for k in range(cfg.K):
            u = ts.u[j][k]
            h_direct = channels[j, k, j]
            scale = frob(h_direct)
            direct = u.conj().T @ h_direct @ ts.t[j] @ ts.v_s[j][k]
            smin = float(np.linalg.svd(direct, compute_uv=False)[-1])
            rank_min = min(rank_min, smin / scale)
            for p in range(cfg.K):
                if p != k:
                    x = u.conj().T @ h_direct @ ts.t[j] @ ts.v_s[j][p]
                    intra_max = max(intra_max, frob(x) / scale)
            for i in range(cfg.G):
                if i != j:
                    h_cross = channels[j, k, i]
                    x = u.conj().T @ h_cross @ ts.t[i]
                    inter_max = max(inter_max, frob(x) / frob(h_cross))
    return IaReport(
        rank_min=float(rank_min),
        intracell_max=float(intra_max),
        intercell_max=float(inter_max),
        tol=tol,
    )


def write_leakage_trace(path, trace):
    """CSV of the per-iteration leakage values: columns iter, I."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iter,I\n")
        for idx, value in enumerate(trace):
            fh.write(f"{idx},{value:.16e}\n")
