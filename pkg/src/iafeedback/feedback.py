"""Feedback profiles, CSI filtering, and feedback-dimension accounting.

A feedback profile selects, per user, how many receive antennas contribute to
feedback (m), how many base stations adapt their outer precoder (the first g,
"adaptive" cells), and how many transmit antennas each adaptive cell exposes
(n). The remaining G - g cells use fixed outer precoders and their cross
interference is cancelled receiver-side, which shrinks what must be fed back.

Filtered CSI is direction-only: every effective matrix is stored with unit
Frobenius norm.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import frob, left_null_space, random_semi_unitary
from .network import validate_config
from .rng import derive_seed


class ProfileError(ValueError):
    pass


class DegenerateChannelError(RuntimeError):
    pass


@dataclass(frozen=True)
class FeedbackProfile:
    """m[j][k]: per-user feedback antennas; first `g` cells adaptive with
    per-cell feedback antennas n[i]; cells g..G-1 use fixed outer precoders."""

    m: tuple
    g: int
    n: tuple

    @staticmethod
    def uniform(cfg, m, g, n):
        """Profile with the same m at every user; n may be an int or sequence."""
        if isinstance(n, int):
            n = (n,) * g
        return FeedbackProfile(
            m=tuple((m,) * cfg.K for _ in range(cfg.G)), g=g, n=tuple(n)
        )

    def m_at(self, j, k):
        return self.m[j][k]

    def adaptive_cells(self):
        return range(self.g)

    def fixed_cells(self, G):
        return range(self.g, G)

    def is_adaptive(self, j):
        return j < self.g

    def to_dict(self):
        return {"m": [list(row) for row in self.m], "g": self.g, "n": list(self.n)}

    @staticmethod
    def from_dict(data):
        return FeedbackProfile(
            m=tuple(tuple(int(x) for x in row) for row in data["m"]),
            g=int(data["g"]),
            n=tuple(int(x) for x in data["n"]),
        )


def validate_profile(profile, cfg):
    validate_config(cfg)
    if len(profile.m) != cfg.G or any(len(row) != cfg.K for row in profile.m):
        raise ProfileError("m must be a G x K grid")
    if not all(1 <= mm <= cfg.M for row in profile.m for mm in row):
        raise ProfileError(f"each m must lie in 1..M={cfg.M}")
    if not 0 <= profile.g <= cfg.G:
        raise ProfileError(f"g must lie in 0..G={cfg.G}, got {profile.g}")
    if len(profile.n) != profile.g:
        raise ProfileError("n must list one antenna count per adaptive cell")
    if not all(1 <= nn <= cfg.N for nn in profile.n):
        raise ProfileError(f"each n must lie in 1..N={cfg.N}")
    # n >= K*d is a feasibility requirement, not a representation one; the
    # feasibility module flags violations.


def csi_submatrix(h, m_rows, n_cols):
    """Top-left m_rows x n_cols block (first-antennas convention)."""
    h = np.asarray(h)
    rows, cols = h.shape
    if not (1 <= m_rows <= rows and 1 <= n_cols <= cols):
        raise ValueError(f"submatrix {m_rows}x{n_cols} out of range for {rows}x{cols}")
    return h[:m_rows, :n_cols]


def a_dim(profile, cfg, j, k):
    """Post-cancellation dimension at user (j,k); <= 0 signals infeasibility."""
    fixed_others = sum(1 for i in profile.fixed_cells(cfg.G) if i != j)
    return profile.m_at(j, k) - fixed_others * cfg.K * cfg.d


def grassmann_tuple(profile, cfg, j, k):
    """Per fed-back matrix of user (j,k): (subspace dim 1, ambient dim).

    One entry per adaptive cell (ambient n_i * A); users of fixed cells add a
    direct-link entry with ambient K*d*A.
    """
    a = a_dim(profile, cfg, j, k)
    if a < 1:
        raise ProfileError(f"user ({j},{k}) has non-positive effective dimension {a}")
    dims = [(1, profile.n[i] * a) for i in profile.adaptive_cells()]
    if not profile.is_adaptive(j):
        dims.append((1, cfg.K * cfg.d * a))
    return dims


def feedback_dimension(profile, cfg):
    """Total feedback dimension D of the profile (sum of manifold dimensions)."""
    validate_profile(profile, cfg)
    total = 0
    for j in range(cfg.G):
        for k in range(cfg.K):
            a = a_dim(profile, cfg, j, k)
            if a < 1:
                raise ProfileError(
                    f"user ({j},{k}) has non-positive effective dimension {a}"
                )
            total += sum(profile.n[i] * a - 1 for i in profile.adaptive_cells())
            if not profile.is_adaptive(j):
                total += cfg.K * cfg.d * a - 1
    return total


def full_cdi_dimension(cfg):
    """Feedback dimension of quantizing every cross and direct channel."""
    return cfg.G * cfg.G * cfg.K * (cfg.M * cfg.N - 1)


def fixed_outer_precoders(cfg, profile, rng_state):
    """Fixed outer precoders for the non-adaptive cells.

    Each is an N x Kd Haar semi-unitary drawn from a seed derived from
    (rng_state, cell index), so cell i's precoder does not depend on g and is
    known network-wide without feedback.
    """
    if cfg.N < cfg.K * cfg.d:
        raise ProfileError(f"N={cfg.N} < K*d={cfg.K * cfg.d}: no valid outer precoder")
    return {
        i: random_semi_unitary(cfg.N, cfg.K * cfg.d, derive_seed(rng_state, "t2", i))
        for i in profile.fixed_cells(cfg.G)
    }


@dataclass
class EffectiveCsiSet:
    """Filter outputs per user.

    r[j][k]: m x A receive-side null-space basis of the fixed-cell cross
    interference (identity when there is none). he[j][k] maps source cell
    index -> unit-norm effective matrix: A x n_i for adaptive sources and
    A x Kd for the direct link of a fixed-cell user. a[j][k] caches A.
    """

    r: list
    he: list
    a: list


def apply_filter(channels, profile, t2, cfg):
    """Filter one channel realization into the per-user effective CSI."""
    validate_profile(profile, cfg)
    r_all, he_all, a_all = [], [], []
    for j in range(cfg.G):
        r_row, he_row, a_row = [], [], []
        for k in range(cfg.K):
            m = profile.m_at(j, k)
            a = a_dim(profile, cfg, j, k)
            if a < 1:
                raise ProfileError(
                    f"user ({j},{k}) has non-positive effective dimension {a}"
                )
            fixed_others = [i for i in profile.fixed_cells(cfg.G) if i != j]
            if fixed_others:
                stack = np.hstack(
                    [csi_submatrix(channels[j, k, i], m, cfg.N) @ t2[i] for i in fixed_others]
                )
                r = left_null_space(stack)
                if r.shape[1] != a:
                    raise DegenerateChannelError(
                        f"user ({j},{k}): null space dimension {r.shape[1]} != {a}"
                    )
            else:
                r = np.eye(m, dtype=complex)
            he = {}
            for i in profile.adaptive_cells():
                eff = r.conj().T @ csi_submatrix(channels[j, k, i], m, profile.n[i])
                he[i] = eff / frob(eff)
            if not profile.is_adaptive(j):
                eff = r.conj().T @ csi_submatrix(channels[j, k, j], m, cfg.N) @ t2[j]
                he[j] = eff / frob(eff)
            r_row.append(r)
            he_row.append(he)
            a_row.append(a)
        r_all.append(r_row)
        he_all.append(he_row)
        a_all.append(a_row)
    return EffectiveCsiSet(r=r_all, he=he_all, a=a_all)
