"""Unit-vector quantization of filtered CSI directions.

Each effective matrix is column-stacked, normalized, and matched against a
seeded random codebook of uniform unit vectors; the recovered direction is
phase-aligned and the squared chordal distance is recorded as distortion.

Codebooks are searched exhaustively while they fit in memory. Beyond that the
selected codeword is drawn from the exact distribution the exhaustive search
induces: the best alignment over 2^bits independent uniform codewords has a
closed-form order-statistic law, and the residual direction is isotropic in
the orthogonal complement. This keeps distortion measurements exact at bit
budgets where materializing the codebook is physically impossible.
"""

from dataclasses import dataclass

import numpy as np

from .feedback import feedback_dimension
from .linalg import unvec, vec_normalize
from .rng import derive_seed, generator

MAX_CODEBOOK_BITS = 24
EXPLICIT_SEARCH_BITS = 16


@dataclass(frozen=True)
class Codebook:
    ambient_dim: int
    bits: int
    entries: np.ndarray  # (2^bits, ambient_dim) unit rows


@dataclass
class QuantizedCsi:
    index: int | None  # codeword id, None when drawn without materializing
    reconstructed: np.ndarray  # unit Frobenius norm, phase-aligned
    distortion: float  # squared chordal distance


def build_codebook(ambient_dim, bits, rng_state):
    """2^bits i.i.d. uniform unit vectors on the complex sphere."""
    if ambient_dim < 1:
        raise ValueError(f"ambient dimension must be >= 1, got {ambient_dim}")
    if not 0 <= bits <= MAX_CODEBOOK_BITS:
        raise ValueError(f"bits must lie in 0..{MAX_CODEBOOK_BITS}, got {bits}")
    rng = generator(rng_state)
    size = (2 ** bits, ambient_dim)
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return Codebook(
        ambient_dim=ambient_dim,
        bits=bits,
        entries=z / np.linalg.norm(z, axis=1, keepdims=True),
    )


def quantize_matrix(h, cb):
    """Nearest codeword by chordal alignment, searched exhaustively."""
    h = np.asarray(h, dtype=complex)
    rows, cols = h.shape
    if rows * cols != cb.ambient_dim:
        raise ValueError(f"matrix of size {rows * cols} vs codebook dim {cb.ambient_dim}")
    direction, _ = vec_normalize(h)
    inner = cb.entries.conj() @ direction
    index = int(np.argmax(np.abs(inner)))  # ties resolve to the lowest index
    align = np.abs(inner[index])
    if align > 0:
        codeword = cb.entries[index] * (inner[index] / align)
    else:
        codeword = cb.entries[index]
    return QuantizedCsi(
        index=index,
        reconstructed=unvec(codeword, rows, cols),
        distortion=float(max(1.0 - align ** 2, 0.0)),
    )


def sample_rvq_distortion(ambient_dim, bits, rng, size=None):
    """Draw min squared chordal distance over 2^bits uniform codewords.

    Each candidate's squared distance to a fixed direction has cdf
    z^(ambient_dim - 1); inverse-sampling the minimum of 2^bits draws uses
    expm1 so arbitrarily large bit counts stay numerically exact.
    """
    if ambient_dim < 2:
        return 0.0 if size is None else np.zeros(size)
    u = generator(rng).uniform(size=size)
    count = 2.0 ** bits
    return (-np.expm1(np.log(u) / count)) ** (1.0 / (ambient_dim - 1))


def quantize_matrix_virtual(h, bits, rng_state):
    """Quantize against an implicit 2^bits random codebook.

    Distribution-exact stand-in for quantize_matrix with a fresh seeded
    codebook: the alignment follows the order-statistic law and the residual
    direction is isotropic orthogonal to the input direction.
    """
    h = np.asarray(h, dtype=complex)
    rows, cols = h.shape
    direction, _ = vec_normalize(h)
    ambient = rows * cols
    rng = generator(rng_state)
    if ambient == 1:
        return QuantizedCsi(index=None, reconstructed=unvec(direction, rows, cols), distortion=0.0)
    z = float(sample_rvq_distortion(ambient, bits, rng))
    w = rng.standard_normal(ambient) + 1j * rng.standard_normal(ambient)
    w -= direction * (direction.conj() @ w)
    w /= np.linalg.norm(w)
    codeword = np.sqrt(1.0 - z) * direction + np.sqrt(z) * w
    return QuantizedCsi(index=None, reconstructed=unvec(codeword, rows, cols), distortion=z)


def expected_distortion(ambient_dim, bits_per_dim):
    """Model value of the mean distortion at b bits per manifold dimension."""
    if ambient_dim < 2:
        raise ValueError("ambient dimension must be >= 2")
    return (ambient_dim - 1) * 2.0 ** (-bits_per_dim)


@dataclass
class QuantizedFeedback:
    eff: object  # EffectiveCsiSet with quantized directions
    bits_per_dim: int
    distortions: dict  # (j, k, i) -> squared chordal distance


def quantize_feedback(eff, profile, cfg, total_bits, rng_state,
                      explicit_bits_cap=EXPLICIT_SEARCH_BITS):
    """Quantize every effective matrix under a total bit budget.

    The budget is spread uniformly: b = total_bits // D bits per feedback
    dimension, so a matrix with ambient dimension B gets b*(B-1) bits (any
    remainder is unused). Each matrix uses its own derived codebook seed.
    Receiver-side null-space bases are kept exact; only the fed-back
    directions are distorted.
    """
    dim = feedback_dimension(profile, cfg)
    if dim == 0:
        raise ValueError("profile has zero feedback dimension; nothing to quantize")
    if total_bits < 0:
        raise ValueError("total bit budget must be non-negative")
    b = total_bits // dim
    he_hat = []
    distortions = {}
    for j in range(cfg.G):
        row = []
        for k in range(cfg.K):
            entry = {}
            for i, he in eff.he[j][k].items():
                ambient = he.size
                bits = b * (ambient - 1)
                seed = derive_seed(rng_state, "cb", j, k, i)
                if bits <= explicit_bits_cap:
                    q = quantize_matrix(he, build_codebook(ambient, bits, seed))
                else:
                    q = quantize_matrix_virtual(he, bits, seed)
                entry[i] = q.reconstructed
                distortions[(j, k, i)] = q.distortion
            row.append(entry)
        he_hat.append(row)
    eff_hat = type(eff)(r=eff.r, he=he_hat, a=eff.a)
    return QuantizedFeedback(eff=eff_hat, bits_per_dim=b, distortions=distortions)
