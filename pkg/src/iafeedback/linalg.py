"""Complex dense linear algebra kernel shared by all other modules.

Matrices are plain complex numpy arrays. Eigenvector/basis phases are
canonicalized (largest-magnitude entry of each column made real positive) so
that serialized outputs are reproducible; degenerate eigenspaces still only
admit subspace-level guarantees.
"""

import numpy as np

from .rng import generator

RANK_RTOL = 1e-10
HERMITIAN_RTOL = 1e-10


def frob(a):
    return float(np.linalg.norm(np.asarray(a)))


def _as_matrix(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def canonical_phases(q):
    """Rotate each column so its largest-magnitude entry is real positive."""
    q = np.array(q, dtype=complex, copy=True)
    for col in range(q.shape[1]):
        idx = int(np.argmax(np.abs(q[:, col])))
        pivot = q[idx, col]
        if np.abs(pivot) > 0:
            q[:, col] *= np.conj(pivot) / np.abs(pivot)
    return q


def hermitian_eig(a):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Returns (w, q) with a @ q = q @ diag(w) and q unitary. Raises on
    non-square input or Hermitian asymmetry beyond tolerance.
    """
    a = _as_matrix(a)
    n, m = a.shape
    if n != m:
        raise ValueError(f"matrix must be square, got {n}x{m}")
    scale = frob(a)
    if frob(a - a.conj().T) > HERMITIAN_RTOL * max(scale, 1.0):
        raise ValueError("matrix is not Hermitian within tolerance")
    w, q = np.linalg.eigh(a)
    return w, canonical_phases(q)


def smallest_eigvecs(a, d):
    """Semi-unitary basis of the d eigenvectors with smallest eigenvalues."""
    a = _as_matrix(a)
    if d > a.shape[0]:
        raise ValueError(f"requested {d} eigenvectors from a {a.shape[0]}-dim matrix")
    _, q = hermitian_eig(a)
    return q[:, :d]


def left_null_space(a):
    """Semi-unitary basis of the left null space {u : u^H a = 0}.

    The basis is computed from the orthogonal projector onto the null space,
    so it depends on the input only through the column span of `a`. Rank uses
    the threshold RANK_RTOL * sigma_max * max(shape). May return an m x 0
    matrix.
    """
    a = _as_matrix(a)
    m, n = a.shape
    if n == 0 or frob(a) == 0.0:
        return np.eye(m, dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=True)
    tol = RANK_RTOL * s[0] * max(m, n)
    rank = int(np.sum(s > tol))
    r = m - rank
    if r == 0:
        return np.zeros((m, 0), dtype=complex)
    # Projector onto the null space; invariant to rescaling blocks of `a`.
    ur = u[:, :rank]
    proj = np.eye(m, dtype=complex) - ur @ ur.conj().T
    # Orthonormalize the r highest-leverage projector columns.
    cols = np.argsort(-np.real(np.diag(proj)), kind="stable")[:r]
    q, rr = np.linalg.qr(proj[:, np.sort(cols)])
    if np.min(np.abs(np.diag(rr))) < 1e-12:
        q = u[:, rank:]  # fallback for pathological column selections
    return canonical_phases(q)


def random_semi_unitary(rows, cols, rng_state):
    """Haar-distributed semi-unitary matrix, deterministic per rng_state."""
    if rows < cols:
        raise ValueError(f"rows ({rows}) must be >= cols ({cols})")
    rng = generator(rng_state)
    z = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    # Fix phases so the distribution is exactly Haar.
    diag = np.diag(r)
    q = q * (np.conj(diag) / np.abs(diag))
    return q


def vec_normalize(h):
    """Column-stacked vectorization of h scaled to unit norm.

    Returns (unit_vector, norm); `unvec(norm * unit_vector, *h.shape)`
    recovers h.
    """
    h = _as_matrix(h)
    norm = frob(h)
    if norm == 0.0:
        raise ValueError("cannot normalize a zero matrix")
    return np.ravel(h, order="F") / norm, norm


def unvec(v, rows, cols):
    """Inverse of column-stacked vectorization."""
    v = np.asarray(v, dtype=complex)
    if v.size != rows * cols:
        raise ValueError(f"vector of length {v.size} cannot fill {rows}x{cols}")
    return np.reshape(v, (rows, cols), order="F")
