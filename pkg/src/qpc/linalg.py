"""Dense Hermitian linear algebra used throughout the package.

Complex Hermitian problems are mapped onto real symmetric ones through the
embedding ``H = A + iB  ->  [[A, -B], [B, A]]``.  The embedding doubles every
eigenvalue's multiplicity and sends the complex eigenvector ``u + iv`` to the
real pair ``[u; v]`` and ``[-v; u]``.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9
NORM_TOL = 1e-12
RANK_RTOL = 1e-8


def real_embedding(h: np.ndarray) -> np.ndarray:
    """Return the real symmetric ``2d x 2d`` embedding of a Hermitian matrix.

    Works on stacks: the last two axes are the matrix axes.
    """
    h = np.asarray(h)
    a = h.real
    b = h.imag
    top = np.concatenate([a, -b], axis=-1)
    bottom = np.concatenate([b, a], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def real_unembedding(s: np.ndarray) -> np.ndarray:
    """Inverse of :func:`real_embedding` (averages the redundant blocks)."""
    s = np.asarray(s, dtype=float)
    n = s.shape[-1] // 2
    a = 0.5 * (s[..., :n, :n] + s[..., n:, n:])
    b = 0.5 * (s[..., n:, :n] - s[..., :n, n:])
    return a + 1j * b


def hermitize(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    return 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))


def hermitian_defect(m: np.ndarray) -> float:
    """Largest entrywise ``|M - M^dagger|``."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - np.conj(m.T))))


def eigvalsh(h: np.ndarray) -> np.ndarray:
    """Eigenvalues (ascending) of a Hermitian matrix via the real embedding."""
    h = np.asarray(h)
    if not np.iscomplexobj(h):
        return np.linalg.eigvalsh(hermitize(h))
    w = np.linalg.eigvalsh(real_embedding(hermitize(h)))
    # each eigenvalue appears twice, adjacent after sorting
    return 0.5 * (w[0::2] + w[1::2])


def eigh(h: np.ndarray, cluster_tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix via the real embedding.

    Returns ascending eigenvalues ``w`` and a unitary ``V`` with
    ``h = V diag(w) V^dagger``.  Degenerate clusters are re-orthonormalised in
    the complex space, because the embedded solver may return any real rotation
    of the doubled eigenspace.
    """
    h = hermitize(np.asarray(h))
    if not np.iscomplexobj(h):
        return np.linalg.eigh(h)
    n = h.shape[0]
    w2, v2 = np.linalg.eigh(real_embedding(h))
    z = v2[:n, :] + 1j * v2[n:, :]
    scale = max(1.0, float(np.max(np.abs(w2))) if n else 1.0)
    values = []
    vectors = []
    start = 0
    while start < 2 * n:
        stop = start + 1
        while stop < 2 * n and w2[stop] - w2[stop - 1] <= cluster_tol * scale:
            stop += 1
        size = stop - start
        k = size // 2
        if size % 2:
            # a split pair: absorb the next eigenvalue into the cluster
            stop += 1
            size += 1
            k = size // 2
        block = z[:, start:stop]
        u, _, _ = np.linalg.svd(block, full_matrices=False)
        vectors.append(u[:, :k])
        values.extend([float(np.mean(w2[start:stop]))] * k)
        start = stop
    return np.asarray(values), np.concatenate(vectors, axis=1)


def min_eig(h: np.ndarray) -> float:
    h = np.asarray(h)
    if h.size == 0:
        return 0.0
    return float(eigvalsh(h)[0])


def is_psd(h: np.ndarray, tol: float = PSD_TOL) -> bool:
    return min_eig(h) >= -tol


def psd_sqrt(h: np.ndarray) -> np.ndarray:
    """Principal square root of a PSD matrix (negative eigenvalues clipped)."""
    w, v = eigh(h)
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ np.conj(v.T)


def project_psd(h: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues to zero."""
    w, v = eigh(h)
    w = np.clip(w, 0.0, None)
    return hermitize((v * w) @ np.conj(v.T))


def numerical_rank(m: np.ndarray, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(np.asarray(m), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))
