"""Process constructors shared by several test modules."""

import numpy as np

from qpc.quantum import (
    ProcMat,
    depolarizing_process,
    dephased_fusion,
    fusion_ideal,
    identity_process,
    unitary_process,
)


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def local_unitary_process(rng):
    u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
    return unitary_process(u, normalized=True)


def random_incapable(rng):
    """Convex mixture of creation-incapable processes (local unitaries, dephasing, noise)."""
    parts = [depolarizing_process(True), dephased_fusion(True), identity_process(True),
             local_unitary_process(rng), local_unitary_process(rng)]
    w = rng.dirichlet(np.ones(len(parts)))
    return ProcMat(sum(wi * p.matrix for wi, p in zip(w, parts)), normalized=True)


def fusion_mixture(lam, noise):
    noise_m = noise.matrix if isinstance(noise, ProcMat) else noise
    return ProcMat(lam * fusion_ideal(True).matrix + (1 - lam) * noise_m, normalized=True)
