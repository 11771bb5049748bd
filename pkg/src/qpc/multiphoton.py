"""Pair sources, chained fusion, GHZ fidelities, composition criteria and the GHZ witness.

Qubit wiring for the six-photon chain: the register is ordered
``[1', 2', 3', 4, 5', 6]`` so the pairs occupy qubits (0,1), (2,3), (4,5).
Unit i fuses photons 1' and 3' (qubits 0, 2); unit ii fuses 2' and 5'
(qubits 1, 4).  With ideal units and three ``psi-`` pairs the output is
proportional to ``|HVHVVH> - |VHVHHV>``, i.e. the GHZ target with phase -1.
"""

from __future__ import annotations

import functools
import itertools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from . import linalg
from .capability import decompose
from .errors import ValidationError
from .quantum import (
    ProcMat,
    PureState,
    QState,
    bell_state,
    embed_pair_process,
    ghz_state,
    ket,
    min_pt_eig,
    partial_transpose,
    projector,
    state_fidelity_pure,
    uhlmann_fidelity,
)

MAX_QUBITS = 10
ENTANGLEMENT_THRESHOLD = 0.5
STEERING_THRESHOLD = (1.0 + math.sqrt(3.0)) / 4.0

SIX_PHOTON_WIRING = ((0, 2), (1, 4))
FOUR_PHOTON_WIRING = ((0, 2),)
SIX_PHOTON_PATTERN = "HVHVVH"
FOUR_PHOTON_PATTERN = "HVHV"


# -- Werner pairs ----------------------------------------------------------------

@dataclass(frozen=True)
class WernerPair:
    p_white: float
    p_deph: float

    def __post_init__(self):
        if not (0.0 <= self.p_white <= 1.0 and 0.0 <= self.p_deph <= 1.0):
            raise ValidationError("noise weights must lie in [0, 1]")
        if self.p_white + self.p_deph > 1.0 + 1e-12:
            raise ValidationError("p_white + p_deph must not exceed 1")

    def state(self) -> QState:
        return werner_state(self.p_white, self.p_deph)


def _werner_matrix(p_white, p_deph):
    pw = np.asarray(p_white, dtype=float)[..., None, None]
    pd = np.asarray(p_deph, dtype=float)[..., None, None]
    psi = bell_state("psi-").density().matrix
    deph = 0.5 * (projector(ket("01")) + projector(ket("10")))
    return pw * np.eye(4) / 4.0 + pd * deph + (1.0 - pw - pd) * psi


def werner_state(p_white: float, p_deph: float) -> QState:
    """``p_white I/4 + p_deph/2 (|HV><HV| + |VH><VH|) + rest |psi-><psi-|``."""
    WernerPair(p_white, p_deph)
    return QState(_werner_matrix(p_white, p_deph), f"werner({p_white:g},{p_deph:g})")


@dataclass(frozen=True)
class WernerFit:
    pair: WernerPair
    fidelity: float


def _batched_fidelity(sqrt_rho: np.ndarray, sigmas: np.ndarray) -> np.ndarray:
    inner = sqrt_rho @ sigmas @ sqrt_rho
    inner = 0.5 * (inner + np.conj(np.swapaxes(inner, -1, -2)))
    w = np.linalg.eigvalsh(inner)
    return np.sum(np.sqrt(np.clip(w, 0.0, None)), axis=-1)


def fit_werner(rho_expt, grid: int = 101) -> WernerFit:
    """Best Uhlmann fidelity over the Werner simplex: grid search then Nelder-Mead."""
    m = rho_expt.matrix if isinstance(rho_expt, QState) else np.asarray(rho_expt, dtype=complex)
    if m.shape != (4, 4):
        raise ValidationError("Werner fit needs a two-qubit state")
    m = m / np.trace(m).real
    sq = linalg.psd_sqrt(m)
    axis = np.linspace(0.0, 1.0, grid)
    pw, pd = np.meshgrid(axis, axis, indexing="ij")
    keep = pw + pd <= 1.0 + 1e-12
    pw, pd = pw[keep], np.minimum(pd[keep], 1.0 - pw[keep])
    f = _batched_fidelity(sq, _werner_matrix(pw, pd))
    best = float(f.max())
    # ties: smallest p_white, then smallest p_deph
    cand = np.flatnonzero(f >= best - 1e-12)
    k = cand[np.lexsort((pd[cand], pw[cand]))[0]]
    x0 = np.array([pw[k], pd[k]])

    def neg(x):
        a, b = x
        if a < 0 or b < 0 or a + b > 1:
            return 1.0 + (max(0, -a) + max(0, -b) + max(0, a + b - 1))
        return -float(_batched_fidelity(sq, _werner_matrix(a, b)))

    res = scipy.optimize.minimize(neg, x0, method="Nelder-Mead",
                                  options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000,
                                           "initial_simplex": [x0, x0 + [2e-3, 0], x0 + [0, 2e-3]]})
    if -res.fun > best + 1e-13:
        a, b = float(res.x[0]), float(res.x[1])
        best = float(-res.fun)
    else:
        a, b = float(x0[0]), float(x0[1])
    a, b = max(0.0, a), max(0.0, b)
    b = min(b, 1.0 - a)
    return WernerFit(WernerPair(a, b), min(1.0, best))


# -- chains ----------------------------------------------------------------------

@dataclass(frozen=True)
class FusionChain:
    """Pair states fused by two-qubit units acting on fixed register slots."""

    units: tuple[tuple[ProcMat, tuple[int, int]], ...]
    pairs: tuple[QState, ...]
    target: PureState | None = None

    def __post_init__(self):
        n = self.n_qubits
        if n > MAX_QUBITS:
            raise ValidationError(f"chains are limited to {MAX_QUBITS} qubits, got {n}")
        for p in self.pairs:
            if p.dim != 4:
                raise ValidationError("each pair state must be a two-qubit state")
        for chi, (i, j) in self.units:
            if not isinstance(chi, ProcMat):
                raise ValidationError("units must be ProcMat instances")
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ValidationError(f"unit qubits {(i, j)} invalid for {n} qubits")
        if self.target is not None and self.target.dim != 2**n:
            raise ValidationError("target dimension does not match the register")

    @property
    def n_qubits(self) -> int:
        return 2 * len(self.pairs)

    def input_state(self) -> np.ndarray:
        return functools.reduce(np.kron, [p.matrix for p in self.pairs])

    def with_units(self, chis: Sequence[ProcMat]) -> FusionChain:
        return FusionChain(tuple((c, q) for c, (_, q) in zip(chis, self.units)), self.pairs, self.target)


def chain_output(chain: FusionChain) -> QState:
    """Unnormalised output; trace is the joint post-selection probability."""
    rho = chain.input_state()
    n = chain.n_qubits
    for chi, qubits in chain.units:
        rho = embed_pair_process(chi, qubits, n)(rho)
    return QState(linalg.hermitize(rho), check_trace=False)


def six_photon_chain(unit_i: ProcMat, unit_ii: ProcMat, pairs: Sequence[QState] | None = None) -> FusionChain:
    if pairs is None:
        pairs = [bell_state("psi-").density()] * 3
    return FusionChain(((unit_i, SIX_PHOTON_WIRING[0]), (unit_ii, SIX_PHOTON_WIRING[1])), tuple(pairs),
                       ghz_state(SIX_PHOTON_PATTERN, -1))


def four_photon_chain(unit: ProcMat, pairs: Sequence[QState] | None = None) -> FusionChain:
    if pairs is None:
        pairs = [bell_state("psi-").density()] * 2
    return FusionChain(((unit, FOUR_PHOTON_WIRING[0]),), tuple(pairs), ghz_state(FOUR_PHOTON_PATTERN, +1))


def ghz_fidelity(rho, pattern: str, phase: int = +1) -> float:
    """Fidelity of the normalised state with ``(|pattern> + phase |complement>)/sqrt 2``."""
    m = rho.matrix if isinstance(rho, QState) else np.asarray(rho, dtype=complex)
    tr = np.trace(m).real
    if tr <= 0:
        raise ValidationError("state has zero trace")
    return state_fidelity_pure(m / tr, ghz_state(pattern, phase))


def biseparable_cut_min_eig(rho, qubits: Sequence[int]) -> float:
    """Minimum eigenvalue of the partial transpose over ``qubits``."""
    m = rho.matrix if isinstance(rho, QState) else np.asarray(rho)
    return min_pt_eig(m, list(qubits))


# -- composition criteria -----------------------------------------------------------

def thresholds(n: int, kind: str = "entanglement") -> float:
    """GHZ-fidelity threshold for genuine N-photon entanglement or steering."""
    if int(n) != n or n < 2:
        raise ValidationError("N must be an integer >= 2")
    if kind in ("entanglement", "ent", "sep"):
        return ENTANGLEMENT_THRESHOLD
    if kind in ("steering", "pre"):
        return STEERING_THRESHOLD
    raise ValidationError(f"unknown threshold kind {kind!r}")


@dataclass(frozen=True)
class CriterionReport:
    lhs: float
    rhs: float
    verdict: bool
    alphas: tuple[float, ...]
    tr_out: float
    tr_c: float
    f_sep: float
    f_c: float
    threshold: float

    def to_dict(self) -> dict:
        return {"schema": "qpc/1", "kind": "criterion_report", "lhs": self.lhs, "rhs": self.rhs,
                "verdict": self.verdict, "alphas": list(self.alphas),
                "constituents": {"tr_out": self.tr_out, "tr_c": self.tr_c, "f_sep": self.f_sep,
                                 "f_c": self.f_c, "threshold": self.threshold}}


def composition_criterion(alphas: Sequence[float], tr_out: float, tr_c: float, f_sep: float,
                          f_c: float, threshold: float) -> CriterionReport:
    """Compare the product of compositions with the fidelity-derived bound."""
    alphas = tuple(float(a) for a in alphas)
    if not alphas:
        raise ValidationError("need at least one composition value")
    if any(not 0.0 <= a <= 1.0 for a in alphas):
        raise ValidationError("compositions must lie in [0, 1]")
    if tr_out <= 0 or tr_c <= 0:
        raise ValidationError("traces must be positive")
    if f_c <= f_sep:
        raise ValidationError("capable-part fidelity must exceed the separable-part fidelity")
    lhs = float(np.prod(alphas))
    rhs = tr_out * (threshold - f_sep) / (tr_c * (f_c - f_sep))
    return CriterionReport(lhs, float(rhs), bool(lhs > rhs), alphas, float(tr_out), float(tr_c),
                           float(f_sep), float(f_c), float(threshold))


@dataclass(frozen=True)
class ChainExpansion:
    alphas: tuple[float, ...]
    rho_out: np.ndarray
    rho_c: np.ndarray
    rho_sep: np.ndarray
    terms: dict = field(repr=False)


def expand_chain(chain: FusionChain, splits: Sequence[tuple[float, ProcMat, ProcMat]]) -> ChainExpansion:
    """Term-by-term expansion over capable/incapable parts of every unit.

    ``rho_c`` is the all-capable term without its weight; ``rho_sep`` collects the rest.
    """
    if len(splits) != len(chain.units):
        raise ValidationError("one split per unit is required")
    terms = {}
    for choice in itertools.product((0, 1), repeat=len(splits)):
        weight = 1.0
        chis = []
        for pick, (a, chi_c, chi_i) in zip(choice, splits):
            weight *= a if pick == 0 else (1.0 - a)
            chis.append(chi_c if pick == 0 else chi_i)
        if weight == 0.0:
            terms[choice] = (0.0, np.zeros((2**chain.n_qubits,) * 2, dtype=complex))
            continue
        terms[choice] = (weight, chain_output(chain.with_units(chis)).matrix)
    all_c = tuple(0 for _ in splits)
    rho_c = terms[all_c][1]
    rho_sep = sum(w * m for key, (w, m) in terms.items() if key != all_c)
    if isinstance(rho_sep, int):
        rho_sep = np.zeros_like(rho_c)
    rho_out = terms[all_c][0] * rho_c + rho_sep
    alphas = tuple(s[0] for s in splits)
    return ChainExpansion(alphas, rho_out, rho_c, rho_sep, terms)


def criterion_from_chain(chain: FusionChain, threshold: float, kind="creation",
                         splits: Sequence[tuple[float, ProcMat, ProcMat]] | None = None) -> CriterionReport:
    """Composition criterion with every constituent computed from decompositions."""
    if chain.target is None:
        raise ValidationError("chain needs a target state")
    if splits is None:
        splits = [decompose(chi.normalize() if not chi.normalized else chi, kind) for chi, _ in chain.units]
    exp = expand_chain(chain, splits)
    tr_out = float(np.trace(exp.rho_out).real)
    tr_c = float(np.trace(exp.rho_c).real)
    f_c = state_fidelity_pure(exp.rho_c / tr_c, chain.target)
    tr_sep = float(np.trace(exp.rho_sep).real)
    f_sep = state_fidelity_pure(exp.rho_sep / tr_sep, chain.target) if tr_sep > 0 else 0.0
    return composition_criterion(exp.alphas, tr_out, tr_c, f_sep, f_c, threshold)


# -- GHZ witness -------------------------------------------------------------------

def _pattern_signs(pattern: str) -> np.ndarray:
    pattern = pattern.translate(str.maketrans("01", "HV"))
    if any(ch not in "HV" for ch in pattern):
        raise ValidationError(f"pattern {pattern!r} must use H/V")
    return np.array([1 if ch == "H" else -1 for ch in pattern])


@dataclass(frozen=True)
class GhzWitness:
    """``3 - 2[(S_1 + 1)/2 + prod_k (S_k + 1)/2]`` adapted to a GHZ pattern and phase.

    ``S_1 = phase X^(x)N``; ``S_k = s_{k-1} s_k Z_{k-1} Z_k`` with ``s`` = +1 for H
    and -1 for V in the pattern.
    """

    pattern: str
    phase: int = +1

    @property
    def n(self) -> int:
        return len(self.pattern)

    def _z_projector_diag(self) -> np.ndarray:
        """Diagonal of prod_k (S_k + 1)/2: the span of the pattern and its complement."""
        diag = np.zeros(2**self.n)
        comp = self.pattern.translate(str.maketrans("HV", "VH"))
        for lab in (self.pattern, comp):
            idx = int(lab.translate(str.maketrans("HV", "01")), 2)
            diag[idx] = 1.0
        return diag

    def operator(self) -> np.ndarray:
        n = self.n
        x = functools.reduce(np.kron, [np.array([[0, 1], [1, 0]])] * n).astype(complex)
        s1 = self.phase * x
        p = np.diag(self._z_projector_diag()).astype(complex)
        eye = np.eye(2**n)
        return 3.0 * eye - 2.0 * ((s1 + eye) / 2.0 + p)

    def evaluate(self, rho) -> float:
        m = rho.matrix if isinstance(rho, QState) else np.asarray(rho, dtype=complex)
        tr = np.trace(m).real
        return float(np.real(np.trace(self.operator() @ m)) / tr)

    def from_expectations(self, x_expectation: float, z_population: float) -> float:
        """``<W>`` from ``<X^(x)N>`` and the Z-basis weight on the two GHZ strings."""
        return 3.0 - 2.0 * ((self.phase * x_expectation + 1.0) / 2.0 + z_population)


def witness_ghz(n: int, sign_pattern: str, phase: int = +1) -> GhzWitness:
    if len(sign_pattern) != n:
        raise ValidationError("pattern length must equal N")
    if n > MAX_QUBITS or n < 2:
        raise ValidationError(f"N must lie in [2, {MAX_QUBITS}]")
    _pattern_signs(sign_pattern)
    return GhzWitness(sign_pattern.translate(str.maketrans("01", "HV")), int(np.sign(phase)))


def witness_from_counts(x_counts: Mapping[str, float], z_counts: Mapping[str, float],
                        pattern: str = SIX_PHOTON_PATTERN, phase: int = +1) -> tuple[float, float]:
    """``<W>`` and its Poisson uncertainty from X^(x)N and Z^(x)N outcome histograms.

    X outcomes use ``+``/``-`` strings, Z outcomes ``H``/``V`` strings.
    """
    w = witness_ghz(len(pattern), pattern, phase)
    n = w.n
    xs = [(k, float(v)) for k, v in x_counts.items()]
    zs = [(k, float(v)) for k, v in z_counts.items()]
    for k, v in xs:
        if len(k) != n or any(ch not in "+-" for ch in k) or v < 0:
            raise ValidationError(f"bad X-basis entry {k!r}: {v}")
    for k, v in zs:
        kk = k.translate(str.maketrans("01", "HV"))
        if len(kk) != n or any(ch not in "HV" for ch in kk) or v < 0:
            raise ValidationError(f"bad Z-basis entry {k!r}: {v}")
    nx = sum(v for _, v in xs)
    nz = sum(v for _, v in zs)
    if nx <= 0 or nz <= 0:
        raise ValidationError("both settings need at least one count")
    parity = np.array([(-1) ** k.count("-") for k, _ in xs], dtype=float)
    cx = np.array([v for _, v in xs])
    ex = float(parity @ cx / nx)
    comp = w.pattern.translate(str.maketrans("HV", "VH"))
    good = np.array([k.translate(str.maketrans("01", "HV")) in (w.pattern, comp) for k, _ in zs], dtype=float)
    cz = np.array([v for _, v in zs])
    pz = float(good @ cz / nz)
    value = w.from_expectations(ex, pz)
    # dW/dS1 = -phase, dW/dPz = -2
    var_x = float(np.sum((parity - ex) ** 2 * cx)) / nx**2
    var_z = float(np.sum((good - pz) ** 2 * cz)) / nz**2
    return value, float(np.sqrt(var_x + 4.0 * var_z))


def witness_counts_from_state(rho, n_counts: int, rng: np.random.Generator,
                              pattern: str = SIX_PHOTON_PATTERN) -> tuple[dict, dict]:
    """Poisson-sampled X^(x)N and Z^(x)N histograms for a state (simulation helper)."""
    m = rho.matrix if isinstance(rho, QState) else np.asarray(rho, dtype=complex)
    m = m / np.trace(m).real
    n = len(pattern)
    h = functools.reduce(np.kron, [np.array([[1, 1], [1, -1]]) / math.sqrt(2)] * n)
    px = np.clip(np.real(np.diag(h @ m @ h)), 0.0, None)
    pz = np.clip(np.real(np.diag(m)), 0.0, None)
    x_draw = rng.poisson(n_counts * px)
    z_draw = rng.poisson(n_counts * pz)
    labels = ["".join(bits) for bits in itertools.product("01", repeat=n)]
    x_counts = {lab.translate(str.maketrans("01", "+-")): int(c) for lab, c in zip(labels, x_draw)}
    z_counts = {lab.translate(str.maketrans("01", "HV")): int(c) for lab, c in zip(labels, z_draw)}
    return x_counts, z_counts


def werner_record_metadata() -> dict:
    """Reference values quoted for the experiment, kept only as metadata."""
    return {"x_expectation": 0.4745, "z_expectation": 0.6047, "witness": -0.0801, "witness_err": 0.037,
            "pair_fidelities": [0.9716, 0.9744, 0.9677], "six_photon_fidelity": 0.5755}


__all__ = [
    "ChainExpansion", "CriterionReport", "FusionChain", "GhzWitness", "WernerFit", "WernerPair",
    "chain_output", "composition_criterion", "criterion_from_chain", "expand_chain", "fit_werner",
    "four_photon_chain", "ghz_fidelity", "six_photon_chain", "thresholds", "werner_state",
    "witness_counts_from_state", "witness_from_counts", "witness_ghz", "partial_transpose",
    "uhlmann_fidelity", "biseparable_cut_min_eig",
]
