"""Entanglement creation and preservation capabilities of two-qubit processes.

A process is *incapable of creating* entanglement when every separable input
leaves it separable, and *incapable of preserving* entanglement when every
input leaves it separable.  Both cones are realised with PPT conditions on
the outputs of a finite input list:

* creation: the 36 products of single-qubit Pauli eigenstates
  ``{0, 1, +, -, R, L}``.  These contain the 16 tomography inputs; the
  other 20 fix the outputs of the complementary resolutions of the identity
  (``|-><-|`` is ``I - |+><+|``), so those outputs must be separable whichever
  basis the identity is split in.
* preservation: everything above plus the entangled inputs
  ``phi+, phi+i, psi+, psi+i``.  The preservation cone is therefore a
  subset of the creation cone.
"""

from __future__ import annotations

import enum
import functools
import logging
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import SolverError, ValidationError
from .quantum import (
    ProcMat,
    bell_state,
    chi_tensor,
    depolarizing_process,
    fusion_ideal,
    ket,
    procmat_to_dict,
    projector,
)
from .sdp import Affine, SdpProblem, SdpSolution, solve

log = logging.getLogger(__name__)

CONSTRAINT_SET_VERSION = "qpc-incapable/1"
AUDIT_SAMPLES = 200
DEGENERATE_ALPHA = 1e-8


class CapabilityKind(str, enum.Enum):
    creation = "creation"
    preservation = "preservation"

    @classmethod
    def parse(cls, value) -> CapabilityKind:
        if isinstance(value, cls):
            return value
        aliases = {"cre": cls.creation, "creation": cls.creation,
                   "pre": cls.preservation, "preservation": cls.preservation}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValidationError(f"unknown capability kind {value!r}") from None

    @property
    def short(self) -> str:
        return "cre" if self is CapabilityKind.creation else "pre"


PAULI_EIGEN_LABELS = tuple(a + b for a in "01+-RL" for b in "01+-RL")
PRESERVATION_ENTANGLED = ("phi+", "phi+i", "psi+", "psi+i")


def batched_pt(m: np.ndarray) -> np.ndarray:
    """Partial transpose on the second qubit of a stack of 4x4 matrices."""
    m = np.asarray(m)
    t = m.reshape(m.shape[:-2] + (2, 2, 2, 2))
    return np.swapaxes(t, -1, -3).reshape(m.shape)


def outputs_for_inputs(chi: np.ndarray, rhos: np.ndarray) -> np.ndarray:
    """Images of a stack of inputs; broadcasts over leading axes of ``chi``.

    Returns shape ``chi.shape[:-2] + (k, 4, 4)``.
    """
    chi = np.asarray(chi)
    r = np.asarray(rhos).reshape(-1, 2, 2, 2, 2)
    out = np.einsum("...aibjckdl,nijkl->...nabcd", chi_tensor(chi), r)
    return out.reshape(chi.shape[:-2] + (r.shape[0], 4, 4))


@dataclass(frozen=True)
class IncapableConstraintSet:
    kind: CapabilityKind
    labels: tuple[str, ...]
    inputs: np.ndarray = field(repr=False)

    @property
    def version(self) -> str:
        return f"{CONSTRAINT_SET_VERSION}/{self.kind.short}"

    @property
    def ppt_inputs(self) -> tuple[str, ...]:
        return self.labels

    def output_pts(self, chi: np.ndarray) -> np.ndarray:
        return batched_pt(outputs_for_inputs(chi, self.inputs))

    def violation(self, chi: np.ndarray) -> float:
        """Largest negative eigenvalue over chi and every constrained output PT."""
        chi = np.asarray(chi)
        worst = max(0.0, -linalg.min_eig(chi))
        for m in self.output_pts(chi):
            worst = max(worst, -linalg.min_eig(m))
        return worst


@functools.lru_cache(maxsize=None)
def constraint_set(kind) -> IncapableConstraintSet:
    kind = CapabilityKind.parse(kind)
    labels = list(PAULI_EIGEN_LABELS)
    mats = [projector(ket(lab)) for lab in labels]
    if kind is CapabilityKind.preservation:
        for lab in PRESERVATION_ENTANGLED:
            labels.append(lab)
            mats.append(bell_state(lab).density().matrix)
    arr = np.array(mats)
    arr.setflags(write=False)
    return IncapableConstraintSet(kind, tuple(labels), arr)


def _pt_blocks(x: Affine, inputs: np.ndarray) -> list[Affine]:
    """One affine 4x4 expression per input: PT of the output of ``x``."""
    def fn(m):
        return batched_pt(outputs_for_inputs(m, inputs))

    const = fn(x.const)
    terms = {v: fn(c) for v, c in x.terms.items()}
    return [Affine(const[k], {v: c[:, k] for v, c in terms.items()}) for k in range(inputs.shape[0])]


def add_incapable_constraints(prob: SdpProblem, x: Affine, kind, prefix: str = "",
                              include_psd: bool = True) -> None:
    """Require the 16x16 expression ``x`` to lie in the incapable cone of ``kind``.

    ``include_psd=False`` skips ``x >= 0`` for callers that impose it on a face parametrisation.
    """
    cs = constraint_set(kind)
    if include_psd:
        prob.add_psd(x, name=f"{prefix}chi_I")
    for lab, block in zip(cs.labels, _pt_blocks(x, cs.inputs)):
        prob.add_psd(block, name=f"{prefix}PT[{lab}]")


def _check_input(chi) -> ProcMat:
    if not isinstance(chi, ProcMat):
        chi = ProcMat(chi, normalized=True)
    if not chi.normalized:
        raise ValidationError("capability measures need a normalised process matrix")
    return chi


def _require(sol: SdpSolution, what: str) -> SdpSolution:
    if not sol.optimal:
        raise SolverError(f"{what}: solver status {sol.status} (gap {sol.duality_gap:.3g}, "
                          f"violation {sol.max_violation:.3g})", sol)
    return sol


FACE_RTOL = 1e-9


def _face(chi: ProcMat) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs spanning the numerical range of ``chi``."""
    w, v = np.linalg.eigh(linalg.hermitize(chi.matrix))
    keep = w > FACE_RTOL * max(float(w[-1]), linalg.NORM_TOL)
    return w[keep], v[:, keep]


def alpha_problem(chi: ProcMat, kind) -> tuple[SdpProblem, Affine]:
    """Composition SDP; ``chi_I`` is restricted to the range of ``chi``.

    Any ``chi_I <= chi`` lives on that range, so the parametrisation removes the flat
    directions that leave a rank-deficient ``chi`` without a strictly feasible point, and
    the eigenvalue scaling keeps tiny-but-kept directions well conditioned.
    """
    prob = SdpProblem()
    w, v = _face(chi)
    if len(w) == 16:
        x = prob.variable("chi_I", 16)
        add_incapable_constraints(prob, x, kind)
        prob.add_psd(chi.matrix - x, name="chi_expt-chi_I")
    else:
        # chi_I = V D^1/2 Z D^1/2 V^+ with D the kept eigenvalues: chi - chi_I >= 0 becomes Z <= I
        z = prob.variable("chi_I_face", len(w))
        basis = v * np.sqrt(w)
        bh = basis.conj().T
        x = z.map(lambda m: basis @ m @ bh)
        prob.add_psd(z, name="chi_I")
        add_incapable_constraints(prob, x, kind, include_psd=False)
        prob.add_psd(np.eye(len(w)) - z, name="chi_expt-chi_I")
    prob.minimize(1.0 - x.trace())
    return prob, x


def beta_problem(chi: ProcMat, kind) -> SdpProblem:
    prob = SdpProblem()
    x = prob.variable("chi_I", 16)
    add_incapable_constraints(prob, x, kind)
    prob.add_psd(x - chi.matrix, name="chi_I-chi_expt")
    prob.minimize(x.trace() - 1.0)
    return prob


@dataclass(frozen=True)
class AlphaResult:
    alpha: float
    chi_incapable_unnormalized: np.ndarray = field(repr=False)
    solution: SdpSolution = field(repr=False)


def alpha(chi_expt, kind="creation", tol: float = 1e-7) -> AlphaResult:
    """Minimum weight of a capable component in any capable/incapable split."""
    chi = _check_input(chi_expt)
    prob, x = alpha_problem(chi, kind)
    sol = _require(solve(prob, tol=tol), f"alpha_{CapabilityKind.parse(kind).short}")
    a = float(np.clip(sol.value, 0.0, 1.0))
    return AlphaResult(a, linalg.hermitize(x.value(sol.assignments)), sol)


def beta(chi_expt, kind="creation", tol: float = 1e-7) -> float:
    """Minimum noise weight that makes the process incapable."""
    return beta_full(chi_expt, kind, tol)[0]


def beta_full(chi_expt, kind="creation", tol: float = 1e-7) -> tuple[float, SdpSolution]:
    chi = _check_input(chi_expt)
    sol = _require(solve(beta_problem(chi, kind), tol=tol), f"beta_{CapabilityKind.parse(kind).short}")
    return max(0.0, float(sol.value)), sol


@functools.lru_cache(maxsize=None)
def _threshold(kind: CapabilityKind, tol: float) -> tuple[float, np.ndarray]:
    prob = SdpProblem()
    x = prob.variable("chi_I", 16)
    add_incapable_constraints(prob, x, kind)
    prob.add_eq(x.trace(), 1.0, name="trace")
    prob.maximize(x.inner(fusion_ideal(normalized=True).matrix))
    sol = _require(solve(prob, tol=tol), f"F_I,{kind.short}")
    return float(sol.value), sol.assignments["chi_I"]


def fidelity_threshold(kind="creation", tol: float = 1e-7) -> float:
    """Largest fidelity with ideal fusion reachable by an incapable process."""
    return _threshold(CapabilityKind.parse(kind), tol)[0]


def split_from_incapable(chi: ProcMat, x: np.ndarray) -> tuple[float, ProcMat, ProcMat]:
    """Turn an unnormalised incapable part into (alpha, chi_C, chi_I)."""
    x_psd = linalg.project_psd(x)
    tr_i = float(np.trace(x_psd).real)
    a = float(np.clip(1.0 - tr_i, 0.0, 1.0))
    if a <= DEGENERATE_ALPHA:
        return 0.0, chi, chi
    if tr_i <= DEGENERATE_ALPHA:
        # fully capable: the incapable part carries no weight
        return 1.0, chi, depolarizing_process(normalized=True)
    chi_i = x_psd / tr_i
    rest = linalg.project_psd(chi.matrix - (1.0 - a) * chi_i)
    chi_c = rest / np.trace(rest).real
    return a, ProcMat(chi_c, normalized=True), ProcMat(chi_i, normalized=True)


def decompose(chi_expt, kind="creation", tol: float = 1e-7) -> tuple[float, ProcMat, ProcMat]:
    """``chi_expt = alpha chi_C + (1 - alpha) chi_I`` with minimal alpha."""
    chi = _check_input(chi_expt)
    res = alpha(chi, kind, tol)
    a, chi_c, chi_i = split_from_incapable(chi, res.chi_incapable_unnormalized)
    if res.alpha <= DEGENERATE_ALPHA:
        a = 0.0
    return a, chi_c, chi_i


def alpha_pre_prime(chi_expt, tol: float = 1e-7) -> float:
    """Share of the process that preserves but cannot create entanglement."""
    a_pre = alpha(chi_expt, "preservation", tol).alpha
    a_cre = alpha(chi_expt, "creation", tol).alpha
    diff = a_pre - a_cre
    if diff < -1e-5:
        log.warning("alpha_pre - alpha_cre = %.3g is negative beyond solver noise; clipping", diff)
    return max(0.0, diff)


def audit(chi_i: np.ndarray | ProcMat, samples: int = AUDIT_SAMPLES, seed: int = 0) -> float:
    """Worst output-PT eigenvalue of ``chi_i`` over random pure product inputs."""
    mat = chi_i.matrix if isinstance(chi_i, ProcMat) else np.asarray(chi_i)
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(samples, 2, 2)) + 1j * rng.normal(size=(samples, 2, 2))
    z /= np.linalg.norm(z, axis=-1, keepdims=True)
    kets = np.einsum("ni,nj->nij", z[:, 0], z[:, 1]).reshape(samples, 4)
    rhos = np.einsum("ni,nj->nij", kets, kets.conj())
    pts = batched_pt(outputs_for_inputs(mat, rhos))
    return float(min(linalg.min_eig(m) for m in pts))


@dataclass
class CapabilityReport:
    kind: CapabilityKind
    alpha: float
    beta: float
    f_expt: float
    f_threshold: float
    chi_capable: ProcMat
    chi_incapable: ProcMat
    solver_certificates: dict = field(default_factory=dict)
    constraint_set: str = ""
    audit_min_pt_eig: float | None = None

    @property
    def fidelity_certifies(self) -> bool:
        return self.f_expt > self.f_threshold

    def to_dict(self, include_matrices: bool = True) -> dict:
        d = {"schema": "qpc/1", "kind": "capability_report", "capability": self.kind.value,
             "constraint_set": self.constraint_set, "alpha": self.alpha, "beta": self.beta,
             "f_expt": self.f_expt, "f_threshold": self.f_threshold,
             "fidelity_certifies": self.fidelity_certifies,
             "solver_certificates": self.solver_certificates}
        if self.audit_min_pt_eig is not None:
            d["audit_min_pt_eig"] = self.audit_min_pt_eig
        if include_matrices:
            d["chi_capable"] = procmat_to_dict(self.chi_capable)
            d["chi_incapable"] = procmat_to_dict(self.chi_incapable)
        return d


def capability_report(chi_expt, kind="creation", tol: float = 1e-7, audit_samples: int = 0,
                      seed: int = 0) -> CapabilityReport:
    kind = CapabilityKind.parse(kind)
    chi = _check_input(chi_expt)
    res = alpha(chi, kind, tol)
    a, chi_c, chi_i = split_from_incapable(chi, res.chi_incapable_unnormalized)
    if res.alpha <= DEGENERATE_ALPHA:
        a = 0.0
    b, bsol = beta_full(chi, kind, tol)
    f_expt = float(np.real(np.trace(chi.matrix @ fusion_ideal(normalized=True).matrix)))
    report = CapabilityReport(
        kind, a, b, f_expt, fidelity_threshold(kind, tol), chi_c, chi_i,
        {"alpha": res.solution.certificates(), "beta": bsol.certificates()},
        constraint_set(kind).version)
    if audit_samples:
        report.audit_min_pt_eig = audit(chi_i, audit_samples, seed)
    return report
