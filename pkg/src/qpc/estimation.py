"""Capability estimates from the 40 probabilities behind the classical fidelities.

Given ``F_zz, F_xx, F_xy`` (or the 40 conditional probabilities themselves)
the smallest capability of any normalised process reproducing them is found
by one joint SDP over the process ``chi_SDP`` and its incapable part.

Each classical fidelity is the mean, over its inputs, of the success fraction
``good / total``.  That ratio is not linear in ``chi``; it is imposed in the
pooled form ``sum_i good_i(chi) = F * sum_i total_i(chi)``, exact whenever
the group's inputs succeed with equal probability (true for fusion-like
processes, whose post-selection probability is 1 for HH, VV and 1/2 for
every X/Y product input).

With ``f_lb_mode="equal"`` the fusion fidelity ``tr(chi_SDP chi_fusion)`` is
also fixed to F_LB.  That is only justified when errors conserve H/V; with an
accidental floor F_LB overshoots the true fidelity and the estimate can exceed
the full-tomography value, so the default leaves it free.  Count noise can put
F_LB outside the range any matching process attains; the target is then moved
just inside that range and the estimate is flagged.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field

import numpy as np

from .capability import CapabilityKind, add_incapable_constraints
from .errors import SolverError, ValidationError
from .quantum import ProcMat, apply_chi, fusion_ideal, ket, projector
from .sdp import SdpProblem, SdpSolution, hermitian_basis, solve
from .tomography import (
    CLASSICAL_GROUPS,
    CLASSICAL_PROBE_SET,
    OUTCOMES,
    ClassicalFidelities,
    f_lower_bound,
    fidelities_from_probabilities,
    measurement_projectors,
)

log = logging.getLogger(__name__)

N_PROBABILITIES = 40
# how the process fidelity to ideal fusion is tied to F_LB
F_LB_MODES = ("equal", "none")
# distance kept from the edge of the attainable fidelity range when clamping
CLAMP_MARGIN = 1e-6


@functools.lru_cache(maxsize=None)
def _functional(inp: str, basis: str, outcome: str | None) -> np.ndarray:
    """Hermitian C with ``tr(C chi)`` = probability of ``outcome`` (or the total if None)."""
    basis_mats = hermitian_basis(16)
    outs = apply_chi(basis_mats, projector(ket(inp)))
    if outcome is None:
        vals = np.real(np.einsum("qaa->q", outs))
    else:
        proj = measurement_projectors(basis)[OUTCOMES.index(outcome)]
        vals = np.real(np.einsum("ab,qba->q", proj, outs))
    c = np.tensordot(vals, basis_mats, axes=1)
    c.setflags(write=False)
    return c


def probability_terms() -> list[tuple[str, str, str]]:
    """The 40 (input, basis, outcome) events the estimate is built from."""
    terms = list(CLASSICAL_PROBE_SET)
    assert len(terms) == N_PROBABILITIES
    return terms


def fidelity_functionals(group: str) -> tuple[np.ndarray, np.ndarray, int]:
    """(good, total) Hermitian functionals for a fidelity group and its term count."""
    good = np.zeros((16, 16), dtype=complex)
    total = np.zeros((16, 16), dtype=complex)
    n = 0
    for inp, basis, good_set in CLASSICAL_GROUPS[group]:
        for o in OUTCOMES:
            n += 1
            c = _functional(inp, basis, o)
            total = total + c
            if o in good_set:
                good = good + c
    return good, total, n


@dataclass
class PartialDataEstimate:
    chi_sdp: ProcMat
    alpha_est: float
    beta_est: float
    f_lb: float
    kind: CapabilityKind
    error_band: tuple[float, float] | None = None
    beta_band: tuple[float, float] | None = None
    f_lb_err: float = 0.0
    n_probability_terms: int = N_PROBABILITIES
    flags: list[str] = field(default_factory=list)
    chi_sdp_beta: ProcMat | None = field(default=None, repr=False)
    certificates: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        from .quantum import procmat_to_dict

        d = {"schema": "qpc/1", "kind": "partial_data_estimate", "capability": self.kind.value,
             "alpha_est": self.alpha_est, "beta_est": self.beta_est, "f_lb": self.f_lb,
             "f_lb_err": self.f_lb_err, "n_probability_terms": self.n_probability_terms,
             "flags": list(self.flags), "solver_certificates": self.certificates,
             "chi_sdp": procmat_to_dict(self.chi_sdp)}
        if self.error_band is not None:
            d["error_band"] = list(self.error_band)
        if self.beta_band is not None:
            d["beta_band"] = list(self.beta_band)
        return d


def _data_constraints(prob: SdpProblem, chi, f: ClassicalFidelities, per_probability: bool) -> int:
    n_terms = 0
    if per_probability:
        if f.probabilities is None:
            raise ValidationError("per-probability estimation needs the 40 raw probabilities")
        for (inp, basis, o), p in zip(CLASSICAL_PROBE_SET, f.probabilities):
            n_terms += 1
            c = _functional(inp, basis, o) - p * _functional(inp, basis, None)
            prob.add_eq(chi.inner(c), 0.0, name=f"P[{inp}|{basis}|{o}]")
    else:
        for group, value in zip(("zz", "xx", "xy"), f.as_tuple()):
            good, total, n = fidelity_functionals(group)
            n_terms += n
            prob.add_eq(chi.inner(good - value * total), 0.0, name=f"F_{group}")
    if n_terms != N_PROBABILITIES:
        raise AssertionError(f"estimate built from {n_terms} probabilities, expected 40")
    return n_terms


def attainable_fidelity_range(f: ClassicalFidelities, per_probability: bool = False,
                              tol: float = 1e-7) -> tuple[float, float]:
    """Smallest and largest ``tr(chi chi_fusion)`` over normalised processes matching the data."""
    out = []
    for sense in ("min", "max"):
        prob = SdpProblem()
        chi = prob.variable("chi_sdp", 16)
        prob.add_psd(chi, name="chi_sdp")
        prob.add_eq(chi.trace(), 1.0, name="normalised")
        _data_constraints(prob, chi, f, per_probability)
        fid = chi.inner(fusion_ideal(normalized=True).matrix)
        prob.minimize(fid) if sense == "min" else prob.maximize(fid)
        sol = solve(prob, tol=tol)
        if sol.status == "infeasible":
            raise SolverError("no normalised process reproduces these classical fidelities", sol)
        if not sol.optimal:
            raise SolverError(f"fidelity range: solver status {sol.status}", sol)
        out.append(float(sol.value))
    return out[0], out[1]


def _build(f: ClassicalFidelities, kind, measure: str, per_probability: bool,
           f_lb_mode: str, f_lb_target: float | None = None) -> tuple[SdpProblem, int]:
    if f_lb_mode not in F_LB_MODES:
        raise ValidationError(f"f_lb_mode must be one of {F_LB_MODES}")
    prob = SdpProblem()
    chi = prob.variable("chi_sdp", 16)
    x = prob.variable("chi_I", 16)
    prob.add_psd(chi, name="chi_sdp")
    prob.add_eq(chi.trace(), 1.0, name="normalised")
    n_terms = _data_constraints(prob, chi, f, per_probability)
    if f_lb_mode == "equal":
        target = f_lower_bound(f) if f_lb_target is None else f_lb_target
        prob.add_eq(chi.inner(fusion_ideal(normalized=True).matrix), target, name="F_LB")
    add_incapable_constraints(prob, x, kind)
    if measure == "alpha":
        prob.add_psd(chi - x, name="chi_sdp-chi_I")
        prob.minimize(1.0 - x.trace())
    else:
        prob.add_psd(x - chi, name="chi_I-chi_sdp")
        prob.minimize(x.trace() - 1.0)
    return prob, n_terms


def _solve(f, kind, measure, per_probability, f_lb_mode, tol, target=None) -> SdpSolution:
    prob, _ = _build(f, kind, measure, per_probability, f_lb_mode, target)
    return solve(prob, tol=tol)


def _clamped_target(f, per_probability, tol, flags) -> float:
    """F_LB moved just inside the attainable range of the fusion fidelity."""
    lo, hi = attainable_fidelity_range(f, per_probability, tol)
    margin = min(CLAMP_MARGIN, 0.25 * (hi - lo))
    target = float(np.clip(f_lower_bound(f), lo + margin, hi - margin))
    flags.append(f"F_LB={f_lower_bound(f):.9g} not attainable (range [{lo:.9g}, {hi:.9g}]); "
                 f"fidelity fixed at {target:.9g}")
    log.warning(flags[-1])
    return target


def estimate_capability(f: ClassicalFidelities, kind="creation", tol: float = 1e-7,
                        per_probability: bool = False, f_lb_mode: str = "none") -> PartialDataEstimate:
    """Minimum alpha and beta over all processes consistent with the classical fidelities."""
    kind = CapabilityKind.parse(kind)
    for name, v in zip(("f_zz", "f_xx", "f_xy"), f.as_tuple()):
        if not 0.0 <= v <= 1.0:
            raise ValidationError(f"{name}={v} outside [0, 1]")
    flags: list[str] = []
    target = None
    sol_a = _solve(f, kind, "alpha", per_probability, f_lb_mode, tol)
    if not sol_a.optimal and f_lb_mode == "equal":
        target = _clamped_target(f, per_probability, tol, flags)
        sol_a = _solve(f, kind, "alpha", per_probability, f_lb_mode, tol, target)
    if sol_a.status == "infeasible":
        raise SolverError("no normalised process reproduces these classical fidelities", sol_a)
    if not sol_a.optimal:
        hint = "; the 40 probabilities may not be jointly attainable (sampled data?)" if per_probability else ""
        raise SolverError(f"alpha estimate: solver status {sol_a.status}{hint}", sol_a)
    sol_b = _solve(f, kind, "beta", per_probability, f_lb_mode, tol, target)
    if not sol_b.optimal:
        raise SolverError(f"beta estimate: solver status {sol_b.status}", sol_b)
    chi_a = _as_proc(sol_a.assignments["chi_sdp"])
    chi_b = _as_proc(sol_b.assignments["chi_sdp"])
    return PartialDataEstimate(
        chi_a, float(np.clip(sol_a.value, 0.0, 1.0)), max(0.0, float(sol_b.value)), f_lower_bound(f), kind,
        f_lb_err=f.df_lb, flags=flags, chi_sdp_beta=chi_b,
        certificates={"alpha": sol_a.certificates(), "beta": sol_b.certificates()})


def _as_proc(m: np.ndarray) -> ProcMat:
    from . import linalg

    m = linalg.project_psd(m)
    return ProcMat(m / np.trace(m).real, normalized=True)


def shift_fidelities(f: ClassicalFidelities, target_f_lb: float) -> ClassicalFidelities:
    """Scale all three fidelities by one factor so that F_LB equals ``target_f_lb``."""
    total = sum(f.as_tuple())
    if total <= 0:
        raise ValidationError("cannot rescale fidelities that sum to zero")
    c = (2.0 * target_f_lb + 1.0) / total
    vals = [v * c for v in f.as_tuple()]
    if any(v > 1.0 + 1e-12 or v < 0.0 for v in vals):
        raise ValidationError(f"shifted fidelities {vals} leave [0, 1]")
    vals = [min(1.0, v) for v in vals]
    return ClassicalFidelities(*vals, f.df_zz, f.df_xx, f.df_xy)


def _feasible(f: ClassicalFidelities, kind, tol, f_lb_mode) -> bool:
    try:
        return _solve(f, kind, "alpha", False, f_lb_mode, tol).optimal
    except ValidationError:
        return False


def _endpoint(f: ClassicalFidelities, delta: float, kind, tol, f_lb_mode, flags, label):
    """Estimate at F_LB + delta, backing off toward F_LB when that is infeasible."""
    base = f_lower_bound(f)

    def attempt(d):
        try:
            return shift_fidelities(f, base + d)
        except ValidationError:
            return None

    g = attempt(delta)
    if g is None or not _feasible(g, kind, tol, f_lb_mode):
        lo, hi = 0.0, 1.0  # fractions of delta: lo feasible, hi not
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            cand = attempt(mid * delta)
            if cand is not None and _feasible(cand, kind, tol, f_lb_mode):
                lo = mid
            else:
                hi = mid
        g = attempt(lo * delta)
        flags.append(f"{label} endpoint infeasible; used nearest feasible F_LB shift {lo * delta:+.6g}")
    return estimate_capability(g, kind, tol, f_lb_mode=f_lb_mode)


def estimate_with_errors(f: ClassicalFidelities, df_lb: float | None = None, kind="creation",
                         tol: float = 1e-7, f_lb_mode: str = "none") -> PartialDataEstimate:
    """Central estimate plus the alpha/beta band from the F_LB +- dF_LB endpoints."""
    kind = CapabilityKind.parse(kind)
    df = f.df_lb if df_lb is None else float(df_lb)
    if df < 0:
        raise ValidationError("dF_LB must be nonnegative")
    est = estimate_capability(f, kind, tol, f_lb_mode=f_lb_mode)
    est.f_lb_err = df
    if df == 0.0:
        est.error_band = (est.alpha_est, est.alpha_est)
        est.beta_band = (est.beta_est, est.beta_est)
        return est
    flags: list[str] = []
    lo = _endpoint(f, -df, kind, tol, f_lb_mode, flags, "lower")
    hi = _endpoint(f, +df, kind, tol, f_lb_mode, flags, "upper")
    est.error_band = (min(lo.alpha_est, hi.alpha_est), max(lo.alpha_est, hi.alpha_est))
    est.beta_band = (min(lo.beta_est, hi.beta_est), max(lo.beta_est, hi.beta_est))
    est.flags.extend(flags)
    return est


def estimate_from_probabilities(probs, kind="creation", tol: float = 1e-7) -> PartialDataEstimate:
    """Estimate constrained by each of the 40 raw conditional probabilities."""
    f = fidelities_from_probabilities(probs)
    return estimate_capability(f, kind, tol, per_probability=True)
