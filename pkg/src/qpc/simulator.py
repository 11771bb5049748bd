"""Synthetic fusion processes and tomography records.

Model summary:

* Distinguishability: ``chi(dt) = v chi_fusion + (1 - v) chi_dephased`` with
  ``v = v0 * max(0, 1 - (dt / L_c)^2)``, ``v0`` the peak interference
  visibility at zero delay.
* Multi-pair emission appears only as a uniform accidental floor: every
  outcome cell of every (input, basis) gains ``a/4`` of the N_T scale, with
  ``a`` the accidental fraction (by default ``p_2 / p_1`` of the source).
* Counts are Poisson with mean ``N_T * (p + a/4)`` where ``p`` is the cell
  probability under the post-selected process scaled so that ideal fusion
  passes ``|HH>`` with certainty.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from importlib import resources

import numpy as np
import scipy.optimize

from .errors import ValidationError
from .quantum import ProcMat, apply_chi, dephased_fusion, fusion_ideal, ket, projector
from .tomography import (
    BASES,
    CLASSICAL_EXTRA_LABELS,
    CLASSICAL_PROBE_SET,
    OUTCOMES,
    STANDARD_LABELS,
    ClassicalFidelities,
    TomographyRecord,
    classical_fidelities,
    fidelities_from_probabilities,
    outcome_probabilities,
)

log = logging.getLogger(__name__)

COHERENCE_LENGTH_UM = 203.0
FUSION_TRACE = 2.0
RECORD_INPUTS = STANDARD_LABELS + CLASSICAL_EXTRA_LABELS


@dataclass(frozen=True)
class FusionUnitModel:
    """One fusion unit. ``visibility`` is the peak visibility ``v0`` at zero delay."""

    delay_um: float = 0.0
    coherence_length_um: float = COHERENCE_LENGTH_UM
    visibility: float = 1.0
    accidental_rate: float = 0.0

    def __post_init__(self):
        if self.coherence_length_um <= 0:
            raise ValidationError("coherence length must be positive")
        if self.delay_um < 0:
            raise ValidationError("delay must be nonnegative")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValidationError("visibility must lie in [0, 1]")
        if self.accidental_rate < 0:
            raise ValidationError("accidental rate must be nonnegative")

    def effective_visibility(self) -> float:
        x = self.delay_um / self.coherence_length_um
        return self.visibility * max(0.0, 1.0 - x * x)


def emission_prob(n: int, r: float) -> float:
    """Probability of emitting ``n`` pairs for squeezing parameter ``r``."""
    if n < 0 or int(n) != n:
        raise ValidationError("pair number must be a nonnegative integer")
    if r < 0:
        raise ValidationError("squeezing parameter must be nonnegative")
    t = math.tanh(r)
    return (n + 1) * t ** (2 * n) / math.cosh(r) ** 4


def squeezing_for_p1(p1: float) -> float:
    """Smallest ``r`` with single-pair probability ``p1``."""
    r_max = math.atanh(math.sqrt(0.5))  # p1 is largest where tanh^2 r = 1/2
    if not 0.0 <= p1 <= emission_prob(1, r_max):
        raise ValidationError(f"p1={p1} is not reachable")
    if p1 == 0:
        return 0.0
    return float(scipy.optimize.brentq(lambda r: emission_prob(1, r) - p1, 0.0, r_max, xtol=1e-15))


@dataclass(frozen=True)
class SourceModel:
    p_white: float = 0.0
    p_deph: float = 0.0
    pair_rate: float = 0.0
    r_coupling: float = 0.0

    def accidental_fraction(self) -> float:
        p1 = emission_prob(1, self.r_coupling)
        return 0.0 if p1 == 0 else emission_prob(2, self.r_coupling) / p1

    def emission_probs(self, n_max: int = 20) -> np.ndarray:
        p = np.array([emission_prob(n, self.r_coupling) for n in range(n_max + 1)])
        if p.sum() > 1.0 + 1e-12:
            raise ValidationError("emission probabilities exceed 1")
        return p


@dataclass(frozen=True)
class DetectionModel:
    n_t: int = 100_000
    rng_seed: int = 0
    integration_time: float | None = None

    def __post_init__(self):
        if int(self.n_t) < 1:
            raise ValidationError("N_T must be at least 1")


def fusion_with_delay(model: FusionUnitModel) -> ProcMat:
    """Normalised process of a partially distinguishable fusion unit."""
    v = model.effective_visibility()
    chi = v * fusion_ideal(normalized=True).matrix + (1.0 - v) * dephased_fusion(normalized=True).matrix
    return ProcMat(chi, normalized=True)


def _scaled(chi: ProcMat | np.ndarray) -> np.ndarray:
    if isinstance(chi, ProcMat):
        return chi.matrix * FUSION_TRACE if chi.normalized else chi.matrix
    return np.asarray(chi)


def expected_counts(chi: ProcMat | np.ndarray, n_t: float, accidental_rate: float = 0.0,
                    inputs=RECORD_INPUTS) -> dict[tuple[str, str, str], float]:
    """Mean count of every (input, basis, outcome) cell."""
    mat = _scaled(chi)
    out = {}
    for lab in inputs:
        rho = apply_chi(mat, projector(ket(lab)))
        for b in BASES:
            p = np.clip(outcome_probabilities(rho, b), 0.0, None)
            for o, pp in zip(OUTCOMES, p):
                out[(lab, b, o)] = n_t * (pp + accidental_rate / 4.0)
    return out


def generate_counts(chi: ProcMat | np.ndarray, det: DetectionModel, accidental_rate: float = 0.0,
                    inputs=RECORD_INPUTS) -> TomographyRecord:
    """Poisson-sampled record; identical seeds give identical records."""
    means = expected_counts(chi, det.n_t, accidental_rate, inputs)
    rng = np.random.default_rng(det.rng_seed)
    keys = list(means)
    draws = rng.poisson([means[k] for k in keys])
    counts = {k: int(n) for k, n in zip(keys, draws)}
    n00 = np.mean([sum(counts[("00", b, o)] for o in OUTCOMES) for b in BASES])
    return TomographyRecord(max(1, int(round(n00))), counts, "simulated", det.integration_time,
                            {"expected_n_t": det.n_t, "accidental_rate": accidental_rate,
                             "seed": det.rng_seed})


def expected_fidelities(chi: ProcMat | np.ndarray, accidental_rate: float = 0.0) -> ClassicalFidelities:
    """Classical fidelities in the infinite-count limit, accidentals included."""
    means = expected_counts(chi, 1.0, accidental_rate, inputs=("00", "11", "++", "+-", "-+", "--"))
    probs = []
    for inp, basis, o in CLASSICAL_PROBE_SET:
        tot = sum(means[(inp, basis, x)] for x in OUTCOMES)
        probs.append(means[(inp, basis, o)] / tot)
    return fidelities_from_probabilities(probs)


# -- presets ------------------------------------------------------------------

PRESETS = ("unit_i", "unit_ii")


def load_preset(name: str) -> dict:
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; choose from {PRESETS}")
    text = resources.files("qpc.data").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def preset_models(name: str) -> tuple[FusionUnitModel, SourceModel, DetectionModel]:
    p = load_preset(name)
    source = SourceModel(p.get("p_white", 0.0), p.get("p_deph", 0.0), p.get("pair_rate", 0.0),
                         squeezing_for_p1(p["p1"]))
    unit = FusionUnitModel(0.0, p["coherence_length_um"], p["visibility"], source.accidental_fraction())
    det = DetectionModel(p["n_t"], p.get("seed", 0), p.get("integration_time"))
    return unit, source, det


# -- delay sweep -----------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    delta_tau_um: float
    alpha: float
    beta: float
    f_lb: float
    f_lb_err: float
    flags: tuple = field(default=())


SWEEP_COLUMNS = ("delta_tau_um", "alpha", "beta", "f_lb", "f_lb_err")


def _sweep_point(args) -> SweepPoint:
    from .estimation import estimate_capability

    model, det, index, kind, noiseless, tol = args
    chi = fusion_with_delay(model)
    if noiseless:
        f = expected_fidelities(chi, model.accidental_rate)
    else:
        seed = np.random.SeedSequence([det.rng_seed, index]).generate_state(1)[0]
        rec = generate_counts(chi, replace(det, rng_seed=int(seed)), model.accidental_rate,
                              inputs=("00", "11", "++", "+-", "-+", "--"))
        f = classical_fidelities(rec)
    est = estimate_capability(f, kind, tol)
    return SweepPoint(model.delay_um, est.alpha_est, est.beta_est, est.f_lb, f.df_lb, tuple(est.flags))


def sweep_delay(model: FusionUnitModel, det: DetectionModel, delays, kind="creation",
                noiseless: bool = False, jobs: int = 1, tol: float = 1e-7) -> list[SweepPoint]:
    """Estimated capability and F_LB along a grid of delays (micrometres)."""
    delays = [float(d) for d in delays]
    tasks = [(replace(model, delay_um=d), det, i, kind, noiseless, tol) for i, d in enumerate(delays)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_sweep_point, tasks))
    return [_sweep_point(t) for t in tasks]


def sweep_to_csv(points: list[SweepPoint]) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for p in points:
        lines.append(",".join(f"{getattr(p, c):.12g}" for c in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"


def model_to_dict(model: FusionUnitModel) -> dict:
    return {"schema": "qpc/1", "kind": "fusion_unit_model", **asdict(model)}
