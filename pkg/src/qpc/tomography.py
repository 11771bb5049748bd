"""Process tomography: records, linear inversion, maximum likelihood, classical fidelities.

Measurement conventions: a basis label such as ``"XY"`` names the Pauli axis
measured on each qubit; an outcome label such as ``"+-"`` picks the first or
second eigenvector of that axis (``X: +,-``; ``Y: R,L``; ``Z: 0,1``).
"""

from __future__ import annotations

import csv
import functools
import io
import json
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from . import linalg
from .errors import ValidationError
from .quantum import (
    BASIS_KETS,
    ProcMat,
    PureState,
    QState,
    apply_chi,
    chi_from_choi,
    ket,
    projector,
)
from .sdp import hermitian_basis

log = logging.getLogger(__name__)

STANDARD_SINGLE = ("0", "1", "+", "R")
STANDARD_LABELS = tuple(a + b for a in STANDARD_SINGLE for b in STANDARD_SINGLE)
BASES = tuple(a + b for a in "XYZ" for b in "XYZ")
OUTCOMES = ("++", "+-", "-+", "--")
# inputs needed beyond the standard set to evaluate the classical fidelities
CLASSICAL_EXTRA_LABELS = ("+-", "-+", "--")
PREP_TAGS = ("local-waveplate", "RSP", "simulated")

_LABEL_ALIASES = str.maketrans({"H": "0", "V": "1"})


def canonical_label(label: str) -> str:
    lab = str(label).translate(_LABEL_ALIASES)
    if len(lab) != 2 or any(ch not in "01+-RL" for ch in lab):
        raise ValidationError(f"invalid two-qubit input label {label!r}")
    return lab


def standard_inputs() -> list[PureState]:
    """The 16 product inputs, ordered row-major over ``(0, 1, +, R)``."""
    return [PureState.from_label(lab) for lab in STANDARD_LABELS]


def _check_basis(basis: str) -> str:
    if basis not in BASES:
        raise ValidationError(f"invalid measurement basis {basis!r}")
    return basis


def _check_outcome(outcome: str) -> str:
    if outcome not in OUTCOMES:
        raise ValidationError(f"invalid outcome {outcome!r}")
    return outcome


@functools.lru_cache(maxsize=None)
def measurement_projectors(basis: str) -> np.ndarray:
    """Four projectors (4, 4, 4) in :data:`OUTCOMES` order for a basis."""
    _check_basis(basis)
    out = []
    for outcome in OUTCOMES:
        lab = "".join(BASIS_KETS[axis][0 if s == "+" else 1] for axis, s in zip(basis, outcome))
        out.append(projector(ket(lab)))
    arr = np.array(out)
    arr.setflags(write=False)
    return arr


def outcome_probabilities(rho: np.ndarray, basis: str) -> np.ndarray:
    """``tr(P_l rho)`` for the four outcomes of ``basis`` (unnormalised rho allowed)."""
    p = np.real(np.einsum("lab,ba->l", measurement_projectors(basis), np.asarray(rho)))
    return p


# -- records ------------------------------------------------------------------

@dataclass
class TomographyRecord:
    """Coincidence counts keyed by ``(input, basis, outcome)``."""

    n_t: int
    counts: dict[tuple[str, str, str], int]
    prep: str = "simulated"
    integration_time: float | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.n_t) <= 0:
            raise ValidationError(f"n_t must be a positive integer, got {self.n_t}")
        self.n_t = int(self.n_t)
        if self.prep not in PREP_TAGS:
            raise ValidationError(f"unknown preparation tag {self.prep!r}; expected one of {PREP_TAGS}")
        clean = {}
        for (inp, basis, outcome), n in self.counts.items():
            key = (canonical_label(inp), _check_basis(basis), _check_outcome(outcome))
            if n < 0 or int(n) != n:
                raise ValidationError(f"count for {key} must be a nonnegative integer, got {n}")
            clean[key] = int(n)
        self.counts = clean
        for inp in self.inputs:
            for basis in self.bases(inp):
                missing = [o for o in OUTCOMES if (inp, basis, o) not in clean]
                if missing:
                    raise ValidationError(f"input {inp} basis {basis} lacks outcomes {missing}")

    @property
    def inputs(self) -> list[str]:
        seen = dict.fromkeys(k[0] for k in self.counts)
        return list(seen)

    def bases(self, inp: str) -> list[str]:
        inp = canonical_label(inp)
        return list(dict.fromkeys(k[1] for k in self.counts if k[0] == inp))

    def outcome_counts(self, inp: str, basis: str) -> np.ndarray:
        inp = canonical_label(inp)
        try:
            return np.array([self.counts[(inp, basis, o)] for o in OUTCOMES], dtype=float)
        except KeyError:
            raise ValidationError(f"record has no data for input {inp} basis {basis}") from None

    def basis_counts(self, inp: str) -> dict[str, np.ndarray]:
        return {b: self.outcome_counts(inp, b) for b in self.bases(inp)}

    def input_total(self, inp: str) -> float:
        """Mean coincidence total per basis for one input."""
        totals = [c.sum() for c in self.basis_counts(inp).values()]
        if not totals:
            raise ValidationError(f"record has no data for input {inp}")
        return float(np.mean(totals))

    def warnings(self) -> list[str]:
        out = []
        for inp in self.inputs:
            for basis, c in self.basis_counts(inp).items():
                if c.sum() > self.n_t + 3.0 * np.sqrt(self.n_t):
                    out.append(f"{inp}/{basis}: total {int(c.sum())} exceeds n_t={self.n_t}")
        return out

    def has_full_qpt(self) -> bool:
        have = set(self.inputs)
        return all(lab in have and set(self.bases(lab)) == set(BASES) for lab in STANDARD_LABELS)

    # serialisation
    def to_dict(self) -> dict:
        rows = [{"input": i, "basis": b, "outcome": o, "n": n} for (i, b, o), n in self.counts.items()]
        d = {"schema": "qpc/1", "kind": "tomography_record", "n_t": self.n_t, "prep": self.prep,
             "counts": rows}
        if self.integration_time is not None:
            d["integration_time"] = self.integration_time
        if self.metadata:
            d["metadata"] = self.metadata
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> TomographyRecord:
        known = {"schema", "kind", "n_t", "prep", "counts", "integration_time", "metadata"}
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown record fields {sorted(extra)}")
        if "n_t" not in d or "counts" not in d:
            raise ValidationError("record requires 'n_t' and 'counts'")
        counts = {}
        for k, row in enumerate(d["counts"]):
            try:
                key = (row["input"], row["basis"], row["outcome"])
                n = row["n"]
            except (KeyError, TypeError):
                raise ValidationError(f"counts[{k}] needs input, basis, outcome and n") from None
            if key in counts:
                raise ValidationError(f"counts[{k}] duplicates {key}")
            counts[key] = n
        return cls(d["n_t"], counts, d.get("prep", "simulated"), d.get("integration_time"),
                   dict(d.get("metadata", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> TomographyRecord:
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["input", "basis", "outcome", "n"])
        for (i, b, o), n in self.counts.items():
            w.writerow([i, b, o, n])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, n_t: int, prep: str = "simulated") -> TomographyRecord:
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None or set(reader.fieldnames) != {"input", "basis", "outcome", "n"}:
            raise ValidationError(f"CSV columns must be input,basis,outcome,n; got {reader.fieldnames}")
        counts = {}
        for line, row in enumerate(reader, start=2):
            try:
                n = int(row["n"])
            except ValueError:
                raise ValidationError(f"CSV line {line}: count {row['n']!r} is not an integer") from None
            counts[(row["input"], row["basis"], row["outcome"])] = n
        return cls(n_t, counts, prep)


# -- state tomography ----------------------------------------------------------

@dataclass(frozen=True)
class StateTomoResult:
    state: QState
    raw: np.ndarray
    raw_min_eigenvalue: float


_PAULI_SIGNS = {"I": np.array([1.0, 1.0]), "A": np.array([1.0, -1.0])}


def linear_state_estimate(counts: Mapping[str, Sequence[float]]) -> StateTomoResult:
    """Pauli linear inversion from 9 bases x 4 outcomes, projected to the PSD cone."""
    missing = [b for b in BASES if b not in counts]
    if missing:
        raise ValidationError(f"state tomography needs all 9 bases; missing {missing}")
    freqs = {}
    for b in BASES:
        c = np.asarray(counts[b], dtype=float)
        if c.shape != (4,) or np.any(c < 0):
            raise ValidationError(f"basis {b}: need 4 nonnegative counts, got {c}")
        tot = c.sum()
        if tot <= 0:
            raise ValidationError(f"basis {b}: all counts are zero")
        freqs[b] = c.reshape(2, 2) / tot
    paulis = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]),
              "Z": np.diag([1.0, -1.0])}
    rho = np.zeros((4, 4), dtype=complex)
    for a in "IXYZ":
        for b in "IXYZ":
            vals = []
            for basis in BASES:
                if (a != "I" and basis[0] != a) or (b != "I" and basis[1] != b):
                    continue
                sa = _PAULI_SIGNS["I" if a == "I" else "A"]
                sb = _PAULI_SIGNS["I" if b == "I" else "A"]
                vals.append(float(sa @ freqs[basis] @ sb))
            rho += np.mean(vals) * np.kron(paulis[a], paulis[b]) / 4.0
    rho = linalg.hermitize(rho)
    lam = linalg.min_eig(rho)
    proj = linalg.project_psd(rho)
    proj = proj / np.trace(proj).real
    return StateTomoResult(QState(proj), rho, lam)


def state_tomo_linear(counts: Mapping[str, Sequence[float]]) -> QState:
    return linear_state_estimate(counts).state


def scale_output(n: float, n_t: int, rho_out: QState) -> QState:
    """Event-probability scaling ``(n / N_T) rho_out``."""
    if n < 0:
        raise ValidationError(f"count must be nonnegative, got {n}")
    if n_t <= 0:
        raise ValidationError(f"n_t must be positive, got {n_t}")
    m = rho_out.matrix if isinstance(rho_out, QState) else np.asarray(rho_out)
    tr = np.trace(m).real
    if abs(tr - 1.0) > 1e-9:
        m = m / tr
    return QState((n / n_t) * m, getattr(rho_out, "label", None), check_trace=False)


# -- process linear inversion --------------------------------------------------

# |c><c'| as combinations of the projectors onto |0>, |1>, |+>, |R>
_UNIT_EXPANSION = {
    (0, 0): {"0": 1.0},
    (1, 1): {"1": 1.0},
    (0, 1): {"+": 1.0, "R": 1j, "0": -(1 + 1j) / 2, "1": -(1 + 1j) / 2},
    (1, 0): {"+": 1.0, "R": -1j, "0": -(1 - 1j) / 2, "1": -(1 - 1j) / 2},
}


def qpt_linear_inversion(outputs: Mapping[str, QState | np.ndarray]) -> ProcMat:
    """Assemble the process matrix from the scaled outputs of the 16 standard inputs.

    The result is Hermitised but not projected; check ``min_eigenvalue``.
    """
    mats = {}
    for lab, out in outputs.items():
        m = out.matrix if isinstance(out, QState) else np.asarray(out, dtype=complex)
        if m.shape != (4, 4):
            raise ValidationError(f"output for {lab} must be 4x4, got {m.shape}")
        mats[canonical_label(lab)] = m
    missing = [lab for lab in STANDARD_LABELS if lab not in mats]
    if missing:
        raise ValidationError(f"linear inversion needs all 16 standard inputs; missing {missing}")
    # Choi matrix: block (c1c2, c1'c2') is the image of |c1 c2><c1' c2'|
    choi = np.zeros((2, 2, 2, 2, 4, 4), dtype=complex)
    for (c1, d1), e1 in _UNIT_EXPANSION.items():
        for (c2, d2), e2 in _UNIT_EXPANSION.items():
            acc = np.zeros((4, 4), dtype=complex)
            for a, wa in e1.items():
                for b, wb in e2.items():
                    acc += wa * wb * mats[a + b]
            choi[c1, c2, d1, d2] = acc
    # reorder to (c1 c2 r1 r2 ; c1' c2' r1' r2')
    j = choi.reshape(2, 2, 2, 2, 2, 2, 2, 2).transpose(0, 1, 4, 5, 2, 3, 6, 7).reshape(16, 16)
    chi = linalg.hermitize(chi_from_choi(j))
    return ProcMat(chi, check=False)


def qpt_from_record(record: TomographyRecord) -> ProcMat:
    """Per-input state tomography, event-probability scaling, then linear inversion."""
    outputs = {}
    for lab in STANDARD_LABELS:
        total = record.input_total(lab)
        if total == 0:
            # process annihilated this input
            outputs[lab] = np.zeros((4, 4), dtype=complex)
            continue
        est = linear_state_estimate(record.basis_counts(lab))
        outputs[lab] = scale_output(total, record.n_t, est.state)
    return qpt_linear_inversion(outputs)


def exact_outputs(chi: ProcMat | np.ndarray, labels: Sequence[str] = STANDARD_LABELS) -> dict[str, np.ndarray]:
    mat = chi.matrix if isinstance(chi, ProcMat) else np.asarray(chi)
    return {lab: apply_chi(mat, projector(ket(lab))) for lab in labels}


# -- maximum likelihood ---------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _probability_map() -> tuple[np.ndarray, np.ndarray]:
    """Linear maps from chi's 256 real parameters to the 576 cell probabilities and 16 traces."""
    basis = hermitian_basis(16)
    probs = np.zeros((len(STANDARD_LABELS), len(BASES), 4, 256))
    traces = np.zeros((len(STANDARD_LABELS), 256))
    for i, lab in enumerate(STANDARD_LABELS):
        outs = apply_chi(basis, projector(ket(lab)))  # (256, 4, 4)
        traces[i] = np.real(np.einsum("qaa->q", outs))
        for k, b in enumerate(BASES):
            probs[i, k] = np.real(np.einsum("lab,qba->lq", measurement_projectors(b), outs))
    pm = probs.reshape(-1, 256)
    pm.setflags(write=False)
    traces.setflags(write=False)
    return pm, traces


_TRIL = np.tril_indices(16)
_TRIL_OFF = np.tril_indices(16, -1)


def _t_from_params(t: np.ndarray) -> np.ndarray:
    T = np.zeros((16, 16), dtype=complex)
    T[np.diag_indices(16)] = t[:16]
    T[_TRIL_OFF] = t[16:136] + 1j * t[136:]
    return T


def _params_from_t(T: np.ndarray) -> np.ndarray:
    off = T[_TRIL_OFF]
    return np.concatenate([np.real(np.diag(T)), off.real, off.imag])


def _t_from_chi(chi: np.ndarray) -> np.ndarray:
    """Lower-triangular T with ``chi = T^dagger T``."""
    rev = np.arange(15, -1, -1)
    c = np.linalg.cholesky(chi[np.ix_(rev, rev)])
    return np.conj(c.T)[np.ix_(rev, rev)]


@dataclass(frozen=True)
class MleResult:
    chi: ProcMat
    residual: float
    iterations: int
    converged: bool
    lam: float


def mle_fit(record: TomographyRecord, lam: float | None = None, max_iter: int = 20000) -> MleResult:
    """Constrained maximum-likelihood process fit with ``chi = T^dagger T``.

    Minimises ``sum (n - N_T p)^2 / N_T + 100 lam sum_i (tr E(rho_i) - n_i/N_T)^2``
    over the 256 real entries of the lower-triangular factor T.
    """
    if not record.has_full_qpt():
        raise ValidationError("MLE needs all 16 standard inputs with 9 bases each (576 cells)")
    n_t = float(record.n_t)
    lam = 1e-2 * n_t if lam is None else float(lam)
    if lam < 0:
        raise ValidationError("lambda must be nonnegative")
    pmap, tmap = _probability_map()
    n = np.array([record.outcome_counts(lab, b) for lab in STANDARD_LABELS for b in BASES]).reshape(-1)
    target_tr = np.array([record.input_total(lab) for lab in STANDARD_LABELS]) / n_t
    basis = hermitian_basis(16)
    w_tr = 100.0 * lam

    # scaled objective f / N_T keeps magnitudes O(1)
    def fun(t):
        T = _t_from_params(t)
        chi = np.conj(T.T) @ T
        y = np.real(np.einsum("qab,ba->q", basis, chi))
        r = n / n_t - pmap @ y
        d = tmap @ y - target_tr
        f = float(r @ r) + w_tr / n_t * float(d @ d)
        gy = -2.0 * (pmap.T @ r) + 2.0 * w_tr / n_t * (tmap.T @ d)
        G = np.tensordot(gy, basis, axes=1)
        TG = 2.0 * T @ G
        grad = np.concatenate([np.real(np.diag(TG)), TG[_TRIL_OFF].real, TG[_TRIL_OFF].imag])
        return f, grad

    chi0 = linalg.project_psd(qpt_from_record(record).matrix)
    chi0 = chi0 + 1e-9 * max(np.trace(chi0).real, 1e-3) * np.eye(16)
    t0 = _params_from_t(_t_from_chi(chi0))
    res = scipy.optimize.minimize(fun, t0, jac=True, method="L-BFGS-B",
                                  options={"maxiter": max_iter, "maxfun": 4 * max_iter,
                                           "ftol": 1e-13, "gtol": 1e-9})
    T = _t_from_params(res.x)
    chi = linalg.hermitize(np.conj(T.T) @ T)
    if not res.success:
        log.warning("MLE optimiser stopped early: %s", res.message)
    return MleResult(ProcMat(chi), float(res.fun * n_t), int(res.nit), bool(res.success), lam)


# -- classical fidelities --------------------------------------------------------

# (input, basis, good outcomes) for each classical fidelity
CLASSICAL_GROUPS = {
    "zz": [("00", "ZZ", ("++",)), ("11", "ZZ", ("--",))],
    "xx": [("++", "XX", ("++", "--")), ("+-", "XX", ("+-", "-+")),
           ("-+", "XX", ("+-", "-+")), ("--", "XX", ("++", "--"))],
    "xy": [("++", "YY", ("+-", "-+")), ("+-", "YY", ("++", "--")),
           ("-+", "YY", ("++", "--")), ("--", "YY", ("+-", "-+"))],
}
# the 40 probabilities entering the three fidelities, in a fixed order
CLASSICAL_PROBE_SET = tuple((inp, basis, o) for grp in ("zz", "xx", "xy")
                            for inp, basis, _ in CLASSICAL_GROUPS[grp] for o in OUTCOMES)
assert len(CLASSICAL_PROBE_SET) == 40


@dataclass(frozen=True)
class ClassicalFidelities:
    f_zz: float
    f_xx: float
    f_xy: float
    df_zz: float = 0.0
    df_xx: float = 0.0
    df_xy: float = 0.0
    probabilities: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("f_zz", "f_xx", "f_xy"):
            v = getattr(self, name)
            if not (-1e-12 <= v <= 1 + 1e-12):
                raise ValidationError(f"{name}={v} outside [0, 1]")
        if self.probabilities is not None and len(self.probabilities) != 40:
            raise ValidationError("probability list must have 40 entries")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.f_zz, self.f_xx, self.f_xy)

    @property
    def f_lb(self) -> float:
        return f_lower_bound(self)

    @property
    def df_lb(self) -> float:
        return 0.5 * float(np.sqrt(self.df_zz**2 + self.df_xx**2 + self.df_xy**2))

    def to_dict(self) -> dict:
        d = {"schema": "qpc/1", "kind": "classical_fidelities",
             "f_zz": self.f_zz, "f_xx": self.f_xx, "f_xy": self.f_xy,
             "df_zz": self.df_zz, "df_xx": self.df_xx, "df_xy": self.df_xy}
        if self.probabilities is not None:
            d["probabilities"] = list(self.probabilities)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> ClassicalFidelities:
        known = {"schema", "kind", "f_zz", "f_xx", "f_xy", "df_zz", "df_xx", "df_xy", "probabilities"}
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown fidelity fields {sorted(extra)}")
        if "probabilities" in d and not {"f_zz", "f_xx", "f_xy"} <= set(d):
            return fidelities_from_probabilities(d["probabilities"])
        try:
            probs = d.get("probabilities")
            return cls(float(d["f_zz"]), float(d["f_xx"]), float(d["f_xy"]),
                       float(d.get("df_zz", 0.0)), float(d.get("df_xx", 0.0)), float(d.get("df_xy", 0.0)),
                       tuple(float(p) for p in probs) if probs is not None else None)
        except KeyError as exc:
            raise ValidationError(f"missing field {exc.args[0]!r}") from None


def _group_fidelity(tables: dict, grp: str) -> tuple[float, float]:
    """Mean conditional success frequency over a group's inputs, with Poisson error."""
    entries = CLASSICAL_GROUPS[grp]
    w = 1.0 / len(entries)
    f = 0.0
    var = 0.0
    for inp, basis, good in entries:
        c = np.asarray(tables[(inp, basis)], dtype=float)
        tot = c.sum()
        if tot <= 0:
            raise ValidationError(f"no counts for input {inp} basis {basis}")
        mask = np.array([o in good for o in OUTCOMES], dtype=float)
        g = float(c @ mask)
        f += w * g / tot
        deriv = w * (mask * tot - g) / tot**2
        var += float(np.sum(deriv**2 * c))
    return float(f), float(np.sqrt(var))


def classical_fidelities(data) -> ClassicalFidelities:
    """Classical fidelities from a record or a 40-entry probability list."""
    if isinstance(data, TomographyRecord):
        tables = {}
        for grp in CLASSICAL_GROUPS.values():
            for inp, basis, _ in grp:
                tables[(inp, basis)] = data.outcome_counts(inp, basis)
        vals = {g: _group_fidelity(tables, g) for g in CLASSICAL_GROUPS}
        probs = []
        for inp, basis, o in CLASSICAL_PROBE_SET:
            c = tables[(inp, basis)]
            probs.append(float(c[OUTCOMES.index(o)] / c.sum()))
        return ClassicalFidelities(vals["zz"][0], vals["xx"][0], vals["xy"][0],
                                   vals["zz"][1], vals["xx"][1], vals["xy"][1], tuple(probs))
    return fidelities_from_probabilities(data)


def fidelities_from_probabilities(probs) -> ClassicalFidelities:
    """Classical fidelities from conditional probabilities in :data:`CLASSICAL_PROBE_SET` order.

    Also accepts a mapping keyed by ``(input, basis, outcome)``.
    """
    if isinstance(probs, Mapping):
        try:
            probs = [probs[k] for k in CLASSICAL_PROBE_SET]
        except KeyError as exc:
            raise ValidationError(f"probability set lacks {exc.args[0]}") from None
    p = np.asarray(probs, dtype=float).reshape(-1)
    if p.size != 40:
        raise ValidationError(f"need exactly 40 probabilities, got {p.size}")
    if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
        raise ValidationError("probabilities must lie in [0, 1]")
    tables = {}
    for k in range(10):
        inp, basis, _ = CLASSICAL_PROBE_SET[4 * k]
        tables[(inp, basis)] = p[4 * k:4 * k + 4]
    f = {g: _group_fidelity(tables, g)[0] for g in CLASSICAL_GROUPS}
    # renormalisation inside _group_fidelity makes the value per-input conditional
    return ClassicalFidelities(f["zz"], f["xx"], f["xy"], probabilities=tuple(float(x) for x in p))


def classical_fidelities_from_process(chi: ProcMat | np.ndarray) -> ClassicalFidelities:
    """Exact conditional probabilities of a process (noiseless)."""
    mat = chi.matrix if isinstance(chi, ProcMat) else np.asarray(chi)
    probs = []
    for inp, basis, o in CLASSICAL_PROBE_SET:
        out = apply_chi(mat, projector(ket(inp)))
        p = outcome_probabilities(out, basis)
        tot = p.sum()
        if tot <= 1e-15:
            raise ValidationError(f"process annihilates input {inp}; conditional probabilities undefined")
        probs.append(float(p[OUTCOMES.index(o)] / tot))
    return fidelities_from_probabilities(probs)


def f_lower_bound(f: ClassicalFidelities) -> float:
    """``(F_zz + F_xx + F_xy - 1) / 2``; may be negative."""
    return 0.5 * (f.f_zz + f.f_xx + f.f_xy - 1.0)


def f_lower_bound_with_error(f: ClassicalFidelities) -> tuple[float, float]:
    return f_lower_bound(f), f.df_lb
