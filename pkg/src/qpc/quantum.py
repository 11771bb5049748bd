"""States, two-qubit process matrices and the ideal fusion process.

Conventions (fixed for the whole package):

* ``|0> = |H>`` and ``|1> = |V>``; multi-qubit kets are big-endian, qubit 0
  being the leftmost tensor factor.
* A two-qubit process matrix ``chi`` is a 16x16 Hermitian matrix over the
  operator basis ``E_m = E_a (x) E_b`` with single-qubit matrix units
  ``E_1=|0><0|, E_2=|0><1|, E_3=|1><0|, E_4=|1><1|`` and ``m = 4(a-1)+b``.
  The process acts as ``rho -> sum_mn chi_mn E_m rho E_n^dagger``.
  Written in bits, ``m - 1 = 8 r1 + 4 c1 + 2 r2 + c2`` where ``E_m`` maps the
  column ket ``|c1 c2>`` to the row ket ``|r1 r2>``.
* Fusion output modes are not relabelled: every process acts on one ordered
  two-qubit register.
"""

from __future__ import annotations

import functools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ValidationError

SQRT2 = np.sqrt(2.0)

SINGLE_KETS = {
    "0": np.array([1.0, 0.0], dtype=complex),
    "1": np.array([0.0, 1.0], dtype=complex),
    "+": np.array([1.0, 1.0], dtype=complex) / SQRT2,
    "-": np.array([1.0, -1.0], dtype=complex) / SQRT2,
    "R": np.array([1.0, 1j], dtype=complex) / SQRT2,
    "L": np.array([1.0, -1j], dtype=complex) / SQRT2,
}
SINGLE_KETS["H"] = SINGLE_KETS["0"]
SINGLE_KETS["V"] = SINGLE_KETS["1"]

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# eigenvectors for outcome "+" and "-" of each measurement axis
BASIS_KETS = {
    "X": ("+", "-"),
    "Y": ("R", "L"),
    "Z": ("0", "1"),
}


def ket(label: str) -> np.ndarray:
    """Product ket for a label such as ``"0+"`` or ``"HVHVVH"``."""
    try:
        return functools.reduce(np.kron, [SINGLE_KETS[ch] for ch in label])
    except KeyError as exc:
        raise ValidationError(f"unknown single-qubit label {exc.args[0]!r} in {label!r}") from None


def projector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, np.conj(vec))


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PureState:
    vector: np.ndarray
    label: str | None = None

    def __post_init__(self):
        v = np.array(self.vector, dtype=complex).reshape(-1)
        if not _is_power_of_two(v.size):
            raise ValidationError(f"state dimension {v.size} is not a power of 2")
        if abs(np.linalg.norm(v) - 1.0) > linalg.NORM_TOL:
            raise ValidationError(f"pure state norm {np.linalg.norm(v):.15g} differs from 1")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return self.vector.size

    @classmethod
    def from_label(cls, label: str) -> PureState:
        return cls(ket(label), label)

    def density(self) -> QState:
        return QState(projector(self.vector), self.label)


@dataclass(frozen=True)
class QState:
    """Density matrix, possibly unnormalised (trace = event probability)."""

    matrix: np.ndarray
    label: str | None = None
    check_trace: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"density matrix must be square, got shape {m.shape}")
        if not _is_power_of_two(m.shape[0]):
            raise ValidationError(f"state dimension {m.shape[0]} is not a power of 2")
        defect = linalg.hermitian_defect(m)
        if defect > linalg.HERMITIAN_TOL:
            raise ValidationError(f"density matrix not Hermitian (defect {defect:.3g})")
        m = linalg.hermitize(m)
        lam = linalg.min_eig(m)
        if lam < -linalg.PSD_TOL:
            raise ValidationError(f"density matrix not PSD (min eigenvalue {lam:.3g})")
        tr = float(np.trace(m).real)
        if tr < -linalg.PSD_TOL or (self.check_trace and tr > 1.0 + linalg.PSD_TOL):
            raise ValidationError(f"trace {tr:.12g} outside [0, 1]")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalized(self) -> QState:
        tr = self.trace
        if tr <= 0:
            raise ValidationError("cannot normalise a state with zero trace")
        return QState(self.matrix / tr, self.label)


@dataclass(frozen=True)
class ProcMat:
    """Two-qubit process matrix in the matrix-unit basis.

    ``check=False`` skips the PSD test; linear-inversion results use it
    and expose :attr:`min_eigenvalue` as a diagnostic.
    """

    matrix: np.ndarray
    normalized: bool = False
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (16, 16):
            raise ValidationError(f"process matrix must be 16x16, got {m.shape}")
        defect = linalg.hermitian_defect(m)
        if defect > linalg.HERMITIAN_TOL:
            raise ValidationError(f"process matrix not Hermitian (defect {defect:.3g})")
        m = linalg.hermitize(m)
        if self.check:
            lam = linalg.min_eig(m)
            if lam < -linalg.PSD_TOL:
                raise ValidationError(f"process matrix not PSD (min eigenvalue {lam:.3g})")
        if self.normalized and abs(np.trace(m).real - 1.0) > linalg.PSD_TOL:
            raise ValidationError(f"normalized process matrix has trace {np.trace(m).real:.12g}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def min_eigenvalue(self) -> float:
        return linalg.min_eig(self.matrix)

    @property
    def rank(self) -> int:
        return linalg.numerical_rank(self.matrix)

    def normalize(self) -> ProcMat:
        tr = self.trace
        if tr <= 0:
            raise ValidationError("cannot normalise a process matrix with zero trace")
        return ProcMat(self.matrix / tr, normalized=True, check=self.check)

    def __call__(self, rho):
        return apply_process(self, rho)


# -- construction -----------------------------------------------------------

def kraus_vector(op: np.ndarray) -> np.ndarray:
    """Coefficients ``e_m`` of a 4x4 operator in the matrix-unit basis."""
    op = np.asarray(op, dtype=complex)
    if op.shape != (4, 4):
        raise ValidationError(f"two-qubit operator must be 4x4, got {op.shape}")
    # op[(r1 r2), (c1 c2)] -> e[r1, c1, r2, c2]
    return op.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(16)


def process_from_kraus(ops: Iterable[np.ndarray], normalized: bool = False) -> ProcMat:
    chi = np.zeros((16, 16), dtype=complex)
    for op in ops:
        e = kraus_vector(op)
        chi += np.outer(e, np.conj(e))
    proc = ProcMat(chi)
    return proc.normalize() if normalized else proc


FUSION_OPERATOR = projector(ket("00")) + projector(ket("11"))
M_H = projector(ket("00"))
M_V = projector(ket("11"))


@functools.lru_cache(maxsize=None)
def _fusion_matrix() -> np.ndarray:
    m = process_from_kraus([FUSION_OPERATOR]).matrix
    return m


def fusion_ideal(normalized: bool = False) -> ProcMat:
    """Ideal fusion ``rho -> M rho M^dagger`` with ``M = |HH><HH| + |VV><VV|``.

    The unnormalised matrix is rank one with trace 2.
    """
    proc = ProcMat(_fusion_matrix())
    return proc.normalize() if normalized else proc


def dephased_fusion(normalized: bool = False) -> ProcMat:
    """Fusion with the HH/VV coherence removed: ``M_H rho M_H + M_V rho M_V``."""
    return process_from_kraus([M_H, M_V], normalized=normalized)


def identity_process(normalized: bool = False) -> ProcMat:
    return process_from_kraus([np.eye(4)], normalized=normalized)


def depolarizing_process(normalized: bool = False) -> ProcMat:
    """Completely depolarising channel ``rho -> tr(rho) I/4``."""
    proc = ProcMat(np.eye(16, dtype=complex) / 4.0)
    return proc.normalize() if normalized else proc


def unitary_process(u: np.ndarray, normalized: bool = False) -> ProcMat:
    return process_from_kraus([u], normalized=normalized)


# -- action -----------------------------------------------------------------

def chi_tensor(chi: np.ndarray) -> np.ndarray:
    """View ``chi`` (..., 16, 16) as (..., r1, c1, r2, c2, r1', c1', r2', c2')."""
    chi = np.asarray(chi)
    return chi.reshape(chi.shape[:-2] + (2,) * 8)


def apply_chi(chi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Unchecked process application; broadcasts over leading axes of ``chi``."""
    chi = np.asarray(chi)
    rho = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    out = np.einsum("...aibjckdl,ijkl->...abcd", chi_tensor(chi), rho)
    return out.reshape(chi.shape[:-2] + (4, 4))


def choi_blocks(chi: np.ndarray) -> np.ndarray:
    """Choi matrix ``J = sum_{c,c'} |c><c'| (x) E(|c><c'|)`` of ``chi``.

    Block (c, c') of J is the image of the operator ``|c><c'|``.
    """
    t = chi_tensor(chi)
    lead = t.ndim - 8
    axes = tuple(range(lead)) + tuple(lead + k for k in (1, 3, 0, 2, 5, 7, 4, 6))
    return t.transpose(axes).reshape(np.shape(chi))


def chi_from_choi(j: np.ndarray) -> np.ndarray:
    """Inverse of :func:`choi_blocks`."""
    j = np.asarray(j)
    t = j.reshape(j.shape[:-2] + (2,) * 8)
    lead = t.ndim - 8
    # J axes: c1 c2 r1 r2 c1' c2' r1' r2'  ->  r1 c1 r2 c2 r1' c1' r2' c2'
    axes = tuple(range(lead)) + tuple(lead + k for k in (2, 0, 3, 1, 6, 4, 7, 5))
    return t.transpose(axes).reshape(j.shape)


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, QState):
        return rho.matrix
    if isinstance(rho, PureState):
        return projector(rho.vector)
    return np.asarray(rho, dtype=complex)


def apply_process(chi: ProcMat, rho) -> QState:
    """Apply a process matrix to a two-qubit state."""
    if not isinstance(chi, ProcMat):
        chi = ProcMat(chi)
    m = _as_matrix(rho)
    if m.shape != (4, 4):
        raise ValidationError(f"process acts on 4x4 states, got {m.shape}")
    if not chi.check:
        lam = chi.min_eigenvalue
        if lam < -linalg.PSD_TOL:
            raise ValidationError(f"process matrix not PSD (min eigenvalue {lam:.3g})")
    out = linalg.hermitize(apply_chi(chi.matrix, m))
    label = rho.label if isinstance(rho, (QState, PureState)) else None
    return QState(out, label, check_trace=False)


def partial_transpose(rho, subsystem: int | Sequence[int] = 1, dims: Sequence[int] | None = None) -> np.ndarray:
    """Transpose the chosen tensor factor(s).

    ``dims`` defaults to qubits.  Returns a plain Hermitian array.
    """
    m = _as_matrix(rho)
    d = m.shape[0]
    if dims is None:
        if not _is_power_of_two(d) or d < 2:
            raise ValidationError(f"dimension {d} does not factor into qubits")
        dims = [2] * (d.bit_length() - 1)
    dims = list(dims)
    if int(np.prod(dims)) != d:
        raise ValidationError(f"subsystem dims {dims} do not multiply to {d}")
    subs = [subsystem] if isinstance(subsystem, (int, np.integer)) else list(subsystem)
    n = len(dims)
    for s in subs:
        if not 0 <= s < n:
            raise ValidationError(f"subsystem {s} out of range for {n} factors")
    t = m.reshape(dims + dims)
    axes = list(range(2 * n))
    for s in subs:
        axes[s], axes[n + s] = axes[n + s], axes[s]
    return t.transpose(axes).reshape(d, d)


def min_pt_eig(rho, subsystem: int | Sequence[int] = 1, dims: Sequence[int] | None = None) -> float:
    return linalg.min_eig(partial_transpose(rho, subsystem, dims))


def is_ppt(rho, tol: float = linalg.PSD_TOL, **kwargs) -> bool:
    return min_pt_eig(rho, **kwargs) >= -tol


# -- fidelities ---------------------------------------------------------------

def state_fidelity_pure(rho, target: PureState | np.ndarray) -> float:
    vec = target.vector if isinstance(target, PureState) else np.asarray(target, dtype=complex)
    m = _as_matrix(rho)
    if m.shape[0] != vec.size:
        raise ValidationError(f"dimension mismatch: state {m.shape[0]}, target {vec.size}")
    return float(np.real(np.conj(vec) @ m @ vec))


def uhlmann_fidelity(rho, sigma) -> float:
    """``tr sqrt(sqrt(rho) sigma sqrt(rho))`` (not squared)."""
    a = _as_matrix(rho)
    b = _as_matrix(sigma)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    s = linalg.psd_sqrt(a)
    inner = linalg.hermitize(s @ b @ s)
    w = linalg.eigvalsh(inner)
    return float(min(1.0, np.sum(np.sqrt(np.clip(w, 0.0, None)))))


def process_fidelity(chi_a: ProcMat, chi_b: ProcMat) -> float:
    a = chi_a.matrix if isinstance(chi_a, ProcMat) else np.asarray(chi_a)
    b = chi_b.matrix if isinstance(chi_b, ProcMat) else np.asarray(chi_b)
    return float(np.real(np.trace(a @ b)))


# -- multi-qubit embedding ---------------------------------------------------

@dataclass(frozen=True)
class EmbeddedProcess:
    """A two-qubit process acting on qubits ``(i, j)`` of an n-qubit register."""

    chi: np.ndarray
    qubits: tuple[int, int]
    n_qubits: int

    def __call__(self, rho) -> np.ndarray:
        m = _as_matrix(rho)
        n = self.n_qubits
        if m.shape != (2**n, 2**n):
            raise ValidationError(f"expected {2**n}x{2**n} state, got {m.shape}")
        i, j = self.qubits
        t = m.reshape((2,) * (2 * n))
        # sublist einsum: chi[r_i, c_i, r_j, c_j, r_i', c_i', r_j', c_j']
        rho_idx = list(range(2 * n))
        out_idx = list(range(2 * n))
        base = 2 * n
        ri, ci, rj, cj, rpi, cpi, rpj, cpj = range(base, base + 8)
        rho_idx[i], rho_idx[j], rho_idx[n + i], rho_idx[n + j] = ci, cj, cpi, cpj
        out_idx[i], out_idx[j], out_idx[n + i], out_idx[n + j] = ri, rj, rpi, rpj
        chi_idx = [ri, ci, rj, cj, rpi, cpi, rpj, cpj]
        out = np.einsum(chi_tensor(self.chi), chi_idx, t, rho_idx, out_idx, optimize=True)
        return out.reshape(2**n, 2**n)

    def then(self, other: EmbeddedProcess) -> ProcessSequence:
        return ProcessSequence((self, other))


@dataclass(frozen=True)
class ProcessSequence:
    stages: tuple[EmbeddedProcess, ...]

    def __call__(self, rho) -> np.ndarray:
        m = _as_matrix(rho)
        for stage in self.stages:
            m = stage(m)
        return m

    def then(self, other: EmbeddedProcess) -> ProcessSequence:
        return ProcessSequence(self.stages + (other,))


def embed_pair_process(chi: ProcMat | np.ndarray, qubits: tuple[int, int], n_qubits: int) -> EmbeddedProcess:
    i, j = (int(q) for q in qubits)
    if i == j:
        raise ValidationError(f"qubit indices collide: {qubits}")
    if not (0 <= i < n_qubits and 0 <= j < n_qubits):
        raise ValidationError(f"qubits {qubits} out of range for {n_qubits} qubits")
    mat = chi.matrix if isinstance(chi, ProcMat) else np.asarray(chi, dtype=complex)
    return EmbeddedProcess(mat, (i, j), int(n_qubits))


# -- named states ---------------------------------------------------------------

def bell_state(name: str) -> PureState:
    vecs = {
        "phi+": (ket("00") + ket("11")) / SQRT2,
        "phi-": (ket("00") - ket("11")) / SQRT2,
        "psi+": (ket("01") + ket("10")) / SQRT2,
        "psi-": (ket("01") - ket("10")) / SQRT2,
        "phi+i": (ket("00") + 1j * ket("11")) / SQRT2,
        "psi+i": (ket("01") + 1j * ket("10")) / SQRT2,
    }
    try:
        return PureState(vecs[name], name)
    except KeyError:
        raise ValidationError(f"unknown Bell state {name!r}") from None


def ghz_state(pattern: str, phase: int = +1) -> PureState:
    """``(|pattern> + phase |complement>)/sqrt(2)`` over H/V (or 0/1) labels."""
    flip = str.maketrans("HV01", "VH10")
    comp = pattern.translate(flip)
    vec = (ket(pattern) + phase * ket(comp)) / SQRT2
    sign = "+" if phase > 0 else "-"
    return PureState(vec, f"{pattern}{sign}{comp}")


# -- serialisation ---------------------------------------------------------------

def _fmt(x: float) -> float:
    return float(f"{x:.12g}")


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[_fmt(z.real), _fmt(z.imag)] for z in row] for row in m]


def matrix_from_json(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ValidationError("matrix must be a 2-D array of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def procmat_to_dict(chi: ProcMat) -> dict:
    return {"schema": "qpc/1", "kind": "procmat", "dim": 16, "normalized": chi.normalized,
            "matrix": matrix_to_json(chi.matrix)}


def procmat_from_dict(d: dict) -> ProcMat:
    if d.get("dim", 16) != 16:
        raise ValidationError(f"process matrix dim must be 16, got {d.get('dim')}")
    m = matrix_from_json(d["matrix"])
    return ProcMat(m, normalized=bool(d.get("normalized", False)))


def qstate_to_dict(rho: QState) -> dict:
    return {"schema": "qpc/1", "kind": "qstate", "dim": rho.dim, "label": rho.label,
            "matrix": matrix_to_json(rho.matrix)}


def qstate_from_dict(d: dict) -> QState:
    m = matrix_from_json(d["matrix"])
    if "dim" in d and m.shape[0] != d["dim"]:
        raise ValidationError(f"declared dim {d['dim']} but matrix is {m.shape}")
    return QState(m, d.get("label"))
