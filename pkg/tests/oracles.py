"""Independent reference implementations used only by the tests.

Nothing here imports the package.  The process action is a brute-force sum
over matrix units indexed by ``m - 1 = 8 r1 + 4 c1 + 2 r2 + c2`` and the SDPs
are posed over a real parametrisation and handed to cvxpy.
"""

from __future__ import annotations

import functools
import itertools

import cvxpy as cp
import numpy as np

K0 = np.array([1, 0], dtype=complex)
K1 = np.array([0, 1], dtype=complex)
KETS = {
    "0": K0, "1": K1, "H": K0, "V": K1,
    "+": (K0 + K1) / np.sqrt(2), "-": (K0 - K1) / np.sqrt(2),
    "R": (K0 + 1j * K1) / np.sqrt(2), "L": (K0 - 1j * K1) / np.sqrt(2),
}


def ket(label):
    return functools.reduce(np.kron, [KETS[ch] for ch in label])


def proj(v):
    return np.outer(v, v.conj())


def chi_index(row: int, col: int) -> int:
    """Zero-based chi index of the matrix unit |row><col| on two qubits."""
    r1, r2 = divmod(row, 2)
    c1, c2 = divmod(col, 2)
    return 8 * r1 + 4 * c1 + 2 * r2 + c2


def apply_chi_oracle(chi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Brute-force sum over chi entries of E_m rho E_n^dagger."""
    units = []
    for m in range(16):
        e = np.zeros((4, 4), dtype=complex)
        for r, c in itertools.product(range(4), range(4)):
            if chi_index(r, c) == m:
                e[r, c] = 1.0
        units.append(e)
    out = np.zeros((4, 4), dtype=complex)
    for m, n in itertools.product(range(16), range(16)):
        if chi[m, n] != 0:
            out += chi[m, n] * units[m] @ rho @ units[n].conj().T
    return out


def product_inputs():
    return ["".join(p) for p in itertools.product("01+-RL", repeat=2)]


ENTANGLED = {
    "phi+": (ket("00") + ket("11")) / np.sqrt(2),
    "phi+i": (ket("00") + 1j * ket("11")) / np.sqrt(2),
    "psi+": (ket("01") + ket("10")) / np.sqrt(2),
    "psi+i": (ket("01") + 1j * ket("10")) / np.sqrt(2),
}


def incapable_inputs(kind: str):
    rhos = [proj(ket(lab)) for lab in product_inputs()]
    if kind == "preservation":
        rhos += [proj(v) for v in ENTANGLED.values()]
    return rhos


@functools.lru_cache(maxsize=None)
def _herm_basis(n: int) -> np.ndarray:
    out = []
    for j in range(n):
        for k in range(j, n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = e[k, j] = 1.0
            out.append(e)
            if k != j:
                e = np.zeros((n, n), dtype=complex)
                e[j, k], e[k, j] = 1j, -1j
                out.append(e)
    return np.array(out)


def _embed(m: np.ndarray) -> np.ndarray:
    """Real symmetric embedding [[Re, -Im], [Im, Re]] of a stack of Hermitian matrices."""
    re, im = m.real, m.imag
    top = np.concatenate([re, -im], axis=-1)
    bot = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bot], axis=-2)


@functools.lru_cache(maxsize=None)
def _pt_maps(kind: str) -> np.ndarray:
    """(inputs, 8, 8, 256): embedded PT of the output of each basis element."""
    basis = _herm_basis(16)
    rhos = incapable_inputs(kind)
    out = np.empty((len(rhos), 8, 8, len(basis)))
    for q, b in enumerate(basis):
        for i, rho in enumerate(rhos):
            pt = apply_chi_oracle(b, rho).reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
            out[i, :, :, q] = _embed(pt)
    return out


def _lmi(const: np.ndarray, lin: np.ndarray, p: cp.Variable):
    """const + sum_q p_q lin[..., q] >> 0 for real symmetric stacks."""
    n = const.shape[0]
    expr = const + cp.reshape(lin.reshape(n * n, -1) @ p, (n, n), order="C")
    return (expr + expr.T) / 2 >> 0


def _incapable_cons(p: cp.Variable, kind: str):
    basis = _embed(_herm_basis(16))
    lin = np.moveaxis(basis, 0, -1)
    cons = [_lmi(np.zeros((32, 32)), lin, p)]
    for block in _pt_maps(kind):
        cons.append(_lmi(np.zeros((8, 8)), block, p))
    return cons, lin


def _trace_vec() -> np.ndarray:
    return np.real(np.einsum("qaa->q", _herm_basis(16)))


def _solve(prob, solver=None):
    prob.solve(solver=solver or cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"oracle solver status {prob.status}")
    return float(prob.value)


def alpha_oracle(chi: np.ndarray, kind: str = "creation", solver=None, return_x: bool = False):
    p = cp.Variable(256)
    cons, lin = _incapable_cons(p, kind)
    cons.append(_lmi(_embed(chi), -lin, p))
    prob = cp.Problem(cp.Minimize(1 - _trace_vec() @ p), cons)
    val = _solve(prob, solver)
    if return_x:
        return val, np.tensordot(p.value, _herm_basis(16), axes=1)
    return val


def beta_oracle(chi: np.ndarray, kind: str = "creation", solver=None) -> float:
    p = cp.Variable(256)
    cons, lin = _incapable_cons(p, kind)
    cons.append(_lmi(-_embed(chi), lin, p))
    prob = cp.Problem(cp.Minimize(_trace_vec() @ p - 1), cons)
    return _solve(prob, solver)


def fidelity_threshold_oracle(target: np.ndarray, kind: str = "creation", solver=None) -> float:
    p = cp.Variable(256)
    cons, _ = _incapable_cons(p, kind)
    cons.append(_trace_vec() @ p == 1)
    tvec = np.real(np.einsum("ab,qba->q", target, _herm_basis(16)))
    prob = cp.Problem(cp.Maximize(tvec @ p), cons)
    return _solve(prob, solver)


def ppt_feasible_oracle(rho: np.ndarray) -> bool:
    """Is there a separable-by-PPT sigma equal to rho?  Posed as an SDP feasibility problem."""
    s = cp.Variable((4, 4), hermitian=True)
    pt = cp.partial_transpose(s, [2, 2], axis=1)
    prob = cp.Problem(cp.Minimize(0), [s >> 0, (pt + pt.H) / 2 >> 0, s == rho])
    prob.solve(solver=cp.CLARABEL)
    return prob.status in ("optimal", "optimal_inaccurate")


def pt_min_eig_oracle(rho: np.ndarray) -> float:
    """Partial transpose on the second qubit by explicit index swapping."""
    t = rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
    return float(np.linalg.eigvalsh(t).min())


def ghz_vector(pattern: str, phase: int) -> np.ndarray:
    comp = pattern.translate(str.maketrans("HV", "VH"))
    return (ket(pattern) + phase * ket(comp)) / np.sqrt(2)
