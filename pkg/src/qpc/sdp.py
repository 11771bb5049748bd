"""Small dense semidefinite programs over complex Hermitian variables.

Problems are written with :class:`SdpProblem`: declare Hermitian variables,
build affine Hermitian expressions from them, require some expressions to be
PSD, fix real scalar expressions with equalities and optimise a real scalar
expression.  Internally every variable is expanded in an orthonormal
Hermitian basis, giving a real parameter vector ``y``; the problem becomes

    minimise  c.y   s.t.  S_b = C_b - sum_i y_i A_bi  >= 0,   G y = h

with complex blocks passed through :func:`real_embedding`.  It is solved by an
infeasible-start primal-dual interior-point method using the Nesterov-Todd
scaling and a Mehrotra predictor-corrector step.
"""

from __future__ import annotations

import functools
import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ValidationError
from .linalg import real_embedding

log = logging.getLogger(__name__)

__all__ = [
    "Affine",
    "SdpProblem",
    "SdpSolution",
    "Variable",
    "hermitian_basis",
    "real_embedding",
    "solve",
]

DEFAULT_TOL = 1e-7
MAX_ITER = 500
INFEASIBILITY_TOL = 1e-8
REFINE_STEPS = 2
# a stalled run whose best iterate is within this factor of tol is reported as optimal_inaccurate
INACCURATE_FACTOR = 100.0


@functools.lru_cache(maxsize=None)
def _hermitian_basis(n: int) -> np.ndarray:
    basis = []
    for j in range(n):
        b = np.zeros((n, n), dtype=complex)
        b[j, j] = 1.0
        basis.append(b)
    s = 1.0 / np.sqrt(2.0)
    for j in range(n):
        for k in range(j + 1, n):
            b = np.zeros((n, n), dtype=complex)
            b[j, k] = b[k, j] = s
            basis.append(b)
    for j in range(n):
        for k in range(j + 1, n):
            b = np.zeros((n, n), dtype=complex)
            b[j, k] = -1j * s
            b[k, j] = 1j * s
            basis.append(b)
    out = np.array(basis)
    out.setflags(write=False)
    return out


def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal basis (under ``Re tr(A B)``) of n x n Hermitian matrices."""
    return _hermitian_basis(int(n))


@dataclass(frozen=True, eq=False)
class Variable:
    name: str
    dim: int

    @property
    def nparams(self) -> int:
        return self.dim * self.dim

    def from_params(self, y: np.ndarray) -> np.ndarray:
        return np.tensordot(y, hermitian_basis(self.dim), axes=1)

    def to_params(self, x: np.ndarray) -> np.ndarray:
        return np.real(np.einsum("kab,ba->k", hermitian_basis(self.dim), x))


class Affine:
    """Affine map from the declared variables to k x k Hermitian matrices."""

    __array_priority__ = 1000

    def __init__(self, const: np.ndarray, terms: dict | None = None):
        self.const = np.asarray(const, dtype=complex)
        if self.const.ndim != 2 or self.const.shape[0] != self.const.shape[1]:
            raise ValidationError(f"affine expression must be square, got {self.const.shape}")
        self.terms: dict[Variable, np.ndarray] = dict(terms or {})

    @classmethod
    def of(cls, var: Variable) -> Affine:
        return cls(np.zeros((var.dim, var.dim), dtype=complex), {var: np.array(hermitian_basis(var.dim))})

    @property
    def size(self) -> int:
        return self.const.shape[0]

    @property
    def variables(self) -> list[Variable]:
        return list(self.terms)

    def _coerce(self, other) -> Affine:
        if isinstance(other, Affine):
            return other
        arr = np.asarray(other, dtype=complex)
        if arr.ndim == 0:
            if self.size != 1:
                raise ValidationError("only 1x1 expressions combine with scalars")
            arr = arr.reshape(1, 1)
        return Affine(arr)

    def __add__(self, other) -> Affine:
        other = self._coerce(other)
        if other.size != self.size:
            raise ValidationError(f"size mismatch {self.size} vs {other.size}")
        terms = dict(self.terms)
        for v, c in other.terms.items():
            terms[v] = terms[v] + c if v in terms else c
        return Affine(self.const + other.const, terms)

    __radd__ = __add__

    def __neg__(self) -> Affine:
        return Affine(-self.const, {v: -c for v, c in self.terms.items()})

    def __sub__(self, other) -> Affine:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> Affine:
        return self._coerce(other) - self

    def __mul__(self, other) -> Affine:
        arr = np.asarray(other)
        if arr.ndim == 0:
            a = float(np.real(arr))
            return Affine(a * self.const, {v: a * c for v, c in self.terms.items()})
        if self.size != 1:
            raise ValidationError("only 1x1 expressions can scale a matrix")
        m = np.asarray(arr, dtype=complex)
        return Affine(self.const[0, 0] * m, {v: c[:, 0, 0, None, None] * m for v, c in self.terms.items()})

    __rmul__ = __mul__

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> Affine:
        """Apply a linear map acting on stacks ``(..., k, k)``."""
        return Affine(fn(self.const), {v: fn(c) for v, c in self.terms.items()})

    def trace(self) -> Affine:
        return self.map(lambda m: np.trace(m, axis1=-2, axis2=-1)[..., None, None])

    def inner(self, c: np.ndarray) -> Affine:
        """``tr(C X)`` for a constant Hermitian ``C``."""
        c = np.asarray(c, dtype=complex)
        return self.map(lambda m: np.einsum("ab,...ba->...", c, m)[..., None, None])

    def value(self, assignment: dict) -> np.ndarray:
        out = self.const.copy()
        for v, c in self.terms.items():
            out = out + np.tensordot(v.to_params(assignment[v.name]), c, axes=1)
        return out


@dataclass
class _Constraint:
    expr: Affine
    name: str
    rhs: float = 0.0


@dataclass
class SdpSolution:
    status: str
    value: float
    assignments: dict[str, np.ndarray]
    duality_gap: float
    max_violation: float
    iterations: int = 0
    dual_value: float = float("nan")
    history: list = field(default_factory=list, repr=False)
    certificate: dict | None = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status in ("optimal", "optimal_inaccurate")

    def certificates(self) -> dict:
        return {"status": self.status, "value": self.value, "dual_value": self.dual_value,
                "duality_gap": self.duality_gap, "max_violation": self.max_violation,
                "iterations": self.iterations}


class SdpProblem:
    def __init__(self):
        self.variables: list[Variable] = []
        self.psd_constraints: list[_Constraint] = []
        self.eq_constraints: list[_Constraint] = []
        self.sense = "min"
        self.objective: Affine | None = None

    def variable(self, name: str, dim: int) -> Affine:
        if any(v.name == name for v in self.variables):
            raise ValidationError(f"duplicate variable {name!r}")
        var = Variable(name, int(dim))
        self.variables.append(var)
        return Affine.of(var)

    def _check_vars(self, expr: Affine):
        for v in expr.terms:
            if v not in self.variables:
                raise ValidationError(f"expression references undeclared variable {v.name!r}")

    def add_psd(self, expr: Affine, name: str | None = None):
        self._check_vars(expr)
        self.psd_constraints.append(_Constraint(expr, name or f"psd{len(self.psd_constraints)}"))

    def add_eq(self, expr: Affine, rhs: float, name: str | None = None):
        self._check_vars(expr)
        if expr.size != 1:
            raise ValidationError("equality constraints must be scalar expressions")
        self.eq_constraints.append(_Constraint(expr, name or f"eq{len(self.eq_constraints)}", float(rhs)))

    def minimize(self, expr: Affine):
        self._set_objective(expr, "min")

    def maximize(self, expr: Affine):
        self._set_objective(expr, "max")

    def _set_objective(self, expr: Affine, sense: str):
        self._check_vars(expr)
        if expr.size != 1:
            raise ValidationError("objective must be a scalar expression")
        self.objective = expr
        self.sense = sense

    def compile(self) -> _StandardForm:
        return _StandardForm(self)

    def to_dict(self) -> dict:
        """Self-describing dump of the compiled real problem."""
        sf = self.compile()
        blocks = []
        for b in sf.blocks:
            blocks.append({
                "name": b.name, "size": int(b.C.shape[0]), "embedded": b.embedded,
                "const": b.C.tolist(), "param_index": b.idx.tolist(),
                "coeffs": (-b.A).tolist(),
            })
        return {
            "schema": "qpc/1", "kind": "sdp",
            "form": "minimise c.y + c0 s.t. const + sum_i y_i coeffs_i >= 0 (PSD), G y = h",
            "variables": [{"name": v.name, "dim": v.dim, "offset": int(sf.offsets[v.name]),
                           "nparams": v.nparams} for v in self.variables],
            "sense": self.sense, "c": sf.c.tolist(), "c0": sf.c0,
            "psd_blocks": blocks, "G": sf.G.tolist(), "h": sf.h.tolist(),
        }


@dataclass
class _Block:
    name: str
    C: np.ndarray
    A: np.ndarray
    idx: np.ndarray
    embedded: bool


class _StandardForm:
    def __init__(self, problem: SdpProblem):
        if problem.objective is None:
            raise ValidationError("problem has no objective")
        self.problem = problem
        self.offsets = {}
        p = 0
        for v in problem.variables:
            self.offsets[v.name] = p
            p += v.nparams
        self.p = p
        self.blocks = [self._block(c) for c in problem.psd_constraints]
        g_rows, h = [], []
        for c in problem.eq_constraints:
            row, const = self._scalar(c.expr, c.name)
            g_rows.append(row)
            h.append(c.rhs - const)
        self.G = np.array(g_rows).reshape(len(g_rows), p)
        self.h = np.array(h, dtype=float)
        c, c0 = self._scalar(problem.objective, "objective")
        self.sign = 1.0 if problem.sense == "min" else -1.0
        self.c = self.sign * c
        self.c0 = self.sign * c0

    def _scalar(self, expr: Affine, name: str):
        row = np.zeros(self.p)
        imag = abs(expr.const[0, 0].imag)
        for v, coef in expr.terms.items():
            o = self.offsets[v.name]
            row[o:o + v.nparams] += coef[:, 0, 0].real
            imag = max(imag, float(np.max(np.abs(coef[:, 0, 0].imag))))
        if imag > 1e-10:
            raise ValidationError(f"{name}: expression is not real-valued (imag {imag:.3g})")
        return row, float(expr.const[0, 0].real)

    def _block(self, con: _Constraint) -> _Block:
        expr = con.expr
        idx, coefs = [], []
        for v, coef in expr.terms.items():
            o = self.offsets[v.name]
            idx.append(np.arange(o, o + v.nparams))
            coefs.append(coef)
        k = expr.size
        if idx:
            idx = np.concatenate(idx)
            coef = np.concatenate(coefs)
        else:
            idx = np.zeros(0, dtype=int)
            coef = np.zeros((0, k, k), dtype=complex)
        order = np.argsort(idx, kind="stable")
        idx, coef = idx[order], coef[order]
        # merge duplicate parameter indices
        uniq, inv = np.unique(idx, return_inverse=True)
        if uniq.size != idx.size:
            merged = np.zeros((uniq.size, k, k), dtype=complex)
            np.add.at(merged, inv, coef)
            idx, coef = uniq, merged
        const = 0.5 * (expr.const + expr.const.conj().T)
        coef = 0.5 * (coef + np.conj(np.swapaxes(coef, -1, -2)))
        embedded = bool(np.max(np.abs(const.imag), initial=0.0) > 0.0
                        or np.max(np.abs(coef.imag), initial=0.0) > 0.0)
        if embedded:
            C, A = real_embedding(const), -real_embedding(coef)
        else:
            C, A = const.real.copy(), -coef.real
        return _Block(con.name, C, A, idx, embedded)


class _Group:
    """Blocks of equal size touching the same parameters, processed together."""

    def __init__(self, blocks: list[_Block]):
        self.blocks = blocks
        self.idx = blocks[0].idx
        self.C = np.stack([b.C for b in blocks])
        self.A = np.stack([b.A for b in blocks])
        self.n = self.C.shape[-1]
        self.g = len(blocks)
        self.Aflat = self.A.reshape(self.g, self.A.shape[1], -1)

    def op(self, y):  # sum_i y_i A_i
        return np.einsum("gqab,q->gab", self.A, y[self.idx])

    def adj(self, x, out):  # out[idx] += <A_i, X>
        out[self.idx] += np.einsum("gqk,gk->q", self.Aflat, x.reshape(self.g, -1))


def _sym(m):
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def _groups(blocks: list[_Block]) -> list[_Group]:
    keyed: dict = {}
    for b in blocks:
        key = (b.C.shape[0], b.idx.tobytes())
        keyed.setdefault(key, []).append(b)
    return [_Group(v) for v in keyed.values()]


def _max_step(lam_isqrt, d):
    """Largest alpha with Lambda + alpha*d >= 0 (scaled, Lambda diagonal)."""
    m = lam_isqrt[:, :, None] * d * lam_isqrt[:, None, :]
    w = np.linalg.eigvalsh(_sym(m))
    worst = float(np.max(-w[:, 0]))
    return np.inf if worst <= 0 else 1.0 / worst


def solve(problem: SdpProblem, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> SdpSolution:
    """Solve ``problem``; see :class:`SdpSolution` for the returned fields."""
    sf = problem.compile()
    p = sf.p
    groups = _groups(sf.blocks)
    if not groups:
        raise ValidationError("problem has no PSD constraints")
    n_total = sum(gr.g * gr.n for gr in groups)

    # reduce equalities to an independent, consistent set
    G, h = sf.G, sf.h
    if G.shape[0]:
        u, s, vt = np.linalg.svd(G, full_matrices=False)
        r = int(np.sum(s > 1e-10 * max(1.0, s[0])))
        resid = h - u[:, :r] @ (u[:, :r].T @ h)
        if np.linalg.norm(resid) > 1e-9 * (1.0 + np.linalg.norm(h)):
            return _trivial_infeasible(problem, sf, "equality constraints are inconsistent")
        G = s[:r, None] * vt[:r]
        h = u[:, :r].T @ h
    me = G.shape[0]

    c = sf.c
    norm_c = np.linalg.norm(c)
    norm_h = np.linalg.norm(h)
    norm_C = np.sqrt(sum(np.sum(gr.C**2) for gr in groups))

    # deterministic identity-scaled start
    X, S = [], []
    for gr in groups:
        a_norms = np.sqrt(np.sum(gr.Aflat**2, axis=(0, 2)))
        bk = np.abs(c[gr.idx])
        sq = np.sqrt(gr.n)
        xi = max(10.0, sq, sq * float(np.max((1.0 + bk) / (1.0 + a_norms), initial=0.0)))
        eta = max(10.0, sq, float(np.linalg.norm(gr.C.reshape(gr.g, -1), axis=1).max()),
                  float(a_norms.max(initial=0.0)))
        eye = np.broadcast_to(np.eye(gr.n), (gr.g, gr.n, gr.n))
        X.append(xi * eye.copy())
        S.append(eta * eye.copy())
    y = np.zeros(p)
    mu_eq = np.zeros(me)

    history = []
    status = "max_iter"
    best = None
    it = 0
    for it in range(1, max_iter + 1):
        # residuals
        rp = [S[k] + groups[k].op(y) - groups[k].C for k in range(len(groups))]
        ax = np.zeros(p)
        for k, gr in enumerate(groups):
            gr.adj(X[k], ax)
        rd = ax + c - G.T @ mu_eq
        re = G @ y - h
        xs = sum(float(np.sum(X[k] * S[k])) for k in range(len(groups)))
        assert xs >= 0.0, "weak duality violated: <X, S> < 0"
        pobj = float(c @ y)
        cx = sum(float(np.sum(groups[k].C * X[k])) for k in range(len(groups)))
        dobj = -cx + float(h @ mu_eq)
        pres = np.sqrt(sum(float(np.sum(r * r)) for r in rp)) / (1.0 + norm_C)
        dres = np.linalg.norm(rd) / (1.0 + norm_c)
        eres = np.linalg.norm(re) / (1.0 + norm_h) if me else 0.0
        gap = max(xs, abs(pobj - dobj))
        history.append({"iter": it, "pobj": pobj + sf.c0, "dobj": dobj + sf.c0, "xs": xs,
                        "pres": pres, "dres": dres, "eres": eres})
        score = max(pres, dres, eres, gap / max(1.0, abs(pobj)))
        if best is None or score < best[0]:
            best = (score, y.copy(), mu_eq.copy(), pobj, dobj)
        if max(pres, dres, eres) <= tol and gap <= tol * max(1.0, abs(pobj)):
            status = "optimal"
            break
        # infeasibility: a dual ray proves the LMI system has no solution
        ray = ax - G.T @ mu_eq
        if dobj > 0 and np.linalg.norm(ray) <= INFEASIBILITY_TOL * dobj and (pres > tol or eres > tol):
            status = "infeasible"
            break
        # Nesterov-Todd scaling
        R, lam, W = [], [], []
        for k in range(len(groups)):
            try:
                ls = np.linalg.cholesky(S[k])
                lx = np.linalg.cholesky(X[k])
            except np.linalg.LinAlgError:
                status = "numerical_error"
                break
            u_, sv, vt_ = np.linalg.svd(np.swapaxes(lx, -1, -2) @ ls)
            r_ = np.linalg.solve(np.swapaxes(ls, -1, -2), np.swapaxes(vt_, -1, -2) * np.sqrt(sv)[:, None, :])
            R.append(r_)
            lam.append(sv)
            W.append(r_ @ np.swapaxes(r_, -1, -2))
        if status == "numerical_error":
            break

        # Schur complement and KKT factorisation
        M = np.zeros((p, p))
        with np.errstate(over="ignore", invalid="ignore"):
            for k, gr in enumerate(groups):
                wk = W[k][:, None]
                B = (wk @ gr.A @ wk).reshape(gr.g, gr.A.shape[1], -1)
                M[np.ix_(gr.idx, gr.idx)] += np.tensordot(gr.Aflat, B, axes=([0, 2], [0, 2]))
        if not np.all(np.isfinite(M)):
            status = "numerical_error"
            break
        M = 0.5 * (M + M.T)
        K = np.zeros((p + me, p + me))
        K[:p, :p] = M
        K[:p, p:] = -G.T
        K[p:, :p] = G
        K[:p, :p] += 1e-14 * max(1.0, float(np.trace(M)) / p) * np.eye(p)
        try:
            lu = scipy.linalg.lu_factor(K, check_finite=False)
        except (ValueError, np.linalg.LinAlgError):
            status = "numerical_error"
            break

        wrpw = [W[k] @ rp[k] @ W[k] for k in range(len(groups))]
        a_wrpw = np.zeros(p)
        for k, gr in enumerate(groups):
            gr.adj(wrpw[k], a_wrpw)
        mu = xs / n_total

        def direction(rc):
            # rc: complementarity rhs in scaled space, per group
            D = [2.0 * rc[k] / (lam[k][:, :, None] + lam[k][:, None, :]) for k in range(len(groups))]
            rdr = [R[k] @ D[k] @ np.swapaxes(R[k], -1, -2) for k in range(len(groups))]
            a_rdr = np.zeros(p)
            for k, gr in enumerate(groups):
                gr.adj(rdr[k], a_rdr)
            rhs = np.concatenate([-rd - a_rdr - a_wrpw, -re])
            sol = scipy.linalg.lu_solve(lu, rhs, check_finite=False)
            for _ in range(REFINE_STEPS + 1):
                dy, dmu = sol[:p], sol[p:]
                dS = [-groups[k].op(dy) - rp[k] for k in range(len(groups))]
                dSt = [np.swapaxes(R[k], -1, -2) @ dS[k] @ R[k] for k in range(len(groups))]
                dXt = [D[k] - dSt[k] for k in range(len(groups))]
                dX = [R[k] @ dXt[k] @ np.swapaxes(R[k], -1, -2) for k in range(len(groups))]
                # residual of the linearised feasibility equations, evaluated with the true operators
                a_dx = np.zeros(p)
                for k, gr in enumerate(groups):
                    gr.adj(dX[k], a_dx)
                res = np.concatenate([a_dx - G.T @ dmu + rd, G @ dy + re])
                if np.linalg.norm(res) <= 1e-14 * (1.0 + np.linalg.norm(rhs)):
                    break
                sol = sol - scipy.linalg.lu_solve(lu, res, check_finite=False)
            return dy, dmu, dS, dX, dSt, dXt

        def steps(dSt, dXt):
            ap, ad = np.inf, np.inf
            for k in range(len(groups)):
                isq = 1.0 / np.sqrt(lam[k])
                ap = min(ap, _max_step(isq, _sym(dSt[k])))
                ad = min(ad, _max_step(isq, _sym(dXt[k])))
            return ap, ad

        try:
            with np.errstate(over="ignore", invalid="ignore"):
                lam2 = [np.einsum("gi,ij->gij", lam[k] ** 2, np.eye(groups[k].n)) for k in range(len(groups))]
                # predictor
                rc = [-lam2[k] for k in range(len(groups))]
                dy, dmu, dS, dX, dSt, dXt = direction(rc)
                ap, ad = steps(dSt, dXt)
                ap, ad = min(1.0, ap), min(1.0, ad)
                xs_aff = sum(float(np.sum((X[k] + ad * dX[k]) * (S[k] + ap * dS[k]))) for k in range(len(groups)))
                sigma = min(1.0, max(0.0, xs_aff / xs)) ** 3
                # corrector
                rc = []
                for k in range(len(groups)):
                    jordan = 0.5 * (dXt[k] @ dSt[k] + dSt[k] @ dXt[k])
                    eye = np.broadcast_to(np.eye(groups[k].n), lam2[k].shape)
                    rc.append(sigma * mu * eye - lam2[k] - jordan)
                dy, dmu, dS, dX, dSt, dXt = direction(rc)
                ap, ad = steps(dSt, dXt)
                ap = min(1.0, 0.98 * ap)
                ad = min(1.0, 0.98 * ad)
                y_new = y + ap * dy
                S_new = [_sym(S[k] + ap * dS[k]) for k in range(len(groups))]
                X_new = [_sym(X[k] + ad * dX[k]) for k in range(len(groups))]
                mu_new = mu_eq + ad * dmu
        except (ValueError, np.linalg.LinAlgError):
            status = "numerical_error"
            break
        if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(mu_new))
                and all(np.all(np.isfinite(m)) for m in S_new + X_new)):
            status = "numerical_error"
            break
        y, S, X, mu_eq = y_new, S_new, X_new, mu_new

    if status == "numerical_error":
        log.info("sdp: numerical breakdown at iteration %d; falling back to the best iterate", it)
        status = "max_iter"
    if status == "max_iter" and best is not None:
        score, y, mu_eq, pobj, dobj = best
        if score <= INACCURATE_FACTOR * tol:
            status = "optimal_inaccurate"
        else:
            log.warning("sdp: no convergence after %d iterations (best score %.3g)", it, score)
    return _finish(problem, sf, status, y, pobj, dobj, it, history, mu_eq,
                   X if status == "infeasible" else None)


def _assign(problem, sf, y):
    out = {}
    for v in problem.variables:
        o = sf.offsets[v.name]
        out[v.name] = v.from_params(y[o:o + v.nparams])
    return out


def _violation(sf, y):
    worst = 0.0
    for b in sf.blocks:
        s = b.C - np.tensordot(y[b.idx], b.A, axes=1)
        lam = float(np.linalg.eigvalsh(_sym(s))[0]) if s.size else 0.0
        worst = max(worst, -lam)
    if sf.G.shape[0]:
        worst = max(worst, float(np.max(np.abs(sf.G @ y - sf.h))))
    return worst


def _finish(problem, sf, status, y, pobj, dobj, iterations, history, mu_eq, x_ray):
    sign = sf.sign
    value = sign * (float(sf.c @ y) + sf.c0)
    dual_value = sign * (dobj + sf.c0)
    gap = float(pobj - dobj)
    violation = _violation(sf, y)
    if status.startswith("optimal") and violation > 1e-7:
        log.warning("solver converged but max violation is %.3g", violation)
    cert = None
    if status == "infeasible" and x_ray is not None:
        cert = {"dual_ray_objective": dobj}
    sol = SdpSolution(status, value, _assign(problem, sf, y), gap, violation, iterations,
                      dual_value, history, cert)
    log.debug("sdp %s after %d iterations: value %.10g gap %.3g violation %.3g",
              status, iterations, value, gap, violation)
    return sol


def _trivial_infeasible(problem, sf, reason):
    y = np.zeros(sf.p)
    return SdpSolution("infeasible", float("nan"), _assign(problem, sf, y), float("nan"),
                       _violation(sf, y), 0, float("nan"), [], {"reason": reason})
