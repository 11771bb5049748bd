import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpc.errors import ValidationError
from qpc.sdp import SdpProblem, hermitian_basis, solve
from qpc.quantum import min_pt_eig, partial_transpose
from qpc.multiphoton import werner_state


def _max_eig_problem(a):
    prob = SdpProblem()
    t = prob.variable("t", 1)
    prob.add_psd(t * np.eye(len(a)) - a)
    prob.minimize(t)
    return prob


@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_eigenvalue_lp(seed, n):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    a = g + g.conj().T
    sol = solve(_max_eig_problem(a))
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(np.linalg.eigvalsh(a).max(), abs=1e-6)
    assert sol.duality_gap <= 1e-6
    assert sol.max_violation <= 1e-7


def test_argmax_projector():
    prob = SdpProblem()
    x = prob.variable("X", 2)
    prob.add_psd(x)
    prob.add_eq(x.trace(), 1.0)
    prob.maximize(x.inner(np.diag([0.7, 0.3])))
    sol = solve(prob)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(0.7, abs=1e-7)
    np.testing.assert_allclose(sol.assignments["X"], np.diag([1, 0]), atol=1e-5)


def _ppt_problem(rho):
    prob = SdpProblem()
    s = prob.variable("sigma", 4)
    prob.add_psd(s)
    prob.add_psd(s.map(lambda m: np.stack([partial_transpose(mm) for mm in m.reshape(-1, 4, 4)]).reshape(m.shape)))
    basis = hermitian_basis(4)
    for k, b in enumerate(basis):
        prob.add_eq(s.inner(b), float(np.real(np.trace(b @ rho))), name=f"match{k}")
    prob.minimize(s.trace() * 0.0)
    return prob


@pytest.mark.parametrize("p_white", np.linspace(0.4, 0.9, 5))
def test_werner_ppt_feasibility_matches_pt_eig(p_white):
    rho = werner_state(p_white, 0.0).matrix
    sol = solve(_ppt_problem(rho))
    assert (sol.status == "optimal") == (min_pt_eig(rho) >= 0)


def test_infeasible_detected():
    prob = SdpProblem()
    x = prob.variable("X", 2)
    prob.add_psd(x)
    prob.add_eq(x.trace(), -1.0)
    prob.minimize(x.trace())
    sol = solve(prob)
    assert sol.status == "infeasible"
    assert not sol.optimal


def test_weak_duality_every_iterate():
    rng = np.random.default_rng(3)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    sol = solve(_max_eig_problem(g + g.conj().T))
    assert sol.history
    # infeasible start: the complementarity <X, S> carries the weak-duality gap on every iterate
    for h in sol.history:
        assert h["xs"] >= 0.0
    last = sol.history[-1]
    assert last["pobj"] >= last["dobj"] - 1e-7


def test_variable_order_invariance():
    c = np.diag([0.2, 0.5, 0.3]).astype(complex)

    def build(order):
        prob = SdpProblem()
        vs = {}
        for name in order:
            vs[name] = prob.variable(name, 3)
        prob.add_psd(vs["a"])
        prob.add_psd(vs["b"])
        prob.add_psd(np.eye(3) - vs["a"] - vs["b"])
        prob.maximize(vs["a"].inner(c) + vs["b"].inner(c.T @ np.diag([1, 2, 0.5])))
        return prob

    v1 = solve(build(["a", "b"])).value
    v2 = solve(build(["b", "a"])).value
    assert abs(v1 - v2) <= 10 * 1e-7


@given(st.floats(0.1, 10.0))
def test_objective_scaling(cst):
    a = np.array([[1, 0.5j], [-0.5j, 0.3]])
    prob = SdpProblem()
    x = prob.variable("X", 2)
    prob.add_psd(x)
    prob.add_eq(x.trace(), 1.0)
    prob.maximize(x.inner(a) * cst)
    sol = solve(prob)
    assert sol.value == pytest.approx(cst * np.linalg.eigvalsh(a).max(), rel=1e-6, abs=1e-7)


def test_real_valued_forms():
    prob = SdpProblem()
    x = prob.variable("X", 3)
    rng = np.random.default_rng(0)
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    h = g + g.conj().T
    expr = x.inner(h)
    y = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    val = expr.value({"X": y + y.conj().T})
    assert abs(val.imag).max() < 1e-10


def test_undeclared_variable_rejected():
    p1, p2 = SdpProblem(), SdpProblem()
    x = p1.variable("X", 2)
    with pytest.raises(ValidationError):
        p2.add_psd(x)
    with pytest.raises(ValidationError):
        p1.variable("X", 2)
    with pytest.raises(ValidationError):
        p1.add_eq(x, 1.0)


def test_hermitian_basis_orthonormal():
    b = hermitian_basis(3)
    gram = np.real(np.einsum("iab,jba->ij", b, b))
    np.testing.assert_allclose(gram, np.eye(9), atol=1e-14)


def test_problem_dump_is_self_describing():
    d = _max_eig_problem(np.diag([1.0, 2.0])).to_dict()
    assert d["kind"] == "sdp" and d["schema"] == "qpc/1"
    assert d["variables"][0]["name"] == "t"
