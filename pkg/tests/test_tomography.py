import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpc.errors import ValidationError
from qpc.quantum import (
    ProcMat,
    QState,
    bell_state,
    depolarizing_process,
    dephased_fusion,
    fusion_ideal,
    identity_process,
    ket,
    projector,
    uhlmann_fidelity,
)
from qpc.simulator import DetectionModel, generate_counts
from qpc.tomography import (
    BASES,
    CLASSICAL_PROBE_SET,
    ClassicalFidelities,
    STANDARD_LABELS,
    TomographyRecord,
    classical_fidelities,
    classical_fidelities_from_process,
    exact_outputs,
    f_lower_bound,
    linear_state_estimate,
    mle_fit,
    outcome_probabilities,
    qpt_from_record,
    qpt_linear_inversion,
    scale_output,
    standard_inputs,
    state_tomo_linear,
)
from conftest import random_chi, random_density


def _analytic_counts(rho, scale=1.0):
    return {b: scale * outcome_probabilities(rho, b) for b in BASES}


def test_standard_inputs_order():
    ins = standard_inputs()
    assert len(ins) == 16
    np.testing.assert_allclose(ins[0].vector, ket("00"))
    np.testing.assert_allclose(ins[5].vector, ket("11"))
    vecs = np.array([s.vector for s in ins])
    gram = np.abs(vecs.conj() @ vecs.T)
    assert np.all(gram[~np.eye(16, dtype=bool)] < 1 - 1e-9)


def test_scale_output_table_values():
    rho = QState(np.eye(4) / 4)
    assert scale_output(12379, 12379, rho).trace == pytest.approx(1.0)
    assert scale_output(1583, 12379, rho).trace == pytest.approx(0.127878, abs=5e-7)
    assert scale_output(5451, 12379, rho).trace == pytest.approx(0.440343, abs=5e-7)


def test_state_tomography_noiseless_bell():
    phi = projector(bell_state("phi+").vector)
    est = state_tomo_linear(_analytic_counts(phi, 1000.0))
    np.testing.assert_allclose(est.matrix, phi, atol=1e-9)


def test_state_tomography_uniform_counts():
    est = state_tomo_linear({b: np.ones(4) for b in BASES})
    np.testing.assert_allclose(est.matrix, np.eye(4) / 4, atol=1e-12)


def test_state_tomography_poisson_psi_minus():
    psi = projector(bell_state("psi-").vector)
    rng = np.random.default_rng(7)
    counts = {b: rng.poisson(1e5 * outcome_probabilities(psi, b)) for b in BASES}
    est = state_tomo_linear(counts)
    assert np.real(bell_state("psi-").vector.conj() @ est.matrix @ bell_state("psi-").vector) >= 0.995


def test_state_tomography_projects_to_psd():
    counts = {b: np.array([1.0, 0.0, 0.0, 0.0]) for b in BASES}
    res = linear_state_estimate(counts)
    assert res.raw_min_eigenvalue < 0
    assert np.linalg.eigvalsh(res.state.matrix).min() >= -1e-12
    assert res.state.trace == pytest.approx(1.0)


@pytest.mark.parametrize("make", [fusion_ideal, identity_process, depolarizing_process])
def test_linear_inversion_exact(make):
    chi = make()
    rec = qpt_linear_inversion(exact_outputs(chi))
    np.testing.assert_allclose(rec.matrix, chi.matrix, atol=1e-12)


def test_linear_inversion_of_mixture():
    chi = 0.9 * fusion_ideal().matrix + 0.1 * depolarizing_process().matrix
    np.testing.assert_allclose(qpt_linear_inversion(exact_outputs(chi)).matrix, chi, atol=1e-9)


@given(st.integers(0, 2**32 - 1))
def test_linear_inversion_identity_on_random(seed):
    chi = random_chi(np.random.default_rng(seed))
    np.testing.assert_allclose(qpt_linear_inversion(exact_outputs(chi)).matrix, chi, atol=1e-12)


def test_linear_inversion_from_analytic_frequencies():
    chi = 0.6 * fusion_ideal().matrix + 0.4 * dephased_fusion().matrix
    outs = exact_outputs(chi)
    scaled = {}
    for lab, m in outs.items():
        tr = np.trace(m).real
        scaled[lab] = np.zeros((4, 4)) if tr == 0 else tr * state_tomo_linear(_analytic_counts(m / tr)).matrix
    np.testing.assert_allclose(qpt_linear_inversion(scaled).matrix, chi, atol=1e-9)


def test_linear_inversion_needs_all_inputs():
    outs = exact_outputs(fusion_ideal())
    outs.pop("11")
    with pytest.raises(ValidationError):
        qpt_linear_inversion(outs)


def test_record_from_simulator_inverts():
    rec = generate_counts(fusion_ideal(normalized=True), DetectionModel(10**6, 3))
    chi = qpt_from_record(rec)
    assert uhlmann_fidelity(chi.normalize().matrix.clip(), fusion_ideal(True).matrix) ** 2 > 0.99


def test_mle_noiseless_and_psd():
    from qpc.simulator import expected_counts
    means = expected_counts(fusion_ideal(normalized=True), 10**10)
    rec = TomographyRecord(10**10, {k: int(round(v)) for k, v in means.items()})
    res = mle_fit(rec)
    assert np.linalg.eigvalsh(res.chi.matrix).min() >= -1e-12
    f = np.real(np.trace(res.chi.normalize().matrix @ fusion_ideal(True).matrix))
    assert f >= 1 - 1e-6


def test_mle_lambda_sensitivity():
    chi = ProcMat(0.8 * fusion_ideal(True).matrix + 0.2 * dephased_fusion(True).matrix, normalized=True)
    rec = generate_counts(chi, DetectionModel(10**5, 11))
    r1 = mle_fit(rec)
    r2 = mle_fit(rec, lam=2 * r1.lam)
    target = fusion_ideal(True).matrix
    f1 = np.real(np.trace(r1.chi.normalize().matrix @ target))
    f2 = np.real(np.trace(r2.chi.normalize().matrix @ target))
    assert abs(f1 - f2) < 1e-3
    assert r1.converged


def test_mle_requires_full_record():
    rec = generate_counts(fusion_ideal(True), DetectionModel(1000, 0), inputs=("00", "11"))
    with pytest.raises(ValidationError):
        mle_fit(rec)


def test_classical_fidelities_examples():
    f = classical_fidelities_from_process(fusion_ideal())
    assert f.as_tuple() == pytest.approx((1, 1, 1))
    f = classical_fidelities_from_process(dephased_fusion())
    assert f.as_tuple() == pytest.approx((1, 0.5, 0.5))
    # depolariser: every outcome equally likely -> conditional success 1/4 (zz) and 1/2 (x groups)
    f = classical_fidelities_from_process(depolarizing_process())
    assert f.as_tuple() == pytest.approx((0.25, 0.5, 0.5))


def test_f_lower_bound_values():
    assert f_lower_bound(ClassicalFidelities(1, 1, 1)) == pytest.approx(1.0)
    assert f_lower_bound(ClassicalFidelities(1, 0.5, 0.5)) == pytest.approx(0.5)


def test_f_lb_error_propagation():
    rec = generate_counts(fusion_ideal(True), DetectionModel(12379, 2), accidental_rate=0.1,
                          inputs=("00", "11", "++", "+-", "-+", "--"))
    f = classical_fidelities(rec)
    # finite-difference propagation with Delta N = sqrt(N)
    from qpc.tomography import f_lower_bound as flb
    base = flb(f)
    var = 0.0
    for key, n in rec.counts.items():
        if n == 0:
            continue
        d = max(1.0, np.sqrt(n)) * 1e-3
        bumped = dict(rec.counts)
        bumped[key] = n + d
        rec2 = TomographyRecord.__new__(TomographyRecord)
        rec2.__dict__.update(rec.__dict__)
        rec2.counts = bumped
        deriv = (flb(classical_fidelities(rec2)) - base) / d
        var += deriv**2 * n
    assert f.df_lb == pytest.approx(np.sqrt(var), rel=1e-3)


@given(st.integers(2, 50))
def test_classical_fidelities_scale_invariant(k):
    rec = generate_counts(0.5 * fusion_ideal().matrix + 0.5 * dephased_fusion().matrix,
                          DetectionModel(5000, 1), inputs=("00", "11", "++", "+-", "-+", "--"))
    f1 = classical_fidelities(rec)
    f2 = classical_fidelities(np.array(f1.probabilities))
    assert f1.as_tuple() == pytest.approx(f2.as_tuple(), abs=1e-12)
    scaled = TomographyRecord(rec.n_t * k, {key: v * k for key, v in rec.counts.items()})
    assert classical_fidelities(scaled).as_tuple() == pytest.approx(f1.as_tuple(), abs=1e-12)


def test_f_lb_below_process_fidelity_for_polarisation_conserving():
    rng = np.random.default_rng(5)
    for _ in range(10):
        v = rng.uniform(0, 1)
        chi = v * fusion_ideal(True).matrix + (1 - v) * dephased_fusion(True).matrix
        # add a Z-diagonal (polarisation-conserving) noise term
        w = rng.uniform(0, 0.3)
        diag = np.zeros((16, 16))
        diag[0, 0] = diag[15, 15] = 0.5
        chi = (1 - w) * chi + w * diag
        f = classical_fidelities_from_process(chi)
        f_expt = np.real(np.trace(chi @ fusion_ideal(True).matrix))
        assert f_lower_bound(f) <= f_expt + 1e-12


def test_probe_set_has_40_entries():
    assert len(CLASSICAL_PROBE_SET) == 40
    assert len(STANDARD_LABELS) == 16


def test_record_serialisation_roundtrip():
    rec = generate_counts(fusion_ideal(True), DetectionModel(500, 4))
    for back in (TomographyRecord.from_json(rec.to_json()), TomographyRecord.from_dict(rec.to_dict()),
                 TomographyRecord.from_csv(rec.to_csv(), rec.n_t)):
        assert back.counts == rec.counts and back.n_t == rec.n_t


def test_record_validation():
    with pytest.raises(ValidationError):
        TomographyRecord(0, {})
    with pytest.raises(ValidationError):
        TomographyRecord(10, {("00", "ZZ", "++"): 3})  # missing outcomes
    with pytest.raises(ValidationError):
        TomographyRecord(10, {("00", "QZ", "++"): 3})
    with pytest.raises(ValidationError):
        TomographyRecord(10, {("00", "ZZ", "++"): -1, ("00", "ZZ", "+-"): 0,
                              ("00", "ZZ", "-+"): 0, ("00", "ZZ", "--"): 0})
    with pytest.raises(ValidationError):
        TomographyRecord.from_dict({"n_t": 3, "counts": [], "extra": 1})
    with pytest.raises(ValidationError):
        TomographyRecord.from_csv("a,b\n1,2\n", 10)


def test_record_overflow_warning():
    counts = {("00", "ZZ", o): n for o, n in zip(("++", "+-", "-+", "--"), (500, 0, 0, 0))}
    assert TomographyRecord(100, counts).warnings()
