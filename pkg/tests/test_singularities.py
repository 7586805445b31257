import math

import numpy as np
import pytest

from cmc_lab import singularities as sg
from cmc_lab import surfaces as sf
from cmc_lab.jets import Jet2, VectorFieldJet
from cmc_lab.singularities import (
    HypothesisViolationError,
    NormalUndefinedError,
    StraightChart,
    classify_kind,
    classification_report,
    cmc_fold_obstruction,
    condition3_det,
    condition4_det,
    constant_C,
    criterion_25,
    diffeo_push,
    euclidean_normal,
    fold_symmetry_test,
    perturb_fields,
    signed_area_density,
    special_null_field,
    sweep_rows_to_csv,
    trace_singular_curve,
)


def _custom_fold():
    """The fold map without its analytic normal: exercises the jet-based path."""

    def builder(u0, v0, degree):
        uj = Jet2.coordinate((u0, v0), degree, 0)
        vj = Jet2.coordinate((u0, v0), degree, 1)
        return (uj, vj * vj, Jet2.constant(0.0, (u0, v0), degree))

    return sf.custom_surface(builder)


def _rank0_model():
    """(u^2, uv, v^2): dX = 0 at the origin."""

    def builder(u0, v0, degree):
        uj = Jet2.coordinate((u0, v0), degree, 0)
        vj = Jet2.coordinate((u0, v0), degree, 1)
        return (uj * uj, uj * vj, vj * vj)

    return sf.custom_surface(builder)


# -- normals -------------------------------------------------------------------


def test_normal_on_fold_from_cross_product_jet():
    S = _custom_fold()
    n = euclidean_normal(S, (0.4, 0.0))
    assert np.allclose(np.abs(n), [0, 0, 1], atol=1e-12)


def test_normal_on_cusp25_at_singular_point(cusp25_model):
    n = euclidean_normal(cusp25_model, (0.3, 0.0))
    assert np.allclose(n, [0, 0, 1], atol=1e-12)


def test_normal_at_cone_vertex_defined(cone_model):
    n = euclidean_normal(cone_model, (0.5, 0.0))
    expect = np.array([math.cos(0.5), math.sin(0.5), -1.0]) / math.sqrt(2)
    assert np.allclose(np.abs(n), np.abs(expect), atol=1e-10)


def test_normal_rank0_error():
    with pytest.raises(NormalUndefinedError, match="rank 0"):
        euclidean_normal(_rank0_model(), (0.0, 0.0))


def test_signed_area_density_fold(fold_model):
    assert abs(signed_area_density(fold_model, (0.3, 0.25)) - 0.5) < 1e-14
    assert abs(signed_area_density(fold_model, (0.0, -0.1)) + 0.2) < 1e-14


def test_signed_area_density_conjugate_closed_form(conj_k2):
    lam = signed_area_density(conj_k2, (1.0, 0.3))
    delta1 = (1 + 3) ** 2 - 8
    expect = 1.0 * math.sqrt(delta1 - 3) / (0.5 * math.sqrt(3) * math.sqrt(delta1))
    assert abs(lam - expect) < 1e-9
    assert abs(expect - math.sqrt(5 / 6)) < 1e-15


def test_signed_area_density_positive_at_regular_immersion(delaunay_t_k2):
    assert signed_area_density(delaunay_t_k2, (0.8, 0.5)) > 0


# -- tracing and kinds ------------------------------------------------------------


def test_trace_fold_curve(fold_model):
    recs = trace_singular_curve(fold_model, box=(-1, 1, -1, 1), n_grid=9)
    assert recs
    assert all(abs(r.location[1]) < 1e-11 for r in recs)
    assert all(r.kind == "first_kind" for r in recs)
    assert all(abs(r.lam) < 1e-10 for r in recs)


def test_trace_conjugate_curve(conj_k2_records):
    recs = conj_k2_records
    assert len(recs) >= 20
    assert all(abs(r.location[0]) < 1e-11 for r in recs)
    assert all(r.kind == "first_kind" for r in recs)
    for r in recs:
        assert abs(r.dlam[0] - 2 / math.sqrt(3)) < 1e-8
        assert abs(r.dlam[1]) < 1e-9


def test_trace_immersion_is_empty():
    def builder(u0, v0, degree):
        uj = Jet2.coordinate((u0, v0), degree, 0)
        vj = Jet2.coordinate((u0, v0), degree, 1)
        return (Jet2.constant(0.0, (u0, v0), degree), uj, vj)

    plane = sf.custom_surface(builder)
    assert trace_singular_curve(plane, box=(-1, 1, -1, 1), n_grid=7) == []


def test_classify_conelike_on_timelike_delaunay(delaunay_t_records):
    assert delaunay_t_records
    assert all(r.kind == "conelike" for r in delaunay_t_records)


def test_classify_first_kind_on_fold(fold_model):
    recs = trace_singular_curve(fold_model, box=(-0.5, 0.5, -0.5, 0.5), n_grid=5)
    assert classify_kind(fold_model, recs[0]) == "first_kind"


def test_classify_cone_model(cone_model):
    recs = trace_singular_curve(cone_model, box=(-1, 1, -1, 1), n_grid=7)
    assert recs and all(r.kind == "conelike" for r in recs)


def test_rank_deficiency_at_traced_roots(conj_k2_records, conj_k2):
    for rec in conj_k2_records[:5]:
        M = sg._dX(conj_k2, rec.location)
        sv = np.linalg.svd(M, compute_uv=False)
        assert sv[1] < 1e-7 * sv[0]


# -- special field, C, criterion ---------------------------------------------------


def test_special_null_field_cusp25(cusp25_model):
    recs = trace_singular_curve(cusp25_model, box=(-1, 1, -1, 1), n_grid=5)
    (a, b), eta, res = special_null_field(cusp25_model, recs[0])
    assert abs(a) < 1e-12 and abs(b) < 1e-12
    assert max(res) < 1e-12


def test_special_null_field_conjugate(conj_k2, conj_k2_records):
    (a, b), eta, res = special_null_field(conj_k2, conj_k2_records[0])
    assert abs(a) < 1e-9
    assert abs(b - 2.0) < 1e-7  # 1/(H(k-1)|k-1|) at k=2, H=1/2
    assert max(res) < 1e-8


def test_special_null_field_fold(fold_model):
    recs = trace_singular_curve(fold_model, box=(-0.5, 0.5, -0.5, 0.5), n_grid=5)
    (a, b), _, res = special_null_field(fold_model, recs[0])
    assert abs(a) < 1e-12 and abs(b) < 1e-12 and max(res) < 1e-12


def test_constant_C_cusp25(cusp25_model):
    recs = trace_singular_curve(cusp25_model, box=(-0.5, 0.5, -0.5, 0.5), n_grid=5)
    chart = StraightChart(cusp25_model, recs[0])
    Y = chart.jets()
    (a, b), eta, _ = special_null_field(cusp25_model, recs[0])
    C, res = constant_C(Y, eta)
    assert C == 0.0 and res == 0.0


def test_constant_C_conjugate(conj_k2, conj_k2_records):
    chart = StraightChart(conj_k2, conj_k2_records[0])
    Y = chart.jets()
    (a, b), eta, _ = special_null_field(conj_k2, conj_k2_records[0])
    C, res = constant_C(Y, eta)
    assert abs(C) < 1e-8 and res < 1e-8


def test_constant_C_flags_collinearity_failure(cuspidal_edge_model):
    # with eta~ = d_v on (u, v^2, v^3): eta^2 X = (0,2,0), eta^3 X = (0,0,6)
    recs = trace_singular_curve(cuspidal_edge_model, box=(-0.5, 0.5, -0.5, 0.5), n_grid=5)
    chart = StraightChart(cuspidal_edge_model, recs[0])
    Y = chart.jets()
    eta = VectorFieldJet.constant(1.0, 0.0, (0.0, 0.0))
    C, res = constant_C(Y, eta)
    assert abs(C) < 1e-12
    assert abs(res - 3.0) < 1e-12  # |(0,0,6)| / |(0,2,0)|


def test_constant_C_hypothesis_violation(fold_model):
    recs = trace_singular_curve(fold_model, box=(-0.5, 0.5, -0.5, 0.5), n_grid=5)
    chart = StraightChart(fold_model, recs[0])
    Y = chart.jets()
    bad = VectorFieldJet.constant(0.0, 1.0, (0.0, 0.0))  # along-curve field: eta^2 X = 0
    with pytest.raises(HypothesisViolationError, match="eta~\\^2 X vanishes"):
        constant_C(Y, bad)


def test_criterion_cusp25_exact(cusp25_model):
    recs = trace_singular_curve(cusp25_model, box=(-1, 1, -1, 1), n_grid=7)
    rep = criterion_25(cusp25_model, recs)
    assert rep.verdict == "cusp25"
    assert abs(rep.condition4_det - 720.0) < 1e-12 * 720
    assert rep.condition3_max_abs_det < 1e-14
    assert rep.C == 0.0 and rep.collinearity_residual == 0.0


def test_criterion_cuspidal_edge_rejected(cuspidal_edge_model):
    recs = trace_singular_curve(cuspidal_edge_model, box=(-1, 1, -1, 1), n_grid=7)
    rep = criterion_25(cuspidal_edge_model, recs)
    assert rep.verdict == "rejected_cond3"
    assert abs(rep.samples[0].cond3_det - 12.0) < 1e-12


def test_criterion_fold_rejected_cond4(fold_model):
    recs = trace_singular_curve(fold_model, box=(-1, 1, -1, 1), n_grid=7)
    rep = criterion_25(fold_model, recs)
    assert rep.verdict == "rejected_cond4"
    assert rep.condition3_max_abs_det < 1e-14
    assert rep.condition4_det == 0.0


def test_criterion_conjugate(conj_k2, conj_k2_records):
    rep = criterion_25(conj_k2, conj_k2_records)
    assert rep.verdict == "cusp25"
    assert abs(rep.condition4_det + 288.0) < 1e-5 * 288
    assert rep.condition3_max_abs_det < 1e-7
    for s in rep.samples:
        assert abs(s.cond4_det + 288.0) < 1e-5 * 288


def test_criterion_not_applicable_on_conelike(delaunay_t_k2, delaunay_t_records):
    rep = criterion_25(delaunay_t_k2, delaunay_t_records)
    assert rep.verdict == "not_applicable"
    assert "first kind" in rep.reason


@pytest.mark.parametrize(
    "family,k,variant",
    [
        ("delaunay_timelike", -2.0, None),   # template S, jet-based normal
        ("delaunay_timelike", -1.0, None),   # lightlike template
        ("delaunay_spacelike", 2.0, None),
        ("delaunay_spacelike", -2.0, None),
        ("delaunay_lightlike_i", None, "i"),
        ("delaunay_lightlike_ii", None, "ii"),
    ],
)
def test_criterion_on_every_conjugate_branch(family, k, variant):
    """All conjugate branches carry (2,5)-cuspidal edges, and the order-5
    determinant magnitude follows the same closed form 72/(H^2 |k-1|^3) on the
    branches that have a k."""
    S = sf.conjugate_of(family, k=k, H=0.5, variant=variant)
    hw = min(0.35, 0.8 * S.u_range[1])
    recs = trace_singular_curve(S, box=(-hw, hw, 0.1, 1.2), n_grid=7)
    rep = criterion_25(S, recs)
    assert rep.verdict == "cusp25", (family, k, rep.reason)
    assert all(r.kind == "first_kind" for r in recs)
    if k is not None and k != -1.0:
        expect = 72.0 / (0.25 * abs(k - 1) ** 3)
        assert abs(abs(rep.condition4_det) - expect) < 1e-5 * expect


# -- fold tests ---------------------------------------------------------------------


def test_fold_symmetry_fold_model(fold_model):
    recs = trace_singular_curve(fold_model, box=(-0.5, 0.5, -0.5, 0.5), n_grid=5)
    ft = fold_symmetry_test(fold_model, recs[0])
    assert ft.verdict == "fold_candidate" and ft.residual < 1e-14


def test_fold_symmetry_rejects_cusp25(cusp25_model):
    recs = trace_singular_curve(cusp25_model, box=(-0.5, 0.5, -0.5, 0.5), n_grid=5)
    ft = fold_symmetry_test(cusp25_model, recs[0])
    assert ft.verdict == "rejected"
    assert ft.residual > 0.1  # the v^5 coefficient leaves the image plane


def test_fold_symmetry_rejects_conjugate(conj_k2, conj_k2_records):
    ft = fold_symmetry_test(conj_k2, conj_k2_records[0])
    assert ft.verdict == "rejected"


def test_fold_obstruction_certificate(delaunay_t_k2, delaunay_t_records):
    cert = cmc_fold_obstruction(delaunay_t_k2, delaunay_t_records[0])
    assert cert["sheet_flip"] is True
    assert cert["conclusion"] == "fold impossible"
    assert cert["sides"]["plus"]["abs_g_minus_1"] < 1e-8
    assert cert["sides"]["minus"]["abs_g_minus_1"] < 1e-8
    assert cert["dg_estimate"] > 0.1
    assert cert["laplacian_residual_max"] < 1e-5


def test_fold_obstruction_rank0_regime():
    S = _rank0_model()
    rec = sg.SingularPointRecord((0.0, 0.0), 0.0, (0.0, 0.0), None, "degenerate_rank0", 0)
    cert = cmc_fold_obstruction(S, rec)
    assert cert["regime"] == "omega_zero_rank0"


# -- invariance machinery --------------------------------------------------------------


def test_perturb_validation():
    base = (0.0, 0.0)
    one = Jet2.constant(1.0, base)
    zero = Jet2.constant(0.0, base)
    v = Jet2.coordinate(base, 5, 1)
    xi = VectorFieldJet.constant(0.0, 1.0, base)
    eta = VectorFieldJet.constant(1.0, 0.0, base)
    with pytest.raises(ValueError, match="vanish on the singular set"):
        perturb_fields(xi, eta, one, v, zero, one)  # a2 = v not vanishing on {u=0}
    with pytest.raises(ValueError, match="nonvanishing"):
        perturb_fields(xi, eta, zero, zero, zero, one)
    u = Jet2.coordinate(base, 5, 0)
    with pytest.raises(ValueError, match="special variant"):
        perturb_fields(xi, eta, one, zero, u, one, special=True)


def test_identity_perturbation_changes_nothing(cusp25_model):
    recs = trace_singular_curve(cusp25_model, box=(-0.5, 0.5, -0.5, 0.5), n_grid=5)
    chart = StraightChart(cusp25_model, recs[0])
    Y = chart.jets()
    base = (0.0, 0.0)
    xi = VectorFieldJet.constant(0.0, 1.0, base)
    (a, b), eta, _ = special_null_field(cusp25_model, recs[0])
    one = Jet2.constant(1.0, base)
    zero = Jet2.constant(0.0, base)
    xib, etab, pred = perturb_fields(xi, eta, one, zero, zero, one, special=True)
    assert pred == 1.0
    C0, _ = constant_C(Y, eta)
    Cb, _ = constant_C(Y, etab)
    d0, _ = condition4_det(Y, eta, C0)
    db, _ = condition4_det(Y, etab, Cb, xi=xib)
    assert db == d0


def test_b2_scaling_example(cusp25_model):
    # b2 = 2, a1 = 1: condition-4 determinant multiplies by 2^7 = 128
    recs = trace_singular_curve(cusp25_model, box=(-0.5, 0.5, -0.5, 0.5), n_grid=5)
    chart = StraightChart(cusp25_model, recs[0])
    Y = chart.jets()
    base = (0.0, 0.0)
    xi = VectorFieldJet.constant(0.0, 1.0, base)
    (_, _), eta, _ = special_null_field(cusp25_model, recs[0])
    one = Jet2.constant(1.0, base)
    zero = Jet2.constant(0.0, base)
    two = Jet2.constant(2.0, base)
    xib, etab, pred = perturb_fields(xi, eta, one, zero, zero, two, special=True)
    assert pred == 128.0
    Cb, _ = constant_C(Y, etab)
    db, _ = condition4_det(Y, etab, Cb, xi=xib)
    assert abs(db - 92160.0) < 1e-6


def test_random_field_changes_cusp25_and_conjugate(cusp25_model, conj_k2, conj_k2_records):
    rng = np.random.default_rng(7)
    base = (0.0, 0.0)
    u = Jet2.coordinate(base, 5, 0)
    v = Jet2.coordinate(base, 5, 1)
    xi0 = VectorFieldJet.constant(0.0, 1.0, base)
    targets = [
        (cusp25_model, trace_singular_curve(cusp25_model, box=(-0.5, 0.5, -0.5, 0.5), n_grid=5)[0]),
        (conj_k2, conj_k2_records[0]),
    ]
    for S, rec in targets:
        chart = StraightChart(S, rec)
        Y = chart.jets()
        (a, b), eta0, _ = special_null_field(S, rec)
        C0, _ = constant_C(Y, eta0)
        d4_0, _ = condition4_det(Y, eta0, C0)
        for _ in range(10):
            c = rng.uniform(-0.8, 0.8, size=11)
            a1 = Jet2.constant(rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0]), base) + c[0] * u + c[1] * v
            b2 = Jet2.constant(rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0]), base) + c[2] * u + c[3] * v
            a2 = u * (c[4] + c[5] * u + c[6] * v)
            b1g = u * (c[7] + c[8] * v)
            b1s = u * u * u * (c[9] + c[10] * v)
            eta_g = VectorFieldJet.constant(1.0, 0.0, base)
            xib, etab, _ = perturb_fields(xi0, eta_g, a1, a2, b1g, b2)
            _, r3 = condition3_det(Y, xi=xib, eta=etab)
            assert r3 < 1e-7
            xis, etas, pred = perturb_fields(xi0, eta0, a1, a2, b1s, b2, special=True)
            Cb, _ = constant_C(Y, etas)
            d4b, _ = condition4_det(Y, etas, Cb, xi=xis)
            assert abs(d4b / d4_0 - pred) / abs(pred) < 1e-6


def test_diffeo_push_preserves_verdicts(cusp25_model, fold_model):
    rng = np.random.default_rng(11)
    A = np.eye(3) + rng.uniform(-0.3, 0.3, (3, 3))
    Q = rng.uniform(-0.1, 0.1, (3, 3, 3))
    Cc = rng.uniform(-0.05, 0.05, (3, 3, 3, 3))
    for S, verdict, foldv in ((cusp25_model, "cusp25", "rejected"), (fold_model, "rejected_cond4", "fold_candidate")):
        P = diffeo_push(S, A, Q, Cc)
        recs = trace_singular_curve(P, box=(-0.4, 0.4, -0.4, 0.4), n_grid=5)
        rep = criterion_25(P, recs)
        assert rep.verdict == verdict
        assert fold_symmetry_test(P, recs[len(recs) // 2]).verdict == foldv


def test_diffeo_push_requires_invertible_linear_part(cusp25_model):
    with pytest.raises(ValueError, match="invertible"):
        diffeo_push(cusp25_model, np.zeros((3, 3)))


# -- reports -----------------------------------------------------------------------


def test_classification_report_shape(conj_k2, conj_k2_records):
    rep = criterion_25(conj_k2, conj_k2_records[:3])
    doc = classification_report(conj_k2, conj_k2_records[:3], rep, certificates=[{"x": 1}])
    assert doc["surface"] == conj_k2.family
    assert doc["conelike_definition"] == "operational"
    assert len(doc["samples"]) == 3
    assert doc["criterion"]["verdict"] == "cusp25"
    import json

    json.dumps(doc)  # must be JSON-serializable


def test_sweep_csv_flattening():
    rows = [{"k": 2.0, "H": 0.5, "verdict": "cusp25", "cond4_det": "-288.0"}]
    text = sweep_rows_to_csv(rows)
    assert text.splitlines()[0] == "k,H,verdict,cond4_det"
    assert "-288.0" in text
