import math
import warnings

import numpy as np
import pytest

from spinkernel.model import ModelParams
from spinkernel.kernel import AnalyticEngine, GramMatrix, gram
from spinkernel.svm import (LabeledSet, SvmConvergenceError, boundary,
                            decision, labeled_windows, midpoint_diagnostics,
                            train)

from conftest import brute_force_dual


def two_point_problem(k):
    pts = (ModelParams(1.0, 0.0, 0.9, 8), ModelParams(1.0, 0.0, 1.1, 8))
    gm = GramMatrix(points=pts, values=np.array([[1.0, k], [k, 1.0]]),
                    kind="global", provenance="analytic")
    ds = LabeledSet(points=pts, labels=np.array([-1, 1]), control="h")
    return gm, ds


class ToyGaussianEngine:
    """K(x, x') = exp(-(x - x')^2) on the control value; symmetric toy."""

    name = "analytic"

    def fidelity(self, a, b):
        return math.exp(-(a.h - b.h) ** 2)

    def log_fidelity(self, a, b):
        return -(a.h - b.h) ** 2

    def prepare(self, points):
        pass


@pytest.mark.parametrize("k", [0.0, 0.3, 0.75, 0.99])
def test_two_point_closed_form(k):
    # Hand solution of the 2x2 dual: alpha_L = alpha_R = 1/(1 - k) and
    # L_D = 1/(1 - k) (equivalently alpha = 2 / D^2 with D^2 = 2(1-k)).
    gm, ds = two_point_problem(k)
    model = train(gm, ds)
    expect = 1.0 / (1.0 - k)
    assert model.alphas == pytest.approx([expect, expect], abs=1e-8 * expect)
    assert model.bias == pytest.approx(0.0, abs=1e-10)
    assert model.diagnostics.objective_history[-1] == pytest.approx(
        expect, rel=1e-10)
    assert abs((model.alphas * model.labels).sum()) <= 1e-8


def test_brute_force_oracle_random_problems(rng):
    cap = 1e6
    for trial in range(10):
        m = int(rng.integers(3, 7))
        # random PSD kernel with unit diagonal, kept well conditioned so
        # the hard-margin multipliers stay far from the cap
        x = rng.standard_normal((m, m + 1))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        k = 0.5 * (x @ x.T) + 0.5 * np.eye(m)
        labels = np.zeros(m, dtype=int)
        while len(set(labels.tolist())) < 2:
            labels = rng.choice([-1, 1], m)
        pts = tuple(ModelParams(1.0, 0.0, 1.0 + 0.01 * i, 8)
                    for i in range(m))
        gm = GramMatrix(points=pts, values=k, kind="global",
                        provenance="analytic")
        ds = LabeledSet(points=pts, labels=labels, control="h")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model = train(gm, ds, C=cap)
        obj_smo = model.diagnostics.objective_history[-1]
        obj_brute, _ = brute_force_dual(k, labels, cap)
        assert obj_smo == pytest.approx(obj_brute, abs=1e-6 * max(1, abs(obj_brute)))
        assert abs((model.alphas * model.labels).sum()) <= 1e-8
        assert np.all(model.alphas >= 0)
        assert np.all(model.alphas <= cap * (1 + 1e-12))


def test_duplicated_point_shares_mass():
    gm, ds = two_point_problem(0.4)
    pts = ds.points + (ds.points[1],)
    k = np.array([[1.0, 0.4, 0.4], [0.4, 1.0, 1.0], [0.4, 1.0, 1.0]])
    gm3 = GramMatrix(points=pts, values=k, kind="global",
                     provenance="analytic")
    ds3 = LabeledSet(points=pts, labels=np.array([-1, 1, 1]), control="h")
    m2 = train(gm, ds)
    m3 = train(gm3, ds3)
    assert m3.alphas[1] + m3.alphas[2] == pytest.approx(m2.alphas[1], abs=1e-6)
    # kernel columns of the duplicate coincide, so the decision function
    # is unchanged at any evaluation column
    for col in (0, 1):
        d2 = m2.bias + sum(m2.alphas[i] * m2.labels[i] * k[i, col]
                           for i in range(2))
        d3 = m3.bias + sum(m3.alphas[i] * m3.labels[i] * k[min(i, 1), col]
                           for i in range(3))
        assert d3 == pytest.approx(d2, abs=1e-6)


def test_separable_ising_window_training():
    ds = labeled_windows(ModelParams(1.0, 0.0, 1.0, 16), "h",
                         (0.7, 0.95), (1.05, 1.3), 16)
    gm = gram(ds.points, kind="global", engine=AnalyticEngine())
    model = train(gm, ds)
    eng = AnalyticEngine()
    for p, y in zip(ds.points, ds.labels):
        assert np.sign(decision(model, p, eng)) == y
    # KKT: non-bound support vectors sit on the margin
    for i in model.sv_index:
        if model.alphas[i] < model.C * 0.99:
            d = decision(model, model.points[i], eng)
            assert model.labels[i] * d == pytest.approx(1.0, abs=1e-4)
    assert model.alphas.max() < 0.01 * model.C
    assert model.diagnostics.kkt_violation <= 1e-6
    hist = model.diagnostics.objective_history
    assert all(b >= a - 1e-9 for a, b in zip(hist, hist[1:]))


def test_decision_sign_convention_and_zero_crossing():
    ds = labeled_windows(ModelParams(0.5, 0.0, 1.0, 16), "h",
                         (0.7, 0.95), (1.05, 1.3), 16)
    gm = gram(ds.points, kind="global", engine=AnalyticEngine())
    model = train(gm, ds)
    eng = AnalyticEngine()
    assert decision(model, 1.3, eng) > 0  # disordered side
    assert decision(model, 0.7, eng) < 0
    x_star = boundary(model, (0.95, 1.05), eng)
    assert 0.95 < x_star < 1.05


def test_toy_symmetric_boundary_is_midpoint():
    xs = np.concatenate([np.linspace(0.2, 0.4, 6), np.linspace(0.8, 1.0, 6)])
    pts = tuple(ModelParams(1.0, 0.0, float(x), 8) for x in xs)
    labels = np.array([-1] * 6 + [1] * 6)
    eng = ToyGaussianEngine()
    values = np.array([[eng.fidelity(a, b) for b in pts] for a in pts])
    gm = GramMatrix(points=pts, values=values, kind="global",
                    provenance="analytic")
    ds = LabeledSet(points=pts, labels=labels, control="h")
    model = train(gm, ds)
    x_star = boundary(model, (0.4, 0.8), eng)
    assert x_star == pytest.approx(0.6, abs=1e-6)
    md = midpoint_diagnostics(model, eng, np.linspace(0.2, 1.0, 9))
    assert md.x_mid == pytest.approx(0.6, abs=1e-6)
    assert md.x_left < md.x_mid < md.x_right
    assert abs(md.x_mid - x_star) <= 1e-3


def test_boundary_requires_sign_change():
    gm, ds = two_point_problem(0.5)
    model = train(gm, ds)
    eng = ToyGaussianEngine()
    with pytest.raises(ValueError):
        boundary(model, (1.2, 1.4), eng)


def test_interior_points_leave_boundary_unchanged():
    # saturated windows: extra strictly-interior samples get alpha = 0
    base = ModelParams(0.5, 0.0, 1.0, 100)
    eng = AnalyticEngine()
    ds1 = labeled_windows(base, "h", (0.7, 0.95), (1.05, 1.3), 8)
    m1 = train(gram(ds1.points, kind="per-site", engine=eng), ds1,
               )
    b1 = boundary(m1, (0.95, 1.05), eng)
    extra = [0.80, 0.88, 1.12, 1.21]
    pts = ds1.points + tuple(base.replace(h=x) for x in extra)
    labels = np.concatenate([ds1.labels, [-1, -1, 1, 1]])
    order = np.argsort([p.h for p in pts])
    pts = tuple(pts[i] for i in order)
    labels = labels[order]
    ds2 = LabeledSet(points=pts, labels=labels, control="h")
    m2 = train(gram(ds2.points, kind="per-site", engine=eng), ds2)
    b2 = boundary(m2, (0.95, 1.05), eng)
    assert abs(b1 - b2) <= 1e-6


def test_boundary_settles_with_training_size():
    # equally spaced samples in one interval around the transition: the
    # estimate stabilizes once the inner points pin the support vectors
    eng = AnalyticEngine()
    base = ModelParams(1.0, 0.0, 1.0, 12)
    est = {}
    for m in (8, 16, 32):
        xs = np.linspace(0.85, 1.15, m)
        labels = np.where(xs > 1.0, 1, -1)
        pts = tuple(base.replace(h=float(x)) for x in xs)
        ds = LabeledSet(points=pts, labels=labels, control="h")
        model = train(gram(ds.points, kind="global", engine=eng), ds)
        est[m] = boundary(model, (xs[labels == -1].max(),
                                  xs[labels == 1].min()), eng)
    assert abs(est[32] - est[16]) < abs(est[16] - est[8]) + 1e-9
    assert all(0.9 < e < 1.1 for e in est.values())


def test_midpoint_flags_ambiguous_dominance():
    # two comparable multipliers on the left side: the dominant-SV
    # identification must raise the ambiguity flag but still emit curves
    from spinkernel.svm import SvmDiagnostics, SvmModel
    eng = ToyGaussianEngine()
    xs = [0.30, 0.40, 0.80, 0.90]
    pts = tuple(ModelParams(1.0, 0.0, x, 8) for x in xs)
    model = SvmModel(points=pts, labels=np.array([-1, -1, 1, 1]),
                     alphas=np.array([0.8, 1.0, 1.8, 0.01]), bias=0.0,
                     C=1e6, kind="global", control="h",
                     provenance="analytic", diagnostics=SvmDiagnostics())
    md = midpoint_diagnostics(model, eng, np.linspace(0.3, 0.9, 7))
    assert md.ambiguous
    assert md.x_left == 0.40 and md.x_right == 0.80
    assert md.curve_left.size == 7 and md.curve_right.size == 7
    assert md.x_mid == pytest.approx(0.6, abs=1e-6)


def test_labeled_set_validation():
    pts = (ModelParams(1.0, 0.0, 0.9, 8), ModelParams(1.0, 0.0, 1.1, 8))
    with pytest.raises(ValueError):
        LabeledSet(points=pts, labels=np.array([1, 1]), control="h")
    with pytest.raises(ValueError):
        LabeledSet(points=pts, labels=np.array([1]), control="h")
    with pytest.raises(ValueError):
        labeled_windows(ModelParams(1.0, 0.0, 1.0, 8), "h",
                        (0.7, 1.1), (1.05, 1.3), 4)


def test_train_validation_and_convergence_guard():
    gm, ds = two_point_problem(0.5)
    other = LabeledSet(points=(ModelParams(1.0, 0.0, 0.8, 8),
                               ModelParams(1.0, 0.0, 1.2, 8)),
                       labels=np.array([-1, 1]), control="h")
    with pytest.raises(ValueError):
        train(gm, other)
    with pytest.raises(ValueError):
        train(gm, ds, C=-1.0)
    ds16 = labeled_windows(ModelParams(1.0, 0.0, 1.0, 16), "h",
                           (0.7, 0.95), (1.05, 1.3), 16)
    gm16 = gram(ds16.points, kind="global", engine=AnalyticEngine())
    with pytest.raises(SvmConvergenceError):
        # an exhausted sweep budget must fail loudly, not return a
        # partial result
        train(gm16, ds16, max_sweeps=0)


def test_model_json(tmp_path):
    gm, ds = two_point_problem(0.25)
    model = train(gm, ds)
    path = tmp_path / "svm.json"
    model.write_json(path, config_hash="h123")
    import json
    doc = json.loads(path.read_text())
    assert doc["config_hash"] == "h123"
    assert doc["labels"] == [-1, 1]
    assert doc["sv_index"] == [0, 1]
    assert doc["diagnostics"]["converged"] is True
