import math

import numpy as np
import pytest

from assg.errors import ConfigurationError, InvalidInputError, NumericalFailure
from assg.geometry import Ball, Box, project, project_intersection, prox_reg_ball
from assg.problems import (Dataset, Loss, Objective, Regularizer, full_objective,
                           generate_synthetic, loss_subgrad, make_rng)
from assg.solvers import (AssgConfig, assg_c, assg_c_global, assg_r, inner_ball_ssg,
                          prox_assg_c, prox_assg_r, prox_inner, prox_ssgs, rassg, ssg, ssgs)
from assg.solvers import inner as inner_mod
from assg.solvers.inner import BLOCK, SampleStream

HINGE_C = 12.19  # twice the largest measured dist/gap ratio on the hinge instance


def _sample_grad(obj, w, i, fold=True):
    x, y = obj.source.X[i], obj.source.y[i]
    g = loss_subgrad(obj.loss, float(x @ w), float(y)) * x
    if fold:
        g = g + obj.regularizer.subgrad(w)
    return g


def _reference_loop(obj, w1, t, seed, step):
    """Plain-Python replay of an inner run; one uniform draw per iteration."""
    rng = make_rng(seed)
    w = np.array(w1, float)
    total = np.zeros_like(w)
    path = []
    for tau in range(1, t + 1):
        total += w
        i = min(int(rng.random() * obj.source.n), obj.source.n - 1)
        w = step(w, _sample_grad(obj, w, i, obj.mode == "plain"), tau)
        path.append(w.copy())
    return total / t, np.array(path)


# -- inner loops against a reference implementation ------------------------------

def test_ssg_matches_reference(box_obj):
    eta = 0.05
    res = ssg(box_obj, [0.5, -0.5], 300, eta=eta, seed=3, record_path=True)
    avg, path = _reference_loop(box_obj, [0.5, -0.5], 300, 3,
                                lambda w, g, t: project(box_obj.domain, w - eta * g))
    np.testing.assert_allclose(res.w, avg, rtol=0, atol=1e-13)
    np.testing.assert_allclose(res.path, path, rtol=0, atol=1e-13)


def test_inner_ball_ssg_matches_reference(box_obj):
    ball = Ball([0.2, 0.1], 0.4)
    avg, path = _reference_loop(
        box_obj, ball.center, 200, 5,
        lambda w, g, t: project_intersection(box_obj.domain, ball, w - 0.1 * g))
    got, tr = inner_ball_ssg(box_obj, ball.center, 0.4, 0.1, 200, seed=5, record_path=True)
    np.testing.assert_allclose(got, avg, atol=1e-12)
    np.testing.assert_allclose(tr.path, path, atol=1e-12)


def test_ssgs_matches_reference(hinge_obj):
    beta, w1 = 0.7, np.array([0.1, -0.2, 0.3])
    step = lambda w, g, t: (1 - 2 / t) * w + (2 / t) * w1 - (2 * beta / t) * g  # noqa: E731
    avg, path = _reference_loop(hinge_obj, w1, 500, 8, step)
    got, tr = ssgs(hinge_obj, w1, beta, 500, seed=8, record_path=True)
    np.testing.assert_allclose(got, avg, atol=1e-12)
    np.testing.assert_allclose(tr.path, path, atol=1e-12)
    assert tr.confinement_violations == 0


def test_prox_inner_matches_reference(hinge_composite):
    reg, eta = hinge_composite.regularizer, 0.05
    ball = Ball([0.0, 0.0, 0.0], 0.8)
    avg, _ = _reference_loop(hinge_composite, ball.center, 200, 2,
                             lambda w, g, t: prox_reg_ball(reg, eta, ball, w - eta * g))
    got, tr = prox_inner(hinge_composite, ball.center, 0.8, eta, 200, seed=2)
    np.testing.assert_allclose(got, avg, atol=1e-10)
    assert tr.max_dist <= 0.8 + 1e-10


def test_t_equals_one(hinge_obj, hinge_composite):
    w1 = np.array([0.3, 0.1, -0.2])
    assert np.array_equal(ssg(hinge_obj, w1, 1, eta=0.1).w, w1)
    avg, _ = inner_ball_ssg(hinge_obj, w1, 1.0, 0.1, 1, seed=0)
    assert np.array_equal(avg, w1)
    beta = 0.4
    avg, tr = ssgs(hinge_obj, w1, beta, 1, seed=6, record_path=True)
    assert np.array_equal(avg, w1)
    rng = make_rng(6)
    i = min(int(rng.random() * hinge_obj.source.n), hinge_obj.source.n - 1)
    np.testing.assert_allclose(tr.path[0], w1 - 2 * beta * _sample_grad(hinge_obj, w1, i),
                               atol=1e-15)
    avg, tr = prox_ssgs(hinge_composite, w1, beta, 1, seed=6, record_path=True)
    drift = w1 - 2 * beta * _sample_grad(hinge_composite, w1, i, fold=False)
    expect = prox_reg_ball(hinge_composite.regularizer, 2 * beta, Ball(w1, 1e12), drift)
    np.testing.assert_allclose(tr.path[0], expect, atol=1e-12)


def test_ball_feasibility_every_iterate(hinge_obj, box_obj):
    for obj, w1 in ((hinge_obj, np.zeros(3)), (box_obj, np.array([0.9, -0.9]))):
        for D in (0.05, 0.5, 3.0):
            _, tr = inner_ball_ssg(obj, w1, D, 0.5, 2000, seed=1, record_path=True)
            assert np.max(np.linalg.norm(tr.path - w1, axis=1)) <= D + 1e-12
            assert tr.max_dist <= D + 1e-12


def test_streaming_chunking_is_invisible():
    obj = generate_synthetic({"family": "streaming_gaussian_regression", "d": 2}, 1)
    a = SampleStream(obj, make_rng(4))
    b = SampleStream(obj, make_rng(4))
    X1, y1, _ = a.take(BLOCK + 10)
    parts = [b.take(7), b.take(BLOCK), b.take(3)]
    np.testing.assert_array_equal(X1, np.concatenate([p[0] for p in parts]))
    np.testing.assert_array_equal(y1, np.concatenate([p[1] for p in parts]))


def test_ssg_example_abs_box():
    obj = generate_synthetic({"family": "one_dim", "kind": "abs",
                              "domain": {"kind": "box", "lower": -1, "upper": 1}}, 0)
    T = 10_000
    ok = sum(ssg(obj, [1.0], T, eta=1 / math.sqrt(T), seed=s).trace[-1].objective < 0.05
             for s in range(20))
    assert ok >= 18


def test_ssg_g_violation_recorded():
    obj = Objective(Dataset([[2.0]], [0.0]), Loss.absolute(), G=1.0)
    res = ssg(obj, [1.0], 50, eta=0.01, seed=0)
    assert res.g_violations == 50


def test_ssg_step_rules(abs_obj):
    with pytest.raises(ConfigurationError):
        ssg(abs_obj, [0.0], 10)
    with pytest.raises(ConfigurationError):
        ssg(abs_obj, [0.0], 10, eta=-1.0)
    res = ssg(abs_obj, [0.0], 100, B=2.0, seed=0)
    assert res.config["eta"] == 2.0 / (1.5 * 10)
    with pytest.raises(InvalidInputError):
        ssg(abs_obj, [0.0, 1.0], 10, eta=0.1)


def test_inner_argument_checks(abs_obj, box_obj):
    with pytest.raises(ConfigurationError):
        inner_ball_ssg(abs_obj, [0.0], 0.0, 0.1, 10)
    with pytest.raises(ConfigurationError):
        ssgs(abs_obj, [0.0], -1.0, 10)
    with pytest.raises(ConfigurationError):
        ssgs(abs_obj, [0.0], 1.0, 0)
    with pytest.raises(InvalidInputError):
        inner_ball_ssg(box_obj, [3.0, 0.0], 1.0, 0.1, 10)
    with pytest.raises(ConfigurationError):
        prox_inner(abs_obj, [0.0], 1.0, 0.1, 10)
    boxed = Objective(box_obj.source, Loss.absolute(), Regularizer.l1(0.1), mode="composite",
                      domain=box_obj.domain)
    with pytest.raises(ConfigurationError):
        prox_ssgs(boxed, [0.0, 0.0], 1.0, 10)


# -- degeneracies ---------------------------------------------------------------

def test_huge_ball_is_ssg(hinge_obj, box_obj):
    for obj, w in ((hinge_obj, np.zeros(3)), (box_obj, np.array([0.1, 0.2]))):
        a = ssg(obj, w, 5000, eta=0.03, seed=9, record_path=True)
        b, tr = inner_ball_ssg(obj, w, 1e9, 0.03, 5000, seed=9, record_path=True)
        assert a.w.tobytes() == b.tobytes()
        assert a.path.tobytes() == tr.path.tobytes()


def test_prox_none_is_ball_ssg():
    obj = generate_synthetic({"family": "robust_regression", "n": 12, "d": 2,
                              "mode": "composite"}, 5)
    a, ta = prox_inner(obj, np.zeros(2), 0.7, 0.05, 3000, seed=4, record_path=True)
    b, tb = inner_ball_ssg(obj, np.zeros(2), 0.7, 0.05, 3000, seed=4, record_path=True)
    assert a.tobytes() == b.tobytes() and ta.path.tobytes() == tb.path.tobytes()


def test_prox_ssgs_none_is_ssgs():
    obj = generate_synthetic({"family": "robust_regression", "n": 12, "d": 2,
                              "mode": "composite"}, 5)
    a, ta = prox_ssgs(obj, np.zeros(2), 0.9, 3000, seed=4, record_path=True)
    b, tb = ssgs(obj, np.zeros(2), 0.9, 3000, seed=4, record_path=True)
    assert a.tobytes() == b.tobytes() and ta.path.tobytes() == tb.path.tobytes()


# -- confinement -----------------------------------------------------------------

@pytest.mark.parametrize("beta", [0.01, 0.3, 5.0])
def test_ssgs_confinement(beta, hinge_obj, hinge_composite, abs_obj):
    for obj, fn in ((hinge_obj, ssgs), (abs_obj, ssgs), (hinge_composite, prox_ssgs)):
        w1 = np.full(obj.dim, 0.5)
        _, tr = fn(obj, w1, beta, 4000, seed=2, record_path=True)
        rho = obj.rho if fn is prox_ssgs else 0.0
        dist = np.linalg.norm(tr.path - w1, axis=1)
        assert tr.confinement_violations == 0
        assert np.all(dist <= 2 * beta * (tr.max_grad_norm + rho) + 1e-12)


def test_prox_inner_moves_toward_optimum(shifted_abs_composite):
    grid = np.linspace(-2, 2, 40001)
    w_star = grid[np.argmin(shifted_abs_composite.values(grid[:, None]))]
    assert abs(w_star - 1.0) < 1e-3
    w1 = np.array([-1.0])
    avg, _ = prox_inner(shifted_abs_composite, w1, 3.0, 0.02, 3000, seed=0)
    assert abs(avg[0] - w_star) < 0.5 * abs(w1[0] - w_star)


# -- stage drivers ----------------------------------------------------------------

def _halving(res, attr):
    vals = [getattr(r, attr) for r in res.trace]
    return all(b == a / 2 for a, b in zip(vals, vals[1:]))


def test_assg_c_schedule_exact(abs_obj):
    res = assg_c(AssgConfig(eps0=1, eps=2**-10, c=1, desk_scale_factor=0.01, seed=1), abs_obj)
    assert len(res.trace) == 10
    assert _halving(res, "eta") and _halving(res, "region")
    assert res.trace[0].eta == 1 / (3 * abs_obj.G**2)
    for k, r in enumerate(res.trace, start=1):
        assert r.eta == res.trace[0].eta / 2 ** (k - 1)
    ev = [r.cumulative_evaluations for r in res.trace]
    assert all(b > a for a, b in zip(ev, ev[1:]))
    assert res.total_evaluations == ev[-1] == 10 * res.schedule["t"]
    assert res.rng_algorithm == "numpy.PCG64"


def test_assg_r_beta_halving(abs_obj):
    res = assg_r(AssgConfig(eps0=1, eps=2**-8, c=1, desk_scale_factor=0.01), abs_obj)
    assert _halving(res, "region")
    assert res.trace[0].region == 2.0
    assert res.confinement_violations == 0


def test_determinism(hinge_obj):
    cfg = AssgConfig(eps0=1, eps=2**-5, c=HINGE_C, desk_scale_factor=0.002, seed=42)
    a, b = assg_c(cfg, hinge_obj), assg_c(cfg, hinge_obj)
    assert a.w.tobytes() == b.w.tobytes()
    for x, y in zip(a.trace, b.trace):
        assert x.w.tobytes() == y.w.tobytes() and x.objective == y.objective


def test_k_override_is_one_inner_call(hinge_obj):
    cfg = AssgConfig(eps0=1, eps=1e-3, D1=2.0, K_override=1, t_override=777, seed=3)
    res = assg_c(cfg, hinge_obj)
    direct, _ = inner_ball_ssg(hinge_obj, np.zeros(3), 2.0, 1 / (3 * hinge_obj.G**2), 777,
                               seed=3)
    assert len(res.trace) == 1 and res.trace[0].t == 777
    assert res.w.tobytes() == direct.tobytes()


def test_t_override_verbatim(abs_obj):
    res = assg_r(AssgConfig(eps0=1, eps=0.1, beta1=1.0, t_override=123,
                            desk_scale_factor=0.5), abs_obj)
    assert all(r.t == 123 for r in res.trace)


def test_unknown_c_points_to_rassg(abs_obj):
    for fn in (assg_c, assg_r):
        with pytest.raises(ConfigurationError, match="rassg"):
            fn(AssgConfig(eps0=1, eps=0.1), abs_obj)


def test_w0_validation(box_obj):
    with pytest.raises(InvalidInputError):
        assg_c(AssgConfig(eps0=1, eps=0.1, D1=1, w0=(5.0, 0.0)), box_obj)
    with pytest.raises(InvalidInputError):
        assg_c(AssgConfig(eps0=1, eps=0.1, D1=1, w0=(0.0,)), box_obj)


def test_failure_keeps_partial_trace(box_obj, monkeypatch):
    trace = []
    cfg = AssgConfig(eps0=1, eps=2**-4, D1=5.0, t_override=50, seed=0)
    assg_c(cfg, box_obj, trace=trace)
    assert len(trace) == 4
    monkeypatch.setattr(inner_mod, "MAX_DYKSTRA_ITERS", 1)
    trace = []
    with pytest.raises(NumericalFailure) as e:
        assg_c(AssgConfig(eps0=1, eps=2**-4, D1=0.3, t_override=50, seed=0,
                          w0=(0.9, 0.9)), box_obj, trace=trace)
    assert e.value.last_iterate is not None


def test_assg_c_abs_stage_gaps(abs_obj):
    eps = 2**-10
    ok = 0
    for s in range(20):
        res = assg_c(AssgConfig(eps0=1, eps=eps, c=1, delta=0.1, desk_scale_factor=0.02,
                                seed=s, f_star=0.0), abs_obj)
        ok += all(r.gap <= 2.0**-r.k + eps for r in res.trace)
    assert ok >= 18


def test_assg_r_abs_stage_gaps(abs_obj):
    eps = 2**-10
    ok = 0
    for s in range(20):
        res = assg_r(AssgConfig(eps0=1, eps=eps, c=1, delta=0.1, desk_scale_factor=0.02,
                                seed=s, f_star=0.0), abs_obj)
        ok += all(r.gap <= 2.0**-r.k + eps for r in res.trace)
        assert res.confinement_violations == 0
    assert ok >= 18


@pytest.mark.parametrize("solver", [prox_assg_c, prox_assg_r])
def test_prox_solvers_hinge(solver, hinge_composite, hinge_reference):
    eps = 2**-7
    ok = 0
    for s in range(20):
        res = solver(AssgConfig(eps0=1, eps=eps, c=HINGE_C, desk_scale_factor=0.01, seed=s,
                                f_star=hinge_reference.f_star), hinge_composite)
        ok += res.trace[-1].gap <= 2 * eps
        assert res.confinement_violations == 0
        assert res.g_violations == 0
    assert ok >= 18


def test_prox_assg_c_halving(hinge_composite):
    res = prox_assg_c(AssgConfig(eps0=1, eps=2**-4, D1=1.0, t_override=100), hinge_composite)
    assert _halving(res, "eta") and _halving(res, "region")
    assert res.trace[0].eta == 1 / (4 * hinge_composite.G**2)


def test_assg_c_global_huber(huber_obj):
    cfg = AssgConfig(eps0=1, eps=1e-2, c_hat=2.0, desk_scale_factor=0.01, w0=(1.5,),
                     f_star=0.0)
    res = assg_c_global(cfg, huber_obj)
    t = [r.t for r in res.trace]
    assert t == res.schedule["t_k"]
    assert all(b >= a for a, b in zip(t, t[1:]))
    assert _halving(res, "eta")
    assert res.trace[-1].gap <= 1e-2


def test_rassg_growth_in_trace(abs_obj):
    cfg = AssgConfig(eps0=1, eps=2**-4, theta=0.5, D1=0.5, desk_scale_factor=0.001,
                     restarts=3, f_star=0.0)
    res = rassg(cfg, abs_obj)
    K = res.schedule["K"]
    assert len(res.trace) == 3 * K
    first = [res.trace[s * K] for s in range(3)]
    assert [r.call for r in first] == [1, 2, 3]
    assert first[1].t == math.ceil(2 * first[0].t)
    assert first[1].region == pytest.approx(first[0].region * math.sqrt(2))
    zero = rassg(cfg, abs_obj, mode="theta_zero")
    f0 = [zero.trace[s * K] for s in range(3)]
    assert f0[1].t == 4 * f0[0].t and f0[1].region == 2 * f0[0].region
    with pytest.raises(ConfigurationError):
        rassg(cfg, abs_obj, mode="sometimes")


def test_streaming_assg_runs():
    obj = generate_synthetic({"family": "streaming_gaussian_regression", "d": 2,
                              "noise": 0.1, "mc_samples": 20_000}, 0)
    f_star, w_star = obj.known_optimum()
    res = assg_c(AssgConfig(eps0=4, eps=0.05, c=1.0, theta=0.5, t_override=3000,
                            f_star=f_star), obj)
    assert res.trace[-1].gap < res.trace[0].gap
    assert np.linalg.norm(res.w - w_star) < np.linalg.norm(w_star)
    assert full_objective(obj, res.w) == res.trace[-1].objective


def test_objective_box_domain_stays_feasible(box_obj):
    res = assg_c(AssgConfig(eps0=2, eps=2**-6, D1=2.0, t_override=300), box_obj)
    for r in res.trace:
        assert box_obj.domain.contains(r.w, 1e-9)
    assert isinstance(box_obj.domain, Box)
