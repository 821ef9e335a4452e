import numpy as np
import pytest

from dkf_admm.centralized import (
    centralized_kf_step,
    centralized_prior_covariance,
    consensus_fixed_point,
    initial_centralized_state,
)
from dkf_admm.linalg import dare_solve, spd_inverse, spd_solve
from dkf_admm.models import (
    SensorSpec,
    StateSpaceModel,
    build_constant_velocity_model,
    simulate_trajectory,
)


def _gain_form_kf(model, traj):
    """Independent textbook gain-form Kalman filter over a trajectory."""
    h = np.vstack([s.h for s in model.sensors])
    r = np.diag([float(s.r[0, 0]) for s in model.sensors])
    x = np.array(model.x0_mean, dtype=float)
    p = np.array(model.p0, dtype=float)
    xs, ps = [x.copy()], [p.copy()]
    for t in range(1, traj.states.shape[0]):
        x = model.f @ x
        p = model.f @ p @ model.f.T + model.q
        y = np.array([traj.measurements[i][t][0] for i in range(model.n_nodes)])
        s = h @ p @ h.T + r
        gain = p @ h.T @ np.linalg.inv(s)
        x = x + gain @ (y - h @ x)
        p = (np.eye(model.n) - gain @ h) @ p
        xs.append(x.copy())
        ps.append(0.5 * (p + p.T))
    return xs, ps


def test_scalar_textbook_update():
    # prior N(0, 1), two unit sensors with variance 1 each, both observe 1.5:
    # posterior mean 1.0 (information weights 1:1:1), variance 1/3
    sensors = (
        SensorSpec(0, np.array([[1.0]]), np.array([[1.0]])),
        SensorSpec(1, np.array([[1.0]]), np.array([[1.0]])),
    )
    model = StateSpaceModel(
        f=np.eye(1), q=np.zeros((1, 1)), sensors=sensors,
        x0_mean=np.zeros(1), p0=np.eye(1),
    )
    state = initial_centralized_state(model)
    new = centralized_kf_step(state, model, [np.array([1.5]), np.array([1.5])])
    assert new.x_hat[0] == pytest.approx(1.0, abs=1e-12)
    assert new.p[0, 0] == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_empty_correction_is_pure_prediction():
    model = build_constant_velocity_model(dt=0.1, n_nodes=2)
    state = initial_centralized_state(model)
    new = centralized_kf_step(state, model, [])
    assert np.allclose(new.x_hat, model.f @ state.x_hat)
    assert np.allclose(new.p, model.f @ state.p @ model.f.T + model.q, atol=1e-12)


def test_information_form_matches_gain_form():
    model = build_constant_velocity_model(dt=0.1, n_nodes=8, r_var=0.5)
    traj = simulate_trajectory(model, 40, seed=21)
    xs, ps = _gain_form_kf(model, traj)
    state = initial_centralized_state(model)
    for t in range(1, 40):
        meas = [traj.measurements[i][t] for i in range(model.n_nodes)]
        state = centralized_kf_step(state, model, meas)
        assert np.allclose(state.x_hat, xs[t], atol=1e-10)
        assert np.allclose(state.p, ps[t], atol=1e-10)


def _local_terms(x_priors, p_priors, measurements, sensors):
    n_nodes = len(sensors)
    out = []
    for x, p, y, spec in zip(x_priors, p_priors, measurements, sensors):
        p_inv = spd_inverse(np.asarray(p, dtype=float))
        k_inv = spec.h.T @ spd_solve(spec.r, spec.h) + p_inv / n_nodes
        b = spd_solve(spec.r, spec.h).T @ np.atleast_1d(np.asarray(y, float))
        b = b + p_inv @ np.asarray(x, float) / n_nodes
        out.append((k_inv, b))
    return out


def test_fixed_point_identical_nodes():
    # all nodes share the same prior and measurement: the fixed point is the
    # single-node posterior
    model = build_constant_velocity_model(dt=0.1, n_nodes=2)
    spec = model.sensors[0]
    sensors = (spec, SensorSpec(1, spec.h, spec.r))
    x0 = np.array([0.3, -0.2, 1.0, 0.9])
    p0 = np.eye(4)
    y = np.array([0.5])
    xi = consensus_fixed_point([x0, x0], [p0, p0], [y, y], sensors)
    k_inv = 2 * spec.info_matrix + np.linalg.inv(p0)
    b = 2 * spec.h.T @ np.linalg.solve(spec.r, y) + np.linalg.solve(p0, x0)
    assert np.allclose(xi, np.linalg.solve(k_inv, b), atol=1e-12)


def test_fixed_point_gradient_vanishes():
    rng = np.random.default_rng(17)
    model = build_constant_velocity_model(dt=0.1, n_nodes=6, r_var=0.7)
    x_priors = [rng.normal(size=4) for _ in range(6)]
    p_priors = []
    for _ in range(6):
        g = rng.normal(size=(4, 4))
        p_priors.append(g @ g.T + np.eye(4))
    meas = [rng.normal(size=1) for _ in range(6)]
    xi = consensus_fixed_point(x_priors, p_priors, meas, model.sensors)
    grad = np.zeros(4)
    for k_inv, b in _local_terms(x_priors, p_priors, meas, model.sensors):
        grad += k_inv @ xi - b
    assert np.linalg.norm(grad) < 1e-9


def test_fixed_point_brute_force_quadratic():
    # explicit 2-node quadratic: minimize sum_i (0.5 xi' Kinv_i xi - b_i' xi)
    # solved by stacking the normal equations directly
    rng = np.random.default_rng(5)
    model = build_constant_velocity_model(dt=0.2, n_nodes=2, r_var=1.3)
    x_priors = [rng.normal(size=4), rng.normal(size=4)]
    p_priors = [np.eye(4) * 2.0, np.diag([1.0, 2.0, 3.0, 4.0])]
    meas = [rng.normal(size=1), rng.normal(size=1)]
    terms = _local_terms(x_priors, p_priors, meas, model.sensors)
    a = sum(t[0] for t in terms)
    b = sum(t[1] for t in terms)
    oracle = np.linalg.solve(a, b)
    xi = consensus_fixed_point(x_priors, p_priors, meas, model.sensors)
    assert np.allclose(xi, oracle, atol=1e-11)


def test_fixed_point_matches_centralized_posterior():
    # when every node carries the centralized prior, the network fixed point
    # is exactly the centralized posterior mean
    model = build_constant_velocity_model(dt=0.1, n_nodes=6, r_var=0.5)
    traj = simulate_trajectory(model, 5, seed=2)
    state = initial_centralized_state(model)
    for t in range(1, 5):
        meas = [traj.measurements[i][t] for i in range(model.n_nodes)]
        prior_x = model.f @ state.x_hat
        prior_p = model.f @ state.p @ model.f.T + model.q
        state = centralized_kf_step(state, model, meas)
        xi = consensus_fixed_point(
            [prior_x] * 6, [prior_p] * 6, meas, model.sensors
        )
        assert np.allclose(xi, state.x_hat, atol=1e-10)


def test_prior_covariance_reaches_riccati_limit():
    model = build_constant_velocity_model(dt=0.1, n_nodes=10, r_var=0.5)
    h = np.vstack([s.h for s in model.sensors])
    r = np.diag([float(s.r[0, 0]) for s in model.sensors])
    p_star = dare_solve(model.f, h, model.q, r, tol=1e-13)
    p_t = centralized_prior_covariance(model, 2000)
    assert np.linalg.norm(p_t - p_star) < 1e-8
