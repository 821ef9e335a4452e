"""Centralized references the distributed filter is validated against.

An information-form centralized Kalman filter (the optimal estimator the
network is trying to match) and the closed-form network consensus fixed
point of the per-step state correction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dkf_admm.exceptions import NotPositiveDefinite
from dkf_admm.linalg import spd_inverse, spd_solve, sym
from dkf_admm.models import StateSpaceModel, information_rate_target, sensor_specs_at


@dataclass(frozen=True)
class CentralizedState:
    """Centralized filter state after one predict/correct cycle."""

    x_hat: np.ndarray
    p: np.ndarray
    p_prior: np.ndarray
    omega: np.ndarray  # information matrix, p^-1


def initial_centralized_state(model: StateSpaceModel) -> CentralizedState:
    p0 = sym(model.p0)
    return CentralizedState(
        x_hat=np.array(model.x0_mean, dtype=float),
        p=p0,
        p_prior=p0,
        omega=spd_inverse(p0),
    )


def centralized_kf_step(
    state: CentralizedState, model: StateSpaceModel, measurements, t: int | None = None
) -> CentralizedState:
    """One predict + information-form correction with all N measurements.

    Predict with (F, Q); correct by adding sum_i H_i' R_i^-1 H_i to the
    prior information matrix and sum_i H_i' R_i^-1 y_i to the information
    vector. `measurements` holds one y_i per node (may be empty).
    """
    f, q = model.f, model.q
    x_prior = f @ state.x_hat
    p_prior = sym(f @ state.p @ f.T + q)
    omega_prior = spd_inverse(p_prior)
    sensors = model.sensors if t is None else sensor_specs_at(model, t)
    omega = omega_prior.copy()
    info_vec = omega_prior @ x_prior
    for spec, y in zip(sensors, measurements):
        omega += spec.info_matrix
        info_vec += spec.rinv_h.T @ np.atleast_1d(np.asarray(y, dtype=float))
    omega = sym(omega)
    try:
        p = spd_inverse(omega)
    except NotPositiveDefinite:
        raise NotPositiveDefinite("posterior information matrix not PD")
    return CentralizedState(x_hat=p @ info_vec, p=p, p_prior=p_prior, omega=omega)


def centralized_prior_covariance(model: StateSpaceModel, n_steps: int) -> np.ndarray:
    """Prior covariance after n_steps centralized cycles from P0.

    P_{t+1|t} = F (P_{t|t-1}^-1 + H' Rbar^-1 H)^-1 F' + Q; this is the
    recursion whose limit is the Riccati solution.
    """
    gamma = information_rate_target(model)
    p = sym(model.p0)
    for _ in range(n_steps):
        p = sym(model.f @ spd_inverse(spd_inverse(p) + gamma) @ model.f.T + model.q)
    return p


def consensus_fixed_point(x_priors, p_priors, measurements, sensors) -> np.ndarray:
    """Unique minimizer of the network MAP problem at one time step.

    Returns (sum_i K_i^-1)^-1 sum_i (H_i' R_i^-1 y_i + P_i^-1 x_i / N)
    with K_i^-1 = H_i' R_i^-1 H_i + P_i^-1 / N. Every node's correction
    sub-iterations converge to this point.
    """
    n_nodes = len(sensors)
    n = np.asarray(x_priors[0]).size
    h_total = np.zeros((n, n))
    rhs = np.zeros(n)
    for x, p, y, spec in zip(x_priors, p_priors, measurements, sensors):
        p_inv = spd_inverse(p)
        h_total += spec.h.T @ spd_solve(spec.r, spec.h) + p_inv / n_nodes
        rhs += spd_solve(spec.r, spec.h).T @ np.atleast_1d(np.asarray(y, dtype=float))
        rhs += p_inv @ np.asarray(x, dtype=float) / n_nodes
    return spd_solve(sym(h_total), rhs)
