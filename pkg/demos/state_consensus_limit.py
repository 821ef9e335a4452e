"""Where the per-step state consensus actually lands.

Within one filter time step, the L sub-iterations drive all nodes'
estimates xi to agreement, and the disagreement decays geometrically at
the rate predicted by the mode-matrix analysis. This script also shows
*what* value they agree on: the node average of the local one-shot
estimates K_i b_i. That is not the joint MAP minimizer
(sum_i K_i^-1)^-1 sum_i b_i in general; the node-mean of xi is invariant
from the first sub-iteration onward, so the recursion cannot move it to
the joint optimum. The agreed value is still an unbiased fusion of every
node's data, which is why the filter's Monte-Carlo error is zero-mean.

Run:  python3 demos/state_consensus_limit.py
"""

import numpy as np

from dkf_admm import (
    auto_params,
    build_constant_velocity_model,
    build_graph,
    compute_gain,
    consensus_fixed_point,
    init_nodes,
    predict,
    simulate_trajectory,
    spd_inverse,
    spd_solve,
    spectral_summary,
    state_correction_round,
)

N = 5
graph = build_graph("path", N)
spectrum = spectral_summary(graph)
params = auto_params(spectrum, l_sub=1)
model = build_constant_velocity_model(dt=0.1, n_nodes=N, r_var=0.5)
traj = simulate_trajectory(model, 2, seed=77)
rng = np.random.default_rng(5)
nodes = init_nodes(model, model.x0_mean + rng.normal(size=(N, 4)))

meas = [traj.measurements[i][1] for i in range(N)]
for nd in nodes:
    predict(nd, model)
    nd.xi = nd.x_prior.copy()
    nd.lambda_tilde = np.zeros(4)

local = []
for nd, spec in zip(nodes, model.sensors):
    _, k = compute_gain(nd, spec, N)
    b = spec.rinv_h.T @ meas[nd.node_id]
    b = b + spd_inverse(nd.p_prior) @ nd.x_prior / N
    local.append(k @ b)
mean_local = np.mean(local, axis=0)
joint = consensus_fixed_point(
    [nd.x_prior for nd in nodes], [nd.p_prior for nd in nodes],
    meas, model.sensors,
)

_, state_rep = params.check(spectrum)
print(f"path graph, worst state-mode radius = {state_rep.spectral_radius:.4f}\n")
print(f"{'l':>5}  {'node spread':>12}  {'dist to mean(K_i b_i)':>22}"
      f"  {'dist to joint MAP':>18}")
for l in range(1, 501):
    state_correction_round(nodes, graph, meas, params, sensors=model.sensors)
    if l in (1, 5, 20, 50, 100, 200, 500):
        xi = np.array([nd.xi for nd in nodes])
        spread = np.abs(xi - xi.mean(axis=0)).max()
        to_mean = np.linalg.norm(xi[0] - mean_local)
        to_joint = np.linalg.norm(xi[0] - joint)
        print(f"{l:>5}  {spread:>12.3e}  {to_mean:>22.3e}  {to_joint:>18.3e}")

print("\nthe spread vanishes (consensus works) and the limit is exactly")
print("mean_i(K_i b_i); the distance to the joint minimizer stalls at a")
print(f"constant {np.linalg.norm(mean_local - joint):.3e} =")
print("||mean_i(K_i b_i) - joint MAP||, which no amount of sub-iterations")
print("removes")
