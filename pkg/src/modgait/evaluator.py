"""Quasi-static locomotion evaluation.

One run integrates a few gait cycles at the control rate. At every sample the
stance feet are pinned to their terrain footholds, the body rides on them via
a translation-only least-squares fit to the commanded foot targets, contact
forces are distributed by a minimum-norm static balance, and joint reactions,
torques, CoM and support-polygon margins are recorded. Failures (falling,
unreachable kinematics, getting stuck at a step, torque violation) are data
on the trace, not exceptions.
"""

from dataclasses import dataclass, field

import numpy as np

from . import robot as rb
from .geometry import convex_hull, signed_distances_to_hull

BALANCE_TOL = 1e-6


@dataclass(frozen=True)
class SimulationConfig:
    control_rate_hz: float = 240.0
    cycles: int = 3
    warmup_cycles: int = 1
    fall_threshold_m: float = None  # default 0.25 * leg length
    impact_proxy: bool = True

    def fall_threshold(self, leg_length):
        if self.fall_threshold_m is not None:
            return self.fall_threshold_m
        return 0.25 * leg_length


@dataclass
class SimulationTrace:
    times: np.ndarray  # (K,)
    body_rotation: np.ndarray  # (3, 3), fixed over the run
    body_position: np.ndarray  # (K, 3)
    com: np.ndarray  # (K, 3) world
    stance: np.ndarray  # (K, k) bool
    foot_world: np.ndarray  # (K, k, 3)
    joint_angles: np.ndarray  # (K, k, 3)
    contact_forces: np.ndarray  # (K, k, 3) world, zero for swing legs
    joint_torques: np.ndarray  # (K, k, 3) Nm
    joint_force_norms: np.ndarray  # (K, k, 3) |F_j| per joint
    margins: np.ndarray  # (K,) signed CoM distance to support polygon
    statically_feasible: np.ndarray  # (K,) bool
    balance_residual_force: np.ndarray  # (K,) N
    balance_residual_moment: np.ndarray  # (K,) N*m
    slip: np.ndarray  # (K,) bool, friction-cone diagnostic
    delta_x: float
    delta_y: float
    measured_duration: float
    cycle_period: float
    failure: str = None  # None | fell | stuck | unreachable | torque_exceeded
    torque_limit_nm: float = 12.0

    @property
    def sample_count(self):
        return len(self.times)

    def torque_violation(self):
        """Sum of per-sample, per-joint torque excesses over the limit."""
        excess = np.abs(self.joint_torques) - self.torque_limit_nm
        return float(np.maximum(excess, 0.0).sum())

    def summary(self):
        return {
            "failure": self.failure,
            "delta_x_m": self.delta_x,
            "delta_y_m": self.delta_y,
            "measured_duration_s": self.measured_duration,
            "cycle_period_s": self.cycle_period,
            "samples": int(self.sample_count),
            "mean_margin_m": float(self.margins.mean()) if self.sample_count else 0.0,
            "max_abs_torque_nm": float(np.abs(self.joint_torques).max())
            if self.sample_count
            else 0.0,
            "torque_violation": self.torque_violation(),
        }


def _skew(v):
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def _balance_matrix(rel_positions):
    """A of the static balance system for foot offsets (..., F, 3) from the CoM."""
    lead = rel_positions.shape[:-2]
    F = rel_positions.shape[-2]
    A = np.zeros(lead + (6, 3 * F))
    eye = np.eye(3)
    S = _skew(rel_positions)
    for i in range(F):
        A[..., 0:3, 3 * i : 3 * i + 3] = eye
        A[..., 3:6, 3 * i : 3 * i + 3] = S[..., i, :, :]
    return A


def distribute_contact_forces(stance_positions, com, weight, normals=None):
    """Minimum-norm contact forces balancing gravity about the CoM.

    Returns (forces (F, 3), force_residual, moment_residual). Feet whose
    minimum-norm solution would pull on the ground (negative normal
    component) are unloaded and the remainder re-solved; if that empties the
    contact set, the unconstrained least-squares forces are kept so load
    bookkeeping still sees something (the residuals expose infeasibility).
    """
    P = np.atleast_2d(np.asarray(stance_positions, dtype=float))
    if P.shape[0] == 0:
        raise ValueError("no stance feet")
    com = np.asarray(com, dtype=float)
    F = P.shape[0]
    if normals is None:
        normals = np.tile(np.array([0.0, 0.0, 1.0]), (F, 1))
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    b = np.array([0.0, 0.0, weight, 0.0, 0.0, 0.0])

    def solve(active):
        A = _balance_matrix((P - com)[active])
        x = np.linalg.pinv(A) @ b
        forces = np.zeros((F, 3))
        forces[active] = x.reshape(-1, 3)
        return forces

    active = np.ones(F, dtype=bool)
    forces = solve(active)
    for _ in range(F):
        normal_comp = np.einsum("ij,ij->i", forces, normals)
        bad = active & (normal_comp < -1e-9)
        if not bad.any():
            break
        worst = np.argmin(np.where(bad, normal_comp, np.inf))
        active[worst] = False
        if not active.any():
            forces = solve(np.ones(F, dtype=bool))  # infeasible: keep LS forces
            break
        forces = solve(active)
    resid = _balance_matrix(P - com) @ forces.reshape(-1) - b
    return forces, float(np.linalg.norm(resid[:3])), float(np.linalg.norm(resid[3:]))


def _batch_min_norm_forces(foot_positions, coms, weight, normals):
    """Vectorized contact distribution for fixed feet and per-sample CoM.

    foot_positions: (F, 3) fixed over the batch; coms: (K, 3);
    normals: (F, 3). Falls back to the per-sample active-set routine only
    where the unconstrained solution pulls on a foot.
    """
    K = coms.shape[0]
    F = foot_positions.shape[0]
    rel = foot_positions[None, :, :] - coms[:, None, :]  # (K, F, 3)
    A = _balance_matrix(rel)
    b = np.array([0.0, 0.0, weight, 0.0, 0.0, 0.0])
    x = np.linalg.pinv(A) @ b
    forces = x.reshape(K, F, 3)
    resid = np.einsum("kij,kj->ki", A, x) - b
    rf = np.linalg.norm(resid[:, :3], axis=1)
    rm = np.linalg.norm(resid[:, 3:], axis=1)
    normal_comp = np.einsum("kfj,fj->kf", forces, normals)
    bad = np.where((normal_comp < -1e-9).any(axis=1))[0]
    for k in bad:
        forces[k], rf[k], rm[k] = distribute_contact_forces(
            foot_positions, coms[k], weight, normals
        )
    return forces, rf, rm


def _body_rotation(terrain):
    if terrain.kind == "slope":
        th = np.radians(terrain.slope_deg)
        # Pitch the body to the slope: body x points uphill.
        return np.array(
            [[np.cos(th), 0.0, -np.sin(th)], [0.0, 1.0, 0.0], [np.sin(th), 0.0, np.cos(th)]]
        )
    return np.eye(3)


def _segments(stance):
    """Runs of constant stance pattern: list of (start, stop) sample ranges."""
    K = stance.shape[0]
    changes = np.where((stance[1:] != stance[:-1]).any(axis=1))[0] + 1
    bounds = np.concatenate([[0], changes, [K]])
    return [(int(bounds[i]), int(bounds[i + 1])) for i in range(len(bounds) - 1)]


def simulate(robot_model, schedule, terrain, config=None):
    """Run the quasi-static evaluation and return a full trace."""
    if config is None:
        config = SimulationConfig()
    if schedule.leg_count != robot_model.leg_count:
        raise ValueError("schedule/morphology leg count mismatch")
    k = robot_model.leg_count
    T = schedule.cycle_period
    # Integer samples per cycle: cycle boundaries land exactly on the grid, so
    # the measured window below spans whole cycles.
    per_cycle = max(int(round(config.control_rate_hz * T)), 2)
    dt = T / per_cycle
    K = config.cycles * per_cycle + 1
    times = np.arange(K) * dt
    R = _body_rotation(terrain)
    nominal = robot_model.nominal_footholds()

    # Commanded body-frame targets and stance pattern, fully vectorized.
    p_cmd = np.empty((K, k, 3))
    for i in range(k):
        p_cmd[:, i] = nominal[i] + schedule.foot_offsets(i, times)
    stance = schedule.stance_mask(times)

    # Body translation per segment of constant stance pattern: footholds are
    # fixed within a segment, so c_k = mean_i (w_i - R p_cmd_i) vectorizes.
    c = np.zeros((K, 3))
    foothold_series = np.zeros((K, k, 3))
    footholds = np.full((k, 3), np.nan)
    c_prev = terrain.surface_normal(0.0, 0.0) * robot_model.standing_height_m
    touchdowns = []  # (sample, leg) pairs for the landing-impact proxy
    prev_stance = np.zeros(k, dtype=bool)
    last_ground = np.full(k, np.nan)  # terrain height under each previous foothold
    failure = None
    K_eff = K
    for i0, i1 in _segments(stance):
        legs = np.where(stance[i0])[0]
        if legs.size == 0:
            failure, K_eff = "fell", max(i0, 1)
            break
        entering = stance[i0] & ~prev_stance
        for j in np.where(entering)[0]:
            w = R @ p_cmd[i0, j] + c_prev
            ground = float(terrain.height_at(w[0], w[1]))
            # Geometric clearance: a foothold can only be raised onto higher
            # ground (the step) if the swing apex clears the rise.
            if np.isfinite(last_ground[j]) and ground - last_ground[j] > schedule.swing_height:
                failure, K_eff = "stuck", max(i0, 1)
                break
            w[2] = ground
            footholds[j] = w
            last_ground[j] = ground
            if i0 > 0:
                touchdowns.append((i0, j))
        if failure is not None:
            break
        cmd_world = np.einsum("ab,tlb->tla", R, p_cmd[i0:i1, legs])
        c[i0:i1] = (footholds[None, legs] - cmd_world).mean(axis=1)
        foothold_series[i0:i1] = footholds
        c_prev = c[i1 - 1]
        prev_stance = stance[i0]
    if failure in ("fell", "stuck"):
        times, stance, p_cmd = times[:K_eff], stance[:K_eff], p_cmd[:K_eff]
        c, foothold_series = c[:K_eff], foothold_series[:K_eff]
        K = K_eff

    # Actual body-frame targets: pinned world footholds for stance legs.
    p_act = p_cmd.copy()
    pinned = np.einsum("ba,tlb->tla", R, foothold_series - c[:, None, :])
    p_act[stance] = pinned[stance]

    angles = np.empty((K, k, 3))
    ok = np.empty((K, k), dtype=bool)
    for i in range(k):
        angles[:, i], ok[:, i] = rb.inverse_kinematics(robot_model, i, p_act[:, i])
    bad = np.where(~ok.all(axis=1))[0]
    if bad.size and failure is None:
        failure = "unreachable"
        K = max(int(bad[0]), 1)
        times, stance, c = times[:K], stance[:K], c[:K]
        p_act, angles, foothold_series = p_act[:K], angles[:K], foothold_series[:K]

    foot_world = np.einsum("ab,tlb->tla", R, p_act) + c[:, None, :]
    foot_world[stance] = foothold_series[stance]
    com = rb.compute_com(robot_model, angles, R, c)

    # Support polygon and stability margin; the hull is fixed per segment.
    margins = np.empty(K)
    hull_ok = np.zeros(K, dtype=bool)
    for i0, i1 in _segments(stance):
        legs = np.where(stance[i0])[0]
        hull = convex_hull(foothold_series[i0, legs, :2])
        margins[i0:i1] = signed_distances_to_hull(com[i0:i1, :2], hull)
        hull_ok[i0:i1] = hull.shape[0] >= 3
    fall_thr = config.fall_threshold(robot_model.leg_length)
    fell = np.where(margins < -fall_thr)[0]
    if fell.size and failure is None:
        failure = "fell"
        K = max(int(fell[0]) + 1, 1)
        times, stance, c, com = times[:K], stance[:K], c[:K], com[:K]
        p_act, angles, foot_world = p_act[:K], angles[:K], foot_world[:K]
        foothold_series, margins, hull_ok = foothold_series[:K], margins[:K], hull_ok[:K]

    # Contact forces, segment-batched.
    contact = np.zeros((K, k, 3))
    res_f = np.zeros(K)
    res_m = np.zeros(K)
    slip = np.zeros(K, dtype=bool)
    weight = robot_model.weight
    for i0, i1 in _segments(stance):
        if i0 >= K:
            break
        i1 = min(i1, K)
        legs = np.where(stance[i0])[0]
        if legs.size == 0:
            continue
        feet = foothold_series[i0, legs]
        normals = terrain.surface_normal(feet[:, 0], feet[:, 1])
        forces, rf, rm = _batch_min_norm_forces(feet, com[i0:i1], weight, normals)
        contact[i0:i1, legs] = forces
        res_f[i0:i1], res_m[i0:i1] = rf, rm
        normal_mag = np.einsum("kfj,fj->kf", forces, normals)
        tang = np.linalg.norm(forces - normal_mag[..., None] * normals[None], axis=2)
        slip[i0:i1] = (tang > terrain.friction * np.maximum(normal_mag, 1e-12)).any(axis=1)

    statically_feasible = hull_ok & (margins >= 0.0) & (res_f < BALANCE_TOL) & (
        res_m < BALANCE_TOL
    )

    # Landing-impact proxy: augment the touchdown sample's contact force along
    # the surface normal by m_eff * v_touchdown * rate. These samples model an
    # impulse, so they are excluded from the static-feasibility bookkeeping.
    if config.impact_proxy:
        for (ki, j) in touchdowns:
            if ki >= K:
                continue
            m_eff = robot_model.legs[j].link_masses_kg[1]
            v_td = schedule.touchdown_speed(j)
            w = foothold_series[ki, j]
            n = terrain.surface_normal(w[0], w[1])
            contact[ki, j] += m_eff * v_td / dt * n
            statically_feasible[ki] = False

    torques = np.empty((K, k, 3))
    reactions = np.empty((K, k, 3))
    for i in range(k):
        torques[:, i] = rb.joint_torques(robot_model, i, angles[:, i], contact[:, i], R)
        reactions[:, i] = np.linalg.norm(
            rb.joint_reaction_forces(robot_model, i, contact[:, i], stance[:, i]), axis=-1
        )

    # Displacements over the measured window (post warm-up, integer cycles).
    win0 = config.warmup_cycles * per_cycle
    if failure is not None or win0 >= K - 1:
        win0 = 0
    delta = c[K - 1] - c[win0]
    measured_duration = max(float(times[K - 1] - times[win0]), dt)

    if failure is None and terrain.kind == "step":
        if com[-1, 0] < terrain.step_edge_x_m + robot_model.body_length_m / 2:
            failure = "stuck"
    tau_max = robot_model.torque_limit
    if failure is None and (np.abs(torques) > tau_max).any():
        failure = "torque_exceeded"

    return SimulationTrace(
        times=times,
        body_rotation=R,
        body_position=c,
        com=com,
        stance=stance,
        foot_world=foot_world,
        joint_angles=angles,
        contact_forces=contact,
        joint_torques=torques,
        joint_force_norms=reactions,
        margins=margins,
        statically_feasible=statically_feasible,
        balance_residual_force=res_f,
        balance_residual_moment=res_m,
        slip=slip,
        delta_x=float(delta[0]),
        delta_y=float(delta[1]),
        measured_duration=measured_duration,
        cycle_period=T,
        failure=failure,
        torque_limit_nm=tau_max,
    )


def trace_to_csv_rows(trace):
    """Per-sample rows for CSV export: header list + row iterator."""
    k = trace.stance.shape[1]
    header = ["t_s", "body_x_m", "body_y_m", "body_z_m", "com_x_m", "com_y_m", "com_z_m",
              "stance_bitmask", "margin_m"]
    for i in range(k):
        header += [f"leg{i + 1}_tau_yaw_nm", f"leg{i + 1}_tau_hip_nm", f"leg{i + 1}_tau_knee_nm"]
    for i in range(k):
        header += [f"leg{i + 1}_Fj_yaw_n", f"leg{i + 1}_Fj_hip_n", f"leg{i + 1}_Fj_knee_n"]

    def rows():
        for t in range(trace.sample_count):
            mask = sum(1 << i for i in range(k) if trace.stance[t, i])
            row = [trace.times[t], *trace.body_position[t], *trace.com[t], mask,
                   trace.margins[t]]
            row += list(trace.joint_torques[t].reshape(-1))
            row += list(trace.joint_force_norms[t].reshape(-1))
            yield row

    return header, rows()
