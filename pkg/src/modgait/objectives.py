"""The three-objective vector: locomotion speed, static stability, joint load.

All three are computed from a simulation trace. The optimizer minimizes
(-f_speed, -f_stability, f_load); the torque constraint is handled as a
nonnegative violation amount (0 = feasible).
"""

from dataclasses import dataclass

import numpy as np

from .geometry import convex_hull, signed_distance_to_hull
from .robot import compute_com, standard_posture_angles

FAILURE_PENALTY = 10.0


@dataclass(frozen=True)
class ObjectiveConstants:
    v_ref_mps: float = 0.15  # upper stride-speed limit, normalizes speed
    drift_weight: float = 0.5
    d_nom_m: float = 0.1  # standard-posture inscribed margin, per morphology
    leg_length_m: float = 0.4
    failure_penalty: float = FAILURE_PENALTY


def nominal_stability_margin(robot_model):
    """Inscribed CoM margin of the standard posture.

    For the 4-legged default morphology this lands near 0.54 * leg length.
    """
    angles = standard_posture_angles(robot_model)
    c = np.array([0.0, 0.0, robot_model.standing_height_m])
    com = compute_com(robot_model, angles, np.eye(3), c)
    feet = robot_model.nominal_footholds()[:, :2]
    return signed_distance_to_hull(com[:2], convex_hull(feet))


def constants_for(robot_model, v_ref_mps=0.15, drift_weight=0.5, d_nom_m=None,
                  failure_penalty=FAILURE_PENALTY):
    if d_nom_m is None:
        d_nom_m = nominal_stability_margin(robot_model)
    return ObjectiveConstants(
        v_ref_mps=v_ref_mps,
        drift_weight=drift_weight,
        d_nom_m=d_nom_m,
        leg_length_m=robot_model.leg_length,
        failure_penalty=failure_penalty,
    )


def f_speed(delta_x, delta_y, duration, v_ref=0.15, drift_weight=0.5):
    """Normalized forward speed minus a quadratic lateral-drift penalty."""
    scale = duration * v_ref
    fwd = delta_x / scale
    drift = abs(delta_y) / scale
    return fwd - drift_weight * drift * drift


def f_stability(margins, d_nom, leg_length):
    """Time-averaged normalized stability margin.

    A margin of d_nom or more saturates at 1; a CoM outside the support
    polygon is penalized on the leg-length scale, so -1 corresponds to being
    a full leg length outside.
    """
    m = np.asarray(margins, dtype=float)
    if m.size == 0:
        return -1.0
    norm = np.where(m >= 0.0, np.minimum(m / d_nom, 1.0), m / leg_length)
    return float(norm.mean())


def f_load(joint_force_norms, weight):
    """Average total joint reaction force, normalized by robot weight."""
    f = np.asarray(joint_force_norms, dtype=float)
    if f.size == 0:
        return 0.0
    n_samples = f.shape[0]
    return float(f.reshape(n_samples, -1).sum() / (n_samples * weight))


def assemble(trace, constants, weight):
    """Minimization triple and constraint violation for one trace.

    Failed runs are still scored on whatever samples exist, and get a fixed
    penalty added to the torque-violation amount so feasibility-first
    selection deprioritizes them without discarding them.
    """
    speed = f_speed(
        trace.delta_x,
        trace.delta_y,
        trace.measured_duration,
        constants.v_ref_mps,
        constants.drift_weight,
    )
    stability = f_stability(trace.margins, constants.d_nom_m, constants.leg_length_m)
    load = f_load(trace.joint_force_norms, weight)
    violation = trace.torque_violation()
    if trace.failure is not None:
        violation += constants.failure_penalty
    return np.array([-speed, -stability, load]), violation
