"""Modular legged-robot morphology: leg chains, kinematics, mass properties.

Each leg is a yaw-pitch-pitch chain (leg rotation module at the hip followed
by two lifting modules). Legs are numbered front-to-back with the left side
odd and the right side even (1-based), i.e. 0-based index i is on the left
when i is even.

All kinematics functions are pure and accept batched joint-angle arrays with
shape (..., 3).
"""

import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

GRAVITY = 9.81

PRESET_DIR = Path(__file__).parent / "presets"


@dataclass(frozen=True)
class LegModel:
    link_lengths_m: tuple  # (upper, lower)
    link_masses_kg: tuple
    torque_limit_nm: float = 12.0
    yaw_limits_rad: tuple = (-1.4, 1.4)
    hip_limits_rad: tuple = (-1.57, 1.57)
    knee_limits_rad: tuple = (0.0, 2.9)

    def __post_init__(self):
        if any(l <= 0 for l in self.link_lengths_m):
            raise ValueError("link lengths must be positive")

    @property
    def length(self):
        return float(sum(self.link_lengths_m))

    @property
    def limits(self):
        return np.array([self.yaw_limits_rad, self.hip_limits_rad, self.knee_limits_rad])


@dataclass(frozen=True)
class RobotModel:
    legs: tuple  # of LegModel, len 4 or 6
    body_mass_kg: float
    body_length_m: float
    body_width_m: float
    standing_height_m: float
    foot_lateral_offset_m: float
    name: str = "robot"

    def __post_init__(self):
        if len(self.legs) not in (4, 6):
            raise ValueError("leg count must be 4 or 6")

    @property
    def leg_count(self):
        return len(self.legs)

    @property
    def total_mass(self):
        return self.body_mass_kg + sum(sum(l.link_masses_kg) for l in self.legs)

    @property
    def weight(self):
        """Total weight in newtons."""
        return GRAVITY * self.total_mass

    @property
    def leg_length(self):
        return self.legs[0].length

    @property
    def torque_limit(self):
        return self.legs[0].torque_limit_nm

    @property
    def hip_positions(self):
        """Body-frame hip coordinates, (k, 3). Rows front to back."""
        k = self.leg_count
        rows = k // 2
        if rows == 2:
            xs = [self.body_length_m / 2, -self.body_length_m / 2]
        else:
            xs = [self.body_length_m / 2, 0.0, -self.body_length_m / 2]
        hips = np.zeros((k, 3))
        for i in range(k):
            hips[i, 0] = xs[i // 2]
            hips[i, 1] = self.body_width_m / 2 if i % 2 == 0 else -self.body_width_m / 2
        return hips

    @property
    def mount_yaws(self):
        """Hip-frame mounting yaw per leg: zero yaw points laterally outward."""
        return np.array([np.pi / 2 if i % 2 == 0 else -np.pi / 2 for i in range(self.leg_count)])

    def nominal_footholds(self):
        """Body-frame rest footholds: outboard of each hip at standing depth."""
        feet = self.hip_positions.copy()
        for i in range(self.leg_count):
            side = 1.0 if i % 2 == 0 else -1.0
            feet[i, 1] += side * self.foot_lateral_offset_m
            feet[i, 2] = -self.standing_height_m
        return feet


def _rotz(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _fk_hip(leg, q):
    """Foot position in the hip frame for angles (..., 3)."""
    a1, a2 = leg.link_lengths_m
    q = np.asarray(q, dtype=float)
    q1, q2, q3 = q[..., 0], q[..., 1], q[..., 2]
    r = a1 * np.cos(q2) + a2 * np.cos(q2 + q3)
    z = -(a1 * np.sin(q2) + a2 * np.sin(q2 + q3))
    return np.stack([np.cos(q1) * r, np.sin(q1) * r, z], axis=-1)


def forward_kinematics(robot, leg_index, q):
    """Body-frame foot position for joint angles q (..., 3)."""
    p_hip = _fk_hip(robot.legs[leg_index], q)
    R = _rotz(robot.mount_yaws[leg_index])
    return robot.hip_positions[leg_index] + p_hip @ R.T


def inverse_kinematics(robot, leg_index, target, check_limits=True):
    """Closed-form IK for body-frame targets (..., 3).

    Returns (angles, ok). Targets outside the reachable annulus or violating
    joint limits get ok=False (angles are still filled with the clamped
    attempt for those entries). The knee-down branch (knee flexion >= 0) is
    always chosen.
    """
    leg = robot.legs[leg_index]
    a1, a2 = leg.link_lengths_m
    target = np.asarray(target, dtype=float)
    R = _rotz(robot.mount_yaws[leg_index])
    local = (target - robot.hip_positions[leg_index]) @ R  # hip frame

    x, y, z = local[..., 0], local[..., 1], local[..., 2]
    q1 = np.arctan2(y, x)
    r = np.hypot(x, y)
    d = -z
    c3 = (r * r + d * d - a1 * a1 - a2 * a2) / (2.0 * a1 * a2)
    reachable = np.abs(c3) <= 1.0
    q3 = np.arccos(np.clip(c3, -1.0, 1.0))
    q2 = np.arctan2(d, r) - np.arctan2(a2 * np.sin(q3), a1 + a2 * np.cos(q3))
    angles = np.stack([q1, q2, q3], axis=-1)
    ok = reachable
    if check_limits:
        lim = leg.limits
        within = ((angles >= lim[:, 0] - 1e-12) & (angles <= lim[:, 1] + 1e-12)).all(axis=-1)
        ok = ok & within
    return angles, ok


def leg_jacobian(robot, leg_index, q):
    """Body-frame foot Jacobian, shape (..., 3, 3); column j = d foot / d q_j."""
    leg = robot.legs[leg_index]
    a1, a2 = leg.link_lengths_m
    q = np.asarray(q, dtype=float)
    q1, q2, q3 = q[..., 0], q[..., 1], q[..., 2]
    c1, s1 = np.cos(q1), np.sin(q1)
    s2, c2 = np.sin(q2), np.cos(q2)
    s23, c23 = np.sin(q2 + q3), np.cos(q2 + q3)
    r = a1 * c2 + a2 * c23
    dr2 = -(a1 * s2 + a2 * s23)
    dr3 = -a2 * s23
    J = np.empty(q.shape[:-1] + (3, 3))
    J[..., 0, 0] = -s1 * r
    J[..., 1, 0] = c1 * r
    J[..., 2, 0] = 0.0
    J[..., 0, 1] = c1 * dr2
    J[..., 1, 1] = s1 * dr2
    J[..., 2, 1] = -(a1 * c2 + a2 * c23)
    J[..., 0, 2] = c1 * dr3
    J[..., 1, 2] = s1 * dr3
    J[..., 2, 2] = -a2 * c23
    R = _rotz(robot.mount_yaws[leg_index])
    return np.einsum("ab,...bj->...aj", R, J)


def link_midpoints(robot, leg_index, q):
    """Body-frame midpoints of the two leg links, shapes (..., 3) each."""
    leg = robot.legs[leg_index]
    a1, a2 = leg.link_lengths_m
    q = np.asarray(q, dtype=float)
    q1, q2, q3 = q[..., 0], q[..., 1], q[..., 2]
    c1, s1 = np.cos(q1), np.sin(q1)

    def radial(rr, zz):
        return np.stack([c1 * rr, s1 * rr, zz], axis=-1)

    mid1 = radial(0.5 * a1 * np.cos(q2), -0.5 * a1 * np.sin(q2))
    mid2 = radial(
        a1 * np.cos(q2) + 0.5 * a2 * np.cos(q2 + q3),
        -(a1 * np.sin(q2) + 0.5 * a2 * np.sin(q2 + q3)),
    )
    R = _rotz(robot.mount_yaws[leg_index])
    hip = robot.hip_positions[leg_index]
    return hip + mid1 @ R.T, hip + mid2 @ R.T


def _link_midpoint_jacobians(leg, q):
    """Hip-frame Jacobians of the two link midpoints, (..., 3, 3) each."""
    a1, a2 = leg.link_lengths_m
    q = np.asarray(q, dtype=float)
    q1, q2, q3 = q[..., 0], q[..., 1], q[..., 2]
    c1, s1 = np.cos(q1), np.sin(q1)
    s2, c2 = np.sin(q2), np.cos(q2)
    s23, c23 = np.sin(q2 + q3), np.cos(q2 + q3)
    zeros = np.zeros_like(q1)

    def jac(r, dr_dq2, dr_dq3, dz_dq2, dz_dq3):
        J = np.empty(q.shape[:-1] + (3, 3))
        J[..., 0, 0] = -s1 * r
        J[..., 1, 0] = c1 * r
        J[..., 2, 0] = 0.0
        J[..., 0, 1] = c1 * dr_dq2
        J[..., 1, 1] = s1 * dr_dq2
        J[..., 2, 1] = dz_dq2
        J[..., 0, 2] = c1 * dr_dq3
        J[..., 1, 2] = s1 * dr_dq3
        J[..., 2, 2] = dz_dq3
        return J

    # Midpoint of the upper link: r = a1/2 cos q2, z = -a1/2 sin q2.
    J1 = jac(0.5 * a1 * c2, -0.5 * a1 * s2, zeros, -0.5 * a1 * c2, zeros)
    # Midpoint of the lower link: r = a1 cos q2 + a2/2 cos(q2+q3).
    J2 = jac(
        a1 * c2 + 0.5 * a2 * c23,
        -(a1 * s2 + 0.5 * a2 * s23),
        -0.5 * a2 * s23,
        -(a1 * c2 + 0.5 * a2 * c23),
        -0.5 * a2 * c23,
    )
    return J1, J2


def gravity_torques(robot, leg_index, q, body_rotation=None):
    """Actuator torques holding the leg's own link weight, (..., 3).

    `body_rotation` maps body to world; gravity acts along world -z, so only
    the world-z row of the rotated midpoint Jacobians matters.
    """
    leg = robot.legs[leg_index]
    m1, m2 = leg.link_masses_kg
    J1, J2 = _link_midpoint_jacobians(leg, q)
    Rm = _rotz(robot.mount_yaws[leg_index])
    if body_rotation is not None:
        Rm = np.asarray(body_rotation) @ Rm
    zrow = Rm[2]
    dz1 = np.einsum("b,...bj->...j", zrow, J1)
    dz2 = np.einsum("b,...bj->...j", zrow, J2)
    return GRAVITY * (m1 * dz1 + m2 * dz2)


def joint_torques(robot, leg_index, q, contact_force_world, body_rotation=None):
    """Static actuator torques: J^T (-F_contact) plus distal gravity, (..., 3)."""
    J = leg_jacobian(robot, leg_index, q)
    if body_rotation is not None:
        J = np.einsum("ab,...bj->...aj", np.asarray(body_rotation), J)
    F = np.asarray(contact_force_world, dtype=float)
    tau_c = -np.einsum("...aj,...a->...j", J, F)
    return tau_c + gravity_torques(robot, leg_index, q, body_rotation)


def joint_reaction_forces(robot, leg_index, contact_force_world, stance):
    """World-frame force transmitted through each joint, (..., 3, 3).

    Joint order [yaw, hip pitch, knee]. Each joint carries the contact force
    plus the weight of everything distal to it; swing legs carry link weight
    only.
    """
    leg = robot.legs[leg_index]
    m1, m2 = leg.link_masses_kg
    F = np.asarray(contact_force_world, dtype=float)
    stance = np.asarray(stance)
    Fc = np.where(stance[..., None], F, 0.0)
    out = np.empty(Fc.shape[:-1] + (3, 3))
    gz = np.array([0.0, 0.0, GRAVITY])
    out[..., 0, :] = Fc - (m1 + m2) * gz  # yaw module at the hip
    out[..., 1, :] = Fc - (m1 + m2) * gz  # hip pitch, co-located
    out[..., 2, :] = Fc - m2 * gz  # knee
    return out


def compute_com(robot, all_angles, body_rotation, body_position):
    """World-frame CoM for joint angles (..., k, 3) and a rigid body pose.

    Links are point masses at segment midpoints; the body mass sits at the
    body-frame origin.
    """
    all_angles = np.asarray(all_angles, dtype=float)
    R = np.asarray(body_rotation, dtype=float)
    c = np.asarray(body_position, dtype=float)
    acc = robot.body_mass_kg * c * np.ones(all_angles.shape[:-2] + (3,))
    for i, leg in enumerate(robot.legs):
        m1, m2 = leg.link_masses_kg
        p1, p2 = link_midpoints(robot, i, all_angles[..., i, :])
        acc = acc + m1 * (p1 @ R.T + c) + m2 * (p2 @ R.T + c)
    return acc / robot.total_mass


def standard_posture_angles(robot):
    """Joint angles (k, 3) of the rest pose: all feet at nominal footholds."""
    feet = robot.nominal_footholds()
    angles = np.empty((robot.leg_count, 3))
    for i in range(robot.leg_count):
        q, ok = inverse_kinematics(robot, i, feet[i])
        if not ok:
            raise ValueError(f"nominal foothold of leg {i + 1} unreachable; check morphology")
        angles[i] = q
    return angles


def load_morphology(path_or_name):
    """Load a morphology from a TOML file or a shipped preset name."""
    p = Path(path_or_name)
    if not p.exists():
        preset = PRESET_DIR / f"{path_or_name}.toml"
        if preset.exists():
            p = preset
        else:
            raise FileNotFoundError(f"no morphology file or preset named {path_or_name!r}")
    with open(p, "rb") as f:
        data = tomllib.load(f)
    leg_cfg = data["leg"]
    leg = LegModel(
        link_lengths_m=tuple(leg_cfg["link_lengths_m"]),
        link_masses_kg=tuple(leg_cfg["link_masses_kg"]),
        torque_limit_nm=float(leg_cfg.get("torque_limit_nm", 12.0)),
        yaw_limits_rad=tuple(leg_cfg.get("yaw_limits_rad", (-1.4, 1.4))),
        hip_limits_rad=tuple(leg_cfg.get("hip_limits_rad", (-1.57, 1.57))),
        knee_limits_rad=tuple(leg_cfg.get("knee_limits_rad", (0.0, 2.9))),
    )
    return RobotModel(
        legs=tuple(leg for _ in range(int(data["leg_count"]))),
        body_mass_kg=float(data["body_mass_kg"]),
        body_length_m=float(data["body_length_m"]),
        body_width_m=float(data["body_width_m"]),
        standing_height_m=float(data["standing_height_m"]),
        foot_lateral_offset_m=float(data["foot_lateral_offset_m"]),
        name=str(data.get("name", p.stem)),
    )
