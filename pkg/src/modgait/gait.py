"""Gait parameterization: decision vectors, phase schedules, foot trajectories.

A candidate gait is the parameter set {strides L_i, swing speeds V_i, swing
height H, duty factor beta}. A named gait fixes the per-leg phase offsets;
the decision vector fixes everything else. Foot trajectories are body-frame
targets over one cycle: a linear rearward stance path and a smooth swing arc.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

STRIDE_BOUNDS = (0.05, 0.30)
SPEED_BOUNDS = (0.01, 0.15)
HEIGHT_BOUNDS = (0.10, 0.50)
DUTY_BOUNDS = {
    "trot": (0.51, 0.70),
    "tripod": (0.51, 0.70),
    "wave": (0.84, 0.95),
    "tetrapod": (0.67, 0.85),
}
GAIT_LEG_COUNT = {"trot": 4, "wave": 6, "tetrapod": 6, "tripod": 6}

# 0-based leg index i is leg i+1: front-to-back, left odd / right even.
PHASE_OFFSETS = {
    # diagonal pairs {1,4} and {2,3} in anti-phase
    "trot": np.array([0.0, 0.5, 0.5, 0.0]),
    # groups {1,4,5} and {2,3,6} in anti-phase
    "tripod": np.array([0.0, 0.5, 0.5, 0.0, 0.0, 0.5]),
    # rear-to-front sequencing, consecutive legs 1/6 apart per side
    "wave": np.array([2 / 6, 5 / 6, 1 / 6, 4 / 6, 0.0, 3 / 6]),
    # pairs {1,4}, {2,5}, {3,6} shifted by 1/3
    "tetrapod": np.array([0.0, 1 / 3, 2 / 3, 0.0, 1 / 3, 2 / 3]),
}


@dataclass(frozen=True)
class DecisionVector:
    strides: np.ndarray  # (k,) m
    swing_speeds: np.ndarray  # (k,) m/s
    swing_height: float  # m
    duty_factor: float

    def validate(self, gait_name):
        k = len(self.strides)
        if len(self.swing_speeds) != k:
            raise ConfigError("strides and swing speeds must have equal length")
        lo, hi = gait_bounds(gait_name, k)
        g = self.to_genome()
        bad = np.where((g < lo - 1e-12) | (g > hi + 1e-12))[0]
        if bad.size:
            names = genome_field_names(k)
            raise ConfigError(
                f"decision variable {names[bad[0]]}={g[bad[0]]:.4g} outside "
                f"[{lo[bad[0]]:.3g}, {hi[bad[0]]:.3g}]"
            )

    def to_genome(self):
        return np.concatenate(
            [self.strides, self.swing_speeds, [self.swing_height, self.duty_factor]]
        )


def genome_field_names(leg_count):
    return (
        [f"stride_m[{i + 1}]" for i in range(leg_count)]
        + [f"speed_mps[{i + 1}]" for i in range(leg_count)]
        + ["height_m", "duty_factor"]
    )


def genome_length(leg_count):
    return 2 * leg_count + 2


def gait_bounds(gait_name, leg_count=None):
    """Search-range bounds (lower, upper) for the genome of a named gait."""
    if gait_name not in GAIT_LEG_COUNT:
        raise ConfigError(f"unknown gait {gait_name!r}")
    k = GAIT_LEG_COUNT[gait_name]
    if leg_count is not None and leg_count != k:
        raise ConfigError(f"gait {gait_name!r} needs {k} legs, got {leg_count}")
    beta_lo, beta_hi = DUTY_BOUNDS[gait_name]
    lo = np.array([STRIDE_BOUNDS[0]] * k + [SPEED_BOUNDS[0]] * k + [HEIGHT_BOUNDS[0], beta_lo])
    hi = np.array([STRIDE_BOUNDS[1]] * k + [SPEED_BOUNDS[1]] * k + [HEIGHT_BOUNDS[1], beta_hi])
    return lo, hi


def genome_decode(vector, gait_name, leg_count):
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (genome_length(leg_count),):
        raise ConfigError(
            f"genome length {vector.size} != {genome_length(leg_count)} for {leg_count} legs"
        )
    k = leg_count
    return DecisionVector(
        strides=vector[:k].copy(),
        swing_speeds=vector[k : 2 * k].copy(),
        swing_height=float(vector[2 * k]),
        duty_factor=float(vector[2 * k + 1]),
    )


def genome_encode(dv):
    return dv.to_genome()


@dataclass(frozen=True)
class GaitSchedule:
    gait_name: str
    phase_offsets: np.ndarray  # (k,) in [0, 1)
    strides: np.ndarray
    swing_speeds: np.ndarray
    swing_height: float
    duty_factor: float
    cycle_period: float  # s

    @property
    def leg_count(self):
        return len(self.phase_offsets)

    @property
    def swing_fraction(self):
        return 1.0 - self.duty_factor

    @property
    def swing_durations(self):
        """Seconds each leg actually spends moving through its arc."""
        return self.strides / self.swing_speeds

    def leg_phases(self, times):
        """Per-leg cycle phase u in [0, 1), shape (K, k)."""
        t = np.atleast_1d(np.asarray(times, dtype=float))
        return (t[:, None] / self.cycle_period - self.phase_offsets[None, :]) % 1.0

    def stance_mask(self, times):
        """Boolean (K, k): True where the leg is load-bearing."""
        return self.leg_phases(times) >= self.swing_fraction

    def foot_offsets(self, leg_index, times):
        """Body-frame offsets (K, 3) of leg's foot target from its nominal foothold.

        Swing: forward cubic ease over the stride with a sin arc of height H,
        completed in L_i/V_i seconds, then held at the front extremum (legs
        faster than the slowest finish early). Stance: linear rearward sweep.
        """
        L = self.strides[leg_index]
        u = self.leg_phases(times)[:, leg_index]
        sf = self.swing_fraction
        swing = u < sf
        out = np.zeros((u.size, 3))
        s = np.clip(u * self.cycle_period / self.swing_durations[leg_index], 0.0, 1.0)
        ease = 3.0 * s * s - 2.0 * s * s * s
        out[:, 0] = np.where(
            swing,
            -L / 2 + L * ease,
            L / 2 - L * (u - sf) / self.duty_factor,
        )
        out[:, 2] = np.where(swing, self.swing_height * np.sin(np.pi * s), 0.0)
        return out

    def touchdown_speed(self, leg_index):
        """Vertical foot speed magnitude at the end of the swing arc, m/s."""
        return np.pi * self.swing_height / self.swing_durations[leg_index]


def build_schedule(gait_name, leg_count, dv):
    """Validate a decision vector against a named gait and produce its schedule.

    The cycle period is set by the slowest leg, T = max(L_i/V_i) / (1 - beta),
    so that leg's swing exactly fills the swing window.
    """
    if gait_name not in GAIT_LEG_COUNT:
        raise ConfigError(f"unknown gait {gait_name!r}")
    if GAIT_LEG_COUNT[gait_name] != leg_count:
        raise ConfigError(f"gait {gait_name!r} needs {GAIT_LEG_COUNT[gait_name]} legs, got {leg_count}")
    dv.validate(gait_name)
    beta = dv.duty_factor
    T = float(np.max(dv.strides / dv.swing_speeds)) / (1.0 - beta)
    return GaitSchedule(
        gait_name=gait_name,
        phase_offsets=PHASE_OFFSETS[gait_name].copy(),
        strides=np.asarray(dv.strides, dtype=float).copy(),
        swing_speeds=np.asarray(dv.swing_speeds, dtype=float).copy(),
        swing_height=float(dv.swing_height),
        duty_factor=float(beta),
        cycle_period=T,
    )


def foot_target(schedule, leg_index, t, nominal_foothold):
    """Body-frame foot target of one leg at time(s) t."""
    offs = schedule.foot_offsets(leg_index, t)
    out = np.asarray(nominal_foothold, dtype=float) + offs
    return out[0] if np.isscalar(t) else out
