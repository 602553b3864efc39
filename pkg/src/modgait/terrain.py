"""Height-field environments: flat ground, an inclined slope, a single step."""

from dataclasses import dataclass

import numpy as np

KINDS = ("flat", "slope", "step")


@dataclass(frozen=True)
class Terrain:
    kind: str = "flat"
    slope_deg: float = 10.0
    step_height_m: float = 0.10
    step_edge_x_m: float = 0.5
    friction: float = 0.6

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown terrain kind {self.kind!r}")
        if not 0.0 <= self.slope_deg <= 30.0:
            raise ValueError("slope angle must be in [0, 30] degrees")
        if self.step_height_m < 0.0:
            raise ValueError("step height must be nonnegative")
        if self.friction <= 0.0:
            raise ValueError("friction coefficient must be positive")

    def height_at(self, x, y):
        """Terrain height under world (x, y); vectorized."""
        x = np.asarray(x, dtype=float)
        if self.kind == "flat":
            return np.zeros_like(x)
        if self.kind == "slope":
            return np.where(x >= 0.0, x * np.tan(np.radians(self.slope_deg)), 0.0)
        return np.where(x >= self.step_edge_x_m, self.step_height_m, 0.0)

    def surface_normal(self, x, y):
        """Unit outward normal of the local surface; vectorized over (x, y).

        The step's vertical face is not a support surface: feet landing past
        the edge rest on the upper level, so its normal is used there.
        """
        x = np.asarray(x, dtype=float)
        n = np.zeros(np.shape(x) + (3,))
        if self.kind == "slope":
            th = np.radians(self.slope_deg)
            on_slope = x >= 0.0
            n[..., 0] = np.where(on_slope, -np.sin(th), 0.0)
            n[..., 2] = np.where(on_slope, np.cos(th), 1.0)
        else:
            n[..., 2] = 1.0
        return n


def flat(friction=0.6):
    return Terrain(kind="flat", friction=friction)


def slope(angle_deg=10.0, friction=0.6):
    return Terrain(kind="slope", slope_deg=angle_deg, friction=friction)


def step(height_m=0.10, edge_x_m=0.5, friction=0.6):
    return Terrain(kind="step", step_height_m=height_m, step_edge_x_m=edge_x_m, friction=friction)
