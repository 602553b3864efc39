"""
Simulating a single trot gait
=============================

Builds a quadruped, schedules a trot, runs the quasi-static locomotion
model on flat ground, and prints what came out.
"""

import numpy as np

from modgait import DecisionVector, SimulationConfig, Terrain, build_schedule, load_morphology, simulate

# A quadruped from the bundled preset: four identical 2-link legs.
robot = load_morphology("quad")
print("robot: %d legs, %.2f kg total" % (robot.leg_count, robot.total_mass))

# One gait candidate: equal 15 cm strides, 10 cm/s swing speed, 20 cm
# swing clearance, 60% of the cycle spent in stance.
dv = DecisionVector(
    strides=np.full(4, 0.15),
    swing_speeds=np.full(4, 0.10),
    swing_height=0.20,
    duty_factor=0.60,
)
schedule = build_schedule("trot", 4, dv)
print("cycle period: %.3f s" % schedule.cycle_period)

trace = simulate(robot, schedule, Terrain(kind="flat"),
                 SimulationConfig(control_rate_hz=60.0, cycles=4))

print("failure:", trace.failure)
print("forward travel over the measured window: %.4f m" % trace.delta_x)
print("lateral drift: %.2e m" % trace.delta_y)
print("worst stability margin: %.4f m" % trace.margins.min())
print("peak joint torque: %.2f N*m (limit %.0f)" % (
    np.abs(trace.joint_torques).max(), robot.torque_limit))

# The same candidate on a 10-degree slope travels less per cycle.
uphill = simulate(robot, schedule, Terrain(kind="slope", slope_deg=10.0),
                  SimulationConfig(control_rate_hz=60.0, cycles=4))
print("uphill travel: %.4f m (flat was %.4f m)" % (uphill.delta_x, trace.delta_x))
