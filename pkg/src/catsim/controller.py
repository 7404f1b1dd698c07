"""Geometric tracking controller with cable-force feedforward.

Per vehicle, the translational loop builds a commanded force

    F = -Kp e_p - Kv e_v + m g e3 - F_cable + m a_ref

where F_cable is the modeled inertial cable pull on that vehicle, so the
cable load is cancelled rather than fought by the integrator-free PD
part. The scalar thrust is the projection of F onto the current body z
axis; the desired attitude aligns body z with F while a configured
heading vector fixes the remaining yaw freedom. The attitude loop is the
standard geometric PD on SO(3) with inertia feedforward:

    tau = -kR e_R - kOmega e_Omega + Omega x J Omega
          - J (hat(Omega) R^T Rd Omega_d - R^T Rd dOmega_d)

Desired attitude rates are not available in closed form here, so they
are recovered by first-differencing successive desired attitudes at the
simulation step (zeros are returned until enough history exists).
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigInvalid, DegenerateForce, HeadingDegenerate
from .geom3 import E1, E3, attitude_error, angular_velocity_error, hat


def _check_spd(name, m):
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3) or np.linalg.norm(m - m.T) > 1e-12:
        raise ConfigInvalid(f"{name} must be a symmetric 3x3 matrix")
    if np.linalg.eigvalsh(m).min() <= 0.0:
        raise ConfigInvalid(f"{name} must be positive definite")


@dataclass(frozen=True)
class GainSet:
    """Translational gains per vehicle plus shared attitude gains."""

    kp1: np.ndarray
    kv1: np.ndarray
    kp2: np.ndarray
    kv2: np.ndarray
    k_rot: float = 8.0
    k_omega: float = 6.0

    def validate(self):
        for name in ("kp1", "kv1", "kp2", "kv2"):
            _check_spd(name, getattr(self, name))
        if not (self.k_rot > 0.0 and self.k_omega > 0.0):
            raise ConfigInvalid("attitude gains must be positive")
        return self

    def translational(self, index):
        if index == 1:
            return self.kp1, self.kv1
        if index == 2:
            return self.kp2, self.kv2
        raise ConfigInvalid(f"vehicle index must be 1 or 2, got {index}")


@dataclass(frozen=True)
class ControlInput:
    """Scalar thrust (N) and body torque (N m) for one vehicle."""

    thrust: float
    torque: np.ndarray


@dataclass(frozen=True)
class DesiredAttitude:
    rotation: np.ndarray
    angular_velocity: np.ndarray
    angular_acceleration: np.ndarray


@dataclass(frozen=True)
class AgentTarget:
    """Reference position, velocity, acceleration for one vehicle."""

    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray


@dataclass
class ReferenceTrajectory:
    """First vehicle holds the anchor; the second tracks anchor + relative(t)."""

    anchor: np.ndarray
    relative: Callable[[float], np.ndarray]
    relative_rate: Callable[[float], np.ndarray]
    relative_accel: Callable[[float], np.ndarray]
    heading1: np.ndarray = field(default_factory=lambda: E1.copy())
    heading2: np.ndarray = field(default_factory=lambda: E1.copy())

    @classmethod
    def constant(cls, anchor, offset, heading1=None, heading2=None):
        """Station-keeping at a fixed relative offset (the default mission)."""
        anchor = np.asarray(anchor, dtype=float)
        offset = np.asarray(offset, dtype=float)
        zero = np.zeros(3)
        return cls(
            anchor=anchor,
            relative=lambda t: offset,
            relative_rate=lambda t: zero,
            relative_accel=lambda t: zero,
            heading1=E1.copy() if heading1 is None else np.asarray(heading1, float),
            heading2=E1.copy() if heading2 is None else np.asarray(heading2, float),
        )


def agent_references(ref, t):
    """Targets for both vehicles at time t."""
    zero = np.zeros(3)
    first = AgentTarget(position=ref.anchor.copy(), velocity=zero, acceleration=zero)
    second = AgentTarget(
        position=ref.anchor + ref.relative(t),
        velocity=np.asarray(ref.relative_rate(t), dtype=float),
        acceleration=np.asarray(ref.relative_accel(t), dtype=float),
    )
    return first, second


def force_command(state, target, cable_force, vehicle, world, kp, kv):
    """Commanded inertial force for one vehicle (PD + gravity + feedforward)."""
    e_p = state.position - target.position
    e_v = state.velocity - target.velocity
    return (-kp @ e_p - kv @ e_v
            + vehicle.mass * world.gravity * world.up
            - np.asarray(cable_force, dtype=float)
            + vehicle.mass * target.acceleration)


def thrust(force, attitude):
    """Scalar thrust: projection of the commanded force on the body z axis."""
    return float(np.asarray(force, dtype=float) @ np.asarray(attitude)[:, 2])


def desired_b3(force):
    """Unit thrust direction; rejects vanishing force commands."""
    force = np.asarray(force, dtype=float)
    norm = np.linalg.norm(force)
    if norm <= 1e-6:
        raise DegenerateForce(f"force norm {norm:.3e} too small to orient thrust")
    return force / norm


def desired_attitude(b3_des, heading):
    """Rotation with third column b3_des and first column nearest `heading`.

    Columns: b2 = (b3 x b1_ref)/||.||, b1 = b2 x b3, b3. The result is
    orthonormal by construction with det +1; the third column equals
    b3_des exactly.
    """
    b3 = np.asarray(b3_des, dtype=float)
    b1_ref = np.asarray(heading, dtype=float)
    cross = np.cross(b3, b1_ref)
    norm = np.linalg.norm(cross)
    if norm <= 1e-6:
        raise HeadingDegenerate("heading nearly parallel to thrust direction")
    b2 = cross / norm
    return np.column_stack((np.cross(b2, b3), b2, b3))


def rotation_rate_from_pair(r_prev, r_next, h):
    """Body angular velocity taking r_prev to r_next over one step h.

    Skew-part extraction of R_prev^T R_next, second-order accurate in h
    for smooth rotations (no matrix logarithm needed).
    """
    m = r_prev.T @ r_next
    return 0.5 * np.array([m[2, 1] - m[1, 2],
                           m[0, 2] - m[2, 0],
                           m[1, 0] - m[0, 1]]) / h


class AttitudeRateEstimator:
    """Finite-difference estimator of desired attitude rates.

    Feed one desired rotation per simulation step; returns (Omega_d,
    dOmega_d). Cold start: zeros for the first two samples, after which
    both the rate (from the last rotation pair) and its first difference
    are available.
    """

    def __init__(self, h):
        if not (h > 0.0):
            raise ConfigInvalid("step size must be positive")
        self.h = h
        self._prev_rotation = None
        self._prev_rate = None

    def reset(self):
        self._prev_rotation = None
        self._prev_rate = None

    def update(self, rotation):
        zero = np.zeros(3)
        if self._prev_rotation is None:
            self._prev_rotation = rotation
            return zero, zero
        rate = rotation_rate_from_pair(self._prev_rotation, rotation, self.h)
        if self._prev_rate is None:
            out = (zero, zero)
        else:
            out = (rate, (rate - self._prev_rate) / self.h)
        self._prev_rotation = rotation
        self._prev_rate = rate
        return out


def torque(state, desired, vehicle, k_rot, k_omega):
    """Geometric attitude-loop torque for one vehicle."""
    r = state.attitude
    rd = desired.rotation
    omega = state.angular_velocity
    j = vehicle.inertia
    e_r = attitude_error(r, rd)
    e_om = angular_velocity_error(omega, r, rd, desired.angular_velocity)
    rt_rd = r.T @ rd
    feedforward = j @ (hat(omega) @ rt_rd @ desired.angular_velocity
                       - rt_rd @ desired.angular_acceleration)
    return -k_rot * e_r - k_omega * e_om + np.cross(omega, j @ omega) - feedforward


class GeometricController:
    """Full two-vehicle control step: forces, thrusts, attitudes, torques.

    Owns one rate estimator per vehicle (the only stateful piece), so it
    must be called exactly once per simulation step in time order.
    """

    def __init__(self, gains, reference, vehicle1, vehicle2, world, h):
        self.gains = gains
        self.reference = reference
        self.vehicles = (vehicle1, vehicle2)
        self.world = world
        self.estimators = (AttitudeRateEstimator(h), AttitudeRateEstimator(h))

    def compute(self, sys_state, cable_forces):
        """Control inputs and desired attitudes at the current state.

        cable_forces: pair of modeled inertial cable pulls on the vehicles.
        Returns ((ControlInput, ControlInput), (DesiredAttitude, DesiredAttitude)).
        """
        targets = agent_references(self.reference, sys_state.t)
        states = (sys_state.uav1, sys_state.uav2)
        headings = (self.reference.heading1, self.reference.heading2)
        inputs, desireds = [], []
        for i in range(2):
            kp, kv = self.gains.translational(i + 1)
            force = force_command(states[i], targets[i], cable_forces[i],
                                  self.vehicles[i], self.world, kp, kv)
            rd = desired_attitude(desired_b3(force), headings[i])
            omega_d, domega_d = self.estimators[i].update(rd)
            des = DesiredAttitude(rd, omega_d, domega_d)
            tau = torque(states[i], des, self.vehicles[i],
                         self.gains.k_rot, self.gains.k_omega)
            inputs.append(ControlInput(thrust=thrust(force, states[i].attitude),
                                       torque=tau))
            desireds.append(des)
        return tuple(inputs), tuple(desireds)
