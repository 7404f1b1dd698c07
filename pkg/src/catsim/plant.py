"""Vehicle dynamics for the two-quadrotor cable carrier.

Each vehicle is a rigid body with scalar thrust along its body z axis
and full torque authority. The cable enters only through the quasi-static
endpoint forces computed by the catenary module, re-evaluated at every
derivative call. A reduced model for the relative position error is
provided alongside the full plant; disturbances can be specified either
directly on the relative error equation or as per-agent forces whose
weighted combination reproduces the relative one.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import catenary
from .errors import ConfigInvalid
from .geom3 import E3, hat

# Dynamic runs tolerate this much endpoint height skew before the monitor
# flags the sample (the static admissibility check is far stricter).
DYNAMIC_HEIGHT_TOL = 1e-3


@dataclass(frozen=True)
class VehicleParams:
    """Mass (kg) and body inertia matrix (kg m^2) of one vehicle."""

    mass: float
    inertia: np.ndarray

    def __post_init__(self):
        if not (self.mass > 0.0):
            raise ConfigInvalid("vehicle mass must be positive")
        j = np.asarray(self.inertia, dtype=float)
        if j.shape != (3, 3) or np.linalg.norm(j - j.T) > 1e-12:
            raise ConfigInvalid("inertia must be a symmetric 3x3 matrix")
        if np.linalg.eigvalsh(j).min() <= 0.0:
            raise ConfigInvalid("inertia must be positive definite")


@dataclass(frozen=True)
class WorldParams:
    """Gravity magnitude (m/s^2); up is the inertial e3 axis."""

    gravity: float = 9.81
    up: np.ndarray = field(default_factory=lambda: E3.copy())

    def __post_init__(self):
        if not (self.gravity > 0.0):
            raise ConfigInvalid("gravity must be positive")


@dataclass
class RigidBodyState:
    """Pose and twist of one vehicle: R (body->inertial), p, v, body rates."""

    attitude: np.ndarray
    position: np.ndarray
    velocity: np.ndarray
    angular_velocity: np.ndarray


@dataclass
class RigidBodyDerivatives:
    """Time derivative of RigidBodyState under the current forces."""

    velocity: np.ndarray
    acceleration: np.ndarray
    attitude_rate: np.ndarray
    angular_acceleration: np.ndarray


@dataclass
class SystemState:
    """Both vehicles plus simulation time."""

    uav1: RigidBodyState
    uav2: RigidBodyState
    t: float = 0.0


@dataclass(frozen=True)
class DisturbanceProfile:
    """Sinusoidal disturbance on the relative error dynamics.

    The signal is amplitude * (sin(omega1 t), 0.5 cos(omega2 t),
    0.3 sin(omega3 t)), so its norm never exceeds amplitude * sqrt(1.34).
    mode "relative" injects it directly into the reduced equation; mode
    "per-agent" realizes it through opposing forces on the two vehicles.
    """

    amplitude: float = 0.0
    omega1: float = 1.3
    omega2: float = 0.9
    omega3: float = 1.7
    mode: str = "relative"

    def __post_init__(self):
        if self.amplitude < 0.0:
            raise ConfigInvalid("disturbance amplitude must be nonnegative")
        if self.mode not in ("relative", "per-agent"):
            raise ConfigInvalid(f"unknown disturbance mode {self.mode!r}")


@dataclass
class ReducedErrorState:
    """Relative position/velocity error with the reduced mass m_r > 0."""

    e_p: np.ndarray
    e_v: np.ndarray
    reduced_mass: float = 1.0

    def __post_init__(self):
        if not (self.reduced_mass > 0.0):
            raise ConfigInvalid("reduced mass must be positive")


def disturbance_signal(t, profile):
    """Relative disturbance vector at time t."""
    a = profile.amplitude
    return np.array([
        a * math.sin(profile.omega1 * t),
        0.5 * a * math.cos(profile.omega2 * t),
        0.3 * a * math.sin(profile.omega3 * t),
    ])


def per_agent_disturbances(t, profile, m1, m2):
    """Opposing per-agent forces (d1, d2) that realize the relative signal.

    d2 = +delta*(m1+m2)/(2 m2) and d1 = -delta*(m1+m2)/(2 m1), chosen so
    effective_disturbance(d1, d2, m1, m2) returns exactly delta(t).
    """
    delta = disturbance_signal(t, profile)
    total = m1 + m2
    return -0.5 * total / m1 * delta, 0.5 * total / m2 * delta


def effective_disturbance(d1, d2, m1, m2):
    """Relative-error disturbance (m2 d2 - m1 d1)/(m1 + m2)."""
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    return (m2 * d2 - m1 * d1) / (m1 + m2)


def uav_derivatives(state, thrust, torque, cable_force, disturbance, vehicle, world):
    """Rigid-body derivatives of one vehicle.

    p' = v
    m v' = thrust * R e3 - m g e3 + cable_force + disturbance
    R' = R hat(Omega)
    J Omega' = torque - Omega x J Omega
    """
    r = state.attitude
    omega = state.angular_velocity
    j = vehicle.inertia
    force = thrust * r[:, 2] - vehicle.mass * world.gravity * world.up
    force = force + cable_force + disturbance
    return RigidBodyDerivatives(
        velocity=state.velocity.copy(),
        acceleration=force / vehicle.mass,
        attitude_rate=r @ hat(omega),
        angular_acceleration=np.linalg.solve(j, np.asarray(torque, dtype=float)
                                             - np.cross(omega, j @ omega)),
    )


def coupled_derivatives(sys_state, inputs, cable, vehicle1, vehicle2, world,
                        profile=None):
    """Derivatives of both vehicles under the shared hanging cable.

    `inputs` is a pair of (thrust, torque) tuples. The catenary is solved
    fresh from the current endpoint positions on every call (quasi-static
    cable, no caching across integrator stages). Endpoint height skew is
    the monitor's business, not an abort condition here, so only taut or
    degenerate separations raise InadmissibleConfiguration subclasses.
    """
    shape, _ = catenary.catenary_of_positions(
        sys_state.uav1.position, sys_state.uav2.position, cable,
        tol_height=math.inf)
    force1, force2 = catenary.endpoint_forces_inertial(shape, cable)
    if profile is not None and profile.amplitude > 0.0:
        d1, d2 = per_agent_disturbances(sys_state.t, profile,
                                        vehicle1.mass, vehicle2.mass)
    else:
        d1 = d2 = np.zeros(3)
    (thrust1, torque1), (thrust2, torque2) = inputs
    return (
        uav_derivatives(sys_state.uav1, thrust1, torque1, force1, d1, vehicle1, world),
        uav_derivatives(sys_state.uav2, thrust2, torque2, force2, d2, vehicle2, world),
    )


def reduced_error_derivatives(err, kp, kv, delta):
    """Reduced relative-error dynamics: returns (e_p', e_v').

    e_p' = e_v,  m_r e_v' = -Kp e_p - Kv e_v + delta.
    """
    de_v = (np.asarray(delta, dtype=float) - kp @ err.e_p - kv @ err.e_v)
    return err.e_v.copy(), de_v / err.reduced_mass
