"""Deterministic fixed-step simulation engine, sweeps, and file output.

Configuration is a flat UTF-8 text format, one `key = value` per line,
`#` comments, dotted key names, vectors as comma-separated triples.
Recognized keys (defaults in parentheses):

    mode (reduced)            reduced | full
    h (0.001)                 integrator step, s
    T (20.0)                  horizon, s; must be >= 10 h
    seed (unset)              integer; enables initial-condition jitter
    jitter (0.0)              jitter scale applied with `seed`
    out (out)                 default output directory for the CLI
    gains.kp / gains.kv       relative-error gains; scalar k means k*I,
      (6 / 7)                 a triple means a diagonal matrix
    gains.kp1 gains.kv1       per-vehicle translational gains; default to
    gains.kp2 gains.kv2       gains.kp / gains.kv
    gains.k_rot (8)           attitude error gain
    gains.k_omega (6)         body-rate error gain
    reduced.mass (1.0)        reduced mass m_r
    lyapunov.alpha (0.08)     translational cross weight
    lyapunov.beta1/2 (0.02)   attitude cross weights
    vehicle1.mass (1.0)       vehicle2.mass likewise
    vehicle1.inertia          diagonal triple (0.08,0.08,0.12)
    world.gravity (9.81)
    cable.length (2.0)        cable.unit_weight (0.5)
    disturbance.amplitude (0) disturbance.omega1/2/3 (1.3/0.9/1.7)
    disturbance.mode          relative | per-agent
    reference.anchor (0,0,2)  reference.offset (1.6,0,0)
    reference.heading1/2      desired first body axes (1,0,0)
    init.e_p (0.3,-0.2,0.1)   init.e_v (0,0,0)        reduced-mode ICs
    init.p1_offset init.p2_offset   full-mode position offsets
    init.rotvec1 init.rotvec2       full-mode attitude offsets (rotation
                                    vectors), default (0.06,-0.04,0.05)
    analysis.tail_fraction (0.25)

Runs are bit-deterministic: a fixed config yields byte-identical CSVs.
"""

import dataclasses
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analysis, catenary, plant
from .controller import GainSet, GeometricController, ReferenceTrajectory
from .errors import (
    CatsimError,
    ConfigInvalid,
    DegenerateForce,
    HeadingDegenerate,
    InadmissibleConfiguration,
    IOFailure,
)
from .geom3 import attitude_error, angular_velocity_error, nearest_rotation, rot_from_rotvec

DISTURBANCE_SWEEP_AMPLITUDES = (0.1, 0.2, 0.3, 0.4, 0.5)
GAIN_SWEEP_KVS = (4.0, 6.0, 8.0, 10.0, 12.0)
GAIN_SWEEP_AMPLITUDE = 0.40
# Damping variants for the disturbance sweep: (kv scalar, k_omega).
SWEEP_VARIANTS = {"low": (4.0, 3.5), "high": (10.0, 8.0)}


def _diag3(value):
    return np.diag(np.full(3, float(value)))


@dataclass
class SimConfig:
    """Everything a scenario run needs; see the module docstring for keys."""

    mode: str = "reduced"
    h: float = 1e-3
    duration: float = 20.0
    seed: Optional[int] = None
    jitter: float = 0.0
    out: str = "out"

    reduced_mass: float = 1.0
    kp: np.ndarray = field(default_factory=lambda: _diag3(6.0))
    kv: np.ndarray = field(default_factory=lambda: _diag3(7.0))
    kp1: np.ndarray = field(default_factory=lambda: _diag3(6.0))
    kv1: np.ndarray = field(default_factory=lambda: _diag3(7.0))
    kp2: np.ndarray = field(default_factory=lambda: _diag3(6.0))
    kv2: np.ndarray = field(default_factory=lambda: _diag3(7.0))
    k_rot: float = 8.0
    k_omega: float = 6.0

    alpha: float = 0.08
    beta1: float = 0.02
    beta2: float = 0.02

    mass1: float = 1.0
    mass2: float = 1.0
    inertia1: np.ndarray = field(default_factory=lambda: np.diag([0.08, 0.08, 0.12]))
    inertia2: np.ndarray = field(default_factory=lambda: np.diag([0.08, 0.08, 0.12]))
    gravity: float = 9.81
    cable_length: float = 2.0
    cable_unit_weight: float = 0.5

    amplitude: float = 0.0
    omega1: float = 1.3
    omega2: float = 0.9
    omega3: float = 1.7
    disturbance_mode: str = "relative"

    anchor: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 2.0]))
    offset: np.ndarray = field(default_factory=lambda: np.array([1.6, 0.0, 0.0]))
    heading1: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    heading2: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))

    e_p0: np.ndarray = field(default_factory=lambda: np.array([0.3, -0.2, 0.1]))
    e_v0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    p1_offset: np.ndarray = field(default_factory=lambda: np.array([0.06, -0.04, 0.0]))
    p2_offset: np.ndarray = field(default_factory=lambda: np.array([-0.05, 0.06, 0.0]))
    rotvec1: np.ndarray = field(default_factory=lambda: np.array([0.06, -0.04, 0.05]))
    rotvec2: np.ndarray = field(default_factory=lambda: np.array([0.06, -0.04, 0.05]))

    tail_fraction: float = 0.25

    def validate(self):
        if self.mode not in ("reduced", "full"):
            raise ConfigInvalid(f"mode must be reduced or full, got {self.mode!r}")
        if not (self.h > 0.0):
            raise ConfigInvalid("h must be positive")
        if self.duration < 10.0 * self.h:
            raise ConfigInvalid("T must be at least 10 steps long")
        if not (0.0 < self.tail_fraction <= 1.0):
            raise ConfigInvalid("analysis.tail_fraction must lie in (0, 1]")
        if self.jitter < 0.0:
            raise ConfigInvalid("jitter must be nonnegative")
        if not (self.reduced_mass > 0.0):
            raise ConfigInvalid("reduced.mass must be positive")
        for name in ("kp", "kv"):
            m = getattr(self, name)
            if (np.asarray(m).shape != (3, 3)
                    or np.linalg.norm(m - m.T) > 1e-12
                    or np.linalg.eigvalsh(m).min() <= 0.0):
                raise ConfigInvalid(f"gains.{name} must be symmetric positive definite")
        self.gain_set().validate()
        plant.DisturbanceProfile(self.amplitude, self.omega1, self.omega2,
                                 self.omega3, self.disturbance_mode)
        catenary.CableParams(self.cable_length, self.cable_unit_weight)
        plant.VehicleParams(self.mass1, self.inertia1)
        plant.VehicleParams(self.mass2, self.inertia2)
        plant.WorldParams(self.gravity)
        if self.mode == "full":
            horizontal = math.hypot(self.offset[0], self.offset[1])
            if horizontal >= self.cable_length * (1.0 - 1e-3):
                raise ConfigInvalid("reference.offset leaves the cable no slack")
            if horizontal <= 10.0 * catenary.SEPARATION_TOL:
                raise ConfigInvalid("reference.offset is horizontally degenerate")
            if abs(self.offset[2]) > plant.DYNAMIC_HEIGHT_TOL:
                raise ConfigInvalid("reference.offset must keep endpoint heights equal")
        return self

    def gain_set(self):
        return GainSet(kp1=self.kp1, kv1=self.kv1, kp2=self.kp2, kv2=self.kv2,
                       k_rot=self.k_rot, k_omega=self.k_omega)

    def disturbance_profile(self):
        return plant.DisturbanceProfile(self.amplitude, self.omega1, self.omega2,
                                        self.omega3, self.disturbance_mode)

    def lyapunov_params(self):
        return analysis.LyapunovParams(
            reduced_mass=self.reduced_mass, kp=self.kp, alpha=self.alpha,
            k_rot=self.k_rot, beta1=self.beta1, beta2=self.beta2,
            inertia1=self.inertia1, inertia2=self.inertia2)


def _parse_float(key, value):
    try:
        return float(value)
    except ValueError:
        raise ConfigInvalid(f"{key}: expected a number, got {value!r}") from None


def _parse_int(key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigInvalid(f"{key}: expected an integer, got {value!r}") from None


def _parse_triple(key, value):
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 3:
        raise ConfigInvalid(f"{key}: expected three comma-separated values")
    return np.array([_parse_float(key, p) for p in parts])


def _parse_gain(key, value):
    if "," in value:
        return np.diag(_parse_triple(key, value))
    return _diag3(_parse_float(key, value))


def _parse_inertia(key, value):
    return np.diag(_parse_triple(key, value))


def _parse_str(_key, value):
    return value


# key -> (SimConfig field, converter)
_CONFIG_KEYS = {
    "mode": ("mode", _parse_str),
    "h": ("h", _parse_float),
    "T": ("duration", _parse_float),
    "seed": ("seed", _parse_int),
    "jitter": ("jitter", _parse_float),
    "out": ("out", _parse_str),
    "gains.kp": ("kp", _parse_gain),
    "gains.kv": ("kv", _parse_gain),
    "gains.kp1": ("kp1", _parse_gain),
    "gains.kv1": ("kv1", _parse_gain),
    "gains.kp2": ("kp2", _parse_gain),
    "gains.kv2": ("kv2", _parse_gain),
    "gains.k_rot": ("k_rot", _parse_float),
    "gains.k_omega": ("k_omega", _parse_float),
    "reduced.mass": ("reduced_mass", _parse_float),
    "lyapunov.alpha": ("alpha", _parse_float),
    "lyapunov.beta1": ("beta1", _parse_float),
    "lyapunov.beta2": ("beta2", _parse_float),
    "vehicle1.mass": ("mass1", _parse_float),
    "vehicle2.mass": ("mass2", _parse_float),
    "vehicle1.inertia": ("inertia1", _parse_inertia),
    "vehicle2.inertia": ("inertia2", _parse_inertia),
    "world.gravity": ("gravity", _parse_float),
    "cable.length": ("cable_length", _parse_float),
    "cable.unit_weight": ("cable_unit_weight", _parse_float),
    "disturbance.amplitude": ("amplitude", _parse_float),
    "disturbance.omega1": ("omega1", _parse_float),
    "disturbance.omega2": ("omega2", _parse_float),
    "disturbance.omega3": ("omega3", _parse_float),
    "disturbance.mode": ("disturbance_mode", _parse_str),
    "reference.anchor": ("anchor", _parse_triple),
    "reference.offset": ("offset", _parse_triple),
    "reference.heading1": ("heading1", _parse_triple),
    "reference.heading2": ("heading2", _parse_triple),
    "init.e_p": ("e_p0", _parse_triple),
    "init.e_v": ("e_v0", _parse_triple),
    "init.p1_offset": ("p1_offset", _parse_triple),
    "init.p2_offset": ("p2_offset", _parse_triple),
    "init.rotvec1": ("rotvec1", _parse_triple),
    "init.rotvec2": ("rotvec2", _parse_triple),
    "analysis.tail_fraction": ("tail_fraction", _parse_float),
}


def parse_config_text(text):
    """Flat `key = value` lines to a raw string mapping; strict on format."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        cut = line.find("#")
        if cut >= 0:
            line = line[:cut]
        line = line.strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigInvalid(f"line {lineno}: expected 'key = value'")
        if key in raw:
            raise ConfigInvalid(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def config_from_mapping(raw):
    """Build and validate a SimConfig from raw key -> string values."""
    cfg = SimConfig()
    for key, value in raw.items():
        if key not in _CONFIG_KEYS:
            raise ConfigInvalid(f"unknown config key {key!r}")
        name, convert = _CONFIG_KEYS[key]
        setattr(cfg, name, convert(key, value))
    # Shared translational gains flow into per-vehicle ones unless set.
    for shared, specific in (("gains.kp", ("kp1", "kp2")), ("gains.kv", ("kv1", "kv2"))):
        if shared in raw:
            for name in specific:
                if f"gains.{name}" not in raw:
                    setattr(cfg, name, getattr(cfg, shared.split(".")[1]).copy())
    return cfg.validate()


def load_config(path, overrides=None):
    """Read a config file, apply raw-string overrides, validate."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    raw = parse_config_text(text)
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_mapping(raw)


@dataclass
class SimTrace:
    """Sampled scenario output; full mode fills the per-vehicle blocks."""

    mode: str
    h: float
    t: np.ndarray
    e_p: np.ndarray
    e_v: np.ndarray
    norm_e: np.ndarray
    V: np.ndarray
    Vdot_fd: np.ndarray
    disturbance: np.ndarray
    aborted: bool = False
    abort_reason: Optional[str] = None
    events: list = field(default_factory=list)

    pos1: Optional[np.ndarray] = None
    vel1: Optional[np.ndarray] = None
    rot1: Optional[np.ndarray] = None
    omega1: Optional[np.ndarray] = None
    thrust1: Optional[np.ndarray] = None
    torque1: Optional[np.ndarray] = None
    pos2: Optional[np.ndarray] = None
    vel2: Optional[np.ndarray] = None
    rot2: Optional[np.ndarray] = None
    omega2: Optional[np.ndarray] = None
    thrust2: Optional[np.ndarray] = None
    torque2: Optional[np.ndarray] = None
    e_rot1: Optional[np.ndarray] = None
    e_omega1: Optional[np.ndarray] = None
    e_rot2: Optional[np.ndarray] = None
    e_omega2: Optional[np.ndarray] = None
    rot_gap1: Optional[np.ndarray] = None
    rot_gap2: Optional[np.ndarray] = None
    height_skew: Optional[np.ndarray] = None
    separation: Optional[np.ndarray] = None
    max_rotation_drift: float = 0.0

    def series(self):
        return analysis.TraceSeries(
            t=self.t, V=self.V, norm_e=self.norm_e,
            delta_norm=np.linalg.norm(self.disturbance, axis=1))


def rk4_step(f, t, y, h):
    """One classical Runge-Kutta step of y' = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _jittered_initials(cfg):
    """IC vectors with optional seeded jitter; draw order is fixed."""
    vectors = [cfg.e_p0, cfg.e_v0, cfg.p1_offset, cfg.p2_offset,
               cfg.rotvec1, cfg.rotvec2]
    vectors = [np.asarray(v, dtype=float).copy() for v in vectors]
    if cfg.seed is not None and cfg.jitter > 0.0:
        rng = np.random.default_rng(cfg.seed)
        noise = rng.standard_normal((6, 3))
        vectors = [v + cfg.jitter * n for v, n in zip(vectors, noise)]
    return vectors


def _delta_fn(cfg, profile):
    if cfg.disturbance_mode == "per-agent":
        def delta_at(t):
            d1, d2 = plant.per_agent_disturbances(t, profile, cfg.mass1, cfg.mass2)
            return plant.effective_disturbance(d1, d2, cfg.mass1, cfg.mass2)
        return delta_at
    return lambda t: plant.disturbance_signal(t, profile)


def _run_reduced(cfg):
    n = int(round(cfg.duration / cfg.h))
    h = cfg.h
    times = np.arange(n + 1) * h
    profile = cfg.disturbance_profile()
    delta_at = _delta_fn(cfg, profile)
    kp, kv, m_r = cfg.kp, cfg.kv, cfg.reduced_mass
    e_p0, e_v0 = _jittered_initials(cfg)[:2]

    def deriv(t, y):
        err = plant.ReducedErrorState(y[:3], y[3:], m_r)
        de_p, de_v = plant.reduced_error_derivatives(err, kp, kv, delta_at(t))
        return np.concatenate((de_p, de_v))

    ep = np.empty((n + 1, 3))
    ev = np.empty((n + 1, 3))
    ep[0], ev[0] = e_p0, e_v0
    y = np.concatenate((e_p0, e_v0))
    aborted, reason, last = False, None, n
    for k in range(n):
        y = rk4_step(deriv, times[k], y, h)
        if not np.isfinite(y).all():
            aborted, reason, last = True, f"non-finite state at t={times[k + 1]:.6g}", k
            break
        ep[k + 1], ev[k + 1] = y[:3], y[3:]

    times, ep, ev = times[:last + 1], ep[:last + 1], ev[:last + 1]
    dd = np.array([delta_at(t) for t in times])
    value = (0.5 * m_r * np.einsum("ij,ij->i", ev, ev)
             + 0.5 * np.einsum("ij,jk,ik->i", ep, kp, ep)
             + cfg.alpha * np.einsum("ij,ij->i", ep, ev))
    norm_e = np.sqrt(np.einsum("ij,ij->i", ep, ep) + np.einsum("ij,ij->i", ev, ev))
    trace = SimTrace(
        mode="reduced", h=h, t=times, e_p=ep, e_v=ev, norm_e=norm_e,
        V=value, Vdot_fd=analysis.central_difference(times, value),
        disturbance=dd, aborted=aborted, abort_reason=reason)
    if aborted:
        trace.events.append(f"abort: {reason}")
    return trace


def _pack_states(s1, s2):
    return np.concatenate((
        s1.position, s1.velocity, s1.attitude.ravel(), s1.angular_velocity,
        s2.position, s2.velocity, s2.attitude.ravel(), s2.angular_velocity))


def _unpack_states(y):
    s1 = plant.RigidBodyState(
        attitude=y[6:15].reshape(3, 3), position=y[0:3],
        velocity=y[3:6], angular_velocity=y[15:18])
    s2 = plant.RigidBodyState(
        attitude=y[24:33].reshape(3, 3), position=y[18:21],
        velocity=y[21:24], angular_velocity=y[33:36])
    return s1, s2


def _pack_derivs(d1, d2):
    return np.concatenate((
        d1.velocity, d1.acceleration, d1.attitude_rate.ravel(),
        d1.angular_acceleration,
        d2.velocity, d2.acceleration, d2.attitude_rate.ravel(),
        d2.angular_acceleration))


def _run_full(cfg):
    n = int(round(cfg.duration / cfg.h))
    h = cfg.h
    times = np.arange(n + 1) * h
    profile = cfg.disturbance_profile()
    cable = catenary.CableParams(cfg.cable_length, cfg.cable_unit_weight)
    veh1 = plant.VehicleParams(cfg.mass1, cfg.inertia1)
    veh2 = plant.VehicleParams(cfg.mass2, cfg.inertia2)
    world = plant.WorldParams(cfg.gravity)
    reference = ReferenceTrajectory.constant(cfg.anchor, cfg.offset,
                                             cfg.heading1, cfg.heading2)
    controller = GeometricController(cfg.gain_set(), reference, veh1, veh2, world, h)

    _, _, p1_off, p2_off, rv1, rv2 = _jittered_initials(cfg)
    state1 = plant.RigidBodyState(attitude=rot_from_rotvec(rv1),
                                  position=cfg.anchor + p1_off,
                                  velocity=np.zeros(3), angular_velocity=np.zeros(3))
    state2 = plant.RigidBodyState(attitude=rot_from_rotvec(rv2),
                                  position=cfg.anchor + cfg.offset + p2_off,
                                  velocity=np.zeros(3), angular_velocity=np.zeros(3))
    y = _pack_states(state1, state2)

    m = n + 1
    pos = (np.empty((m, 3)), np.empty((m, 3)))
    vel = (np.empty((m, 3)), np.empty((m, 3)))
    rot = (np.empty((m, 3, 3)), np.empty((m, 3, 3)))
    omg = (np.empty((m, 3)), np.empty((m, 3)))
    thr = (np.empty(m), np.empty(m))
    trq = (np.empty((m, 3)), np.empty((m, 3)))
    e_rot = (np.empty((m, 3)), np.empty((m, 3)))
    e_omg = (np.empty((m, 3)), np.empty((m, 3)))
    gap = (np.empty(m), np.empty(m))
    height_skew = np.empty(m)
    separation = np.empty(m)

    events = []
    in_height_violation = False
    max_drift = 0.0
    eye = np.eye(3)

    def control_at(t, y):
        s1, s2 = _unpack_states(y)
        sys_state = plant.SystemState(s1, s2, t)
        shape, _ = catenary.catenary_of_positions(
            s1.position, s2.position, cable, tol_height=math.inf)
        forces = catenary.endpoint_forces_inertial(shape, cable)
        inputs, desireds = controller.compute(sys_state, forces)
        return sys_state, inputs, desireds

    def log_sample(k, t, sys_state, inputs, desireds):
        nonlocal in_height_violation, max_drift
        states = (sys_state.uav1, sys_state.uav2)
        for i in (0, 1):
            s, inp, des = states[i], inputs[i], desireds[i]
            pos[i][k], vel[i][k] = s.position, s.velocity
            rot[i][k], omg[i][k] = s.attitude, s.angular_velocity
            thr[i][k], trq[i][k] = inp.thrust, inp.torque
            e_rot[i][k] = attitude_error(s.attitude, des.rotation)
            e_omg[i][k] = angular_velocity_error(
                s.angular_velocity, s.attitude, des.rotation, des.angular_velocity)
            gap[i][k] = 3.0 - np.sum(des.rotation * s.attitude)
            max_drift = max(max_drift, np.linalg.norm(
                s.attitude.T @ s.attitude - eye))
        skew = abs(states[0].position[2] - states[1].position[2])
        height_skew[k] = skew
        separation[k] = np.linalg.norm(states[0].position - states[1].position)
        if skew > plant.DYNAMIC_HEIGHT_TOL and not in_height_violation:
            events.append(f"t={t:.6g}: height skew {skew:.3e} above "
                          f"{plant.DYNAMIC_HEIGHT_TOL:g}")
            in_height_violation = True
        elif skew <= plant.DYNAMIC_HEIGHT_TOL:
            in_height_violation = False

    aborted, reason, last = False, None, -1
    try:
        sys_state, inputs, desireds = control_at(0.0, y)
        log_sample(0, 0.0, sys_state, inputs, desireds)
        last = 0
        for k in range(n):
            raw_inputs = tuple((inp.thrust, inp.torque) for inp in inputs)

            def deriv(t, yy):
                s1, s2 = _unpack_states(yy)
                d1, d2 = plant.coupled_derivatives(
                    plant.SystemState(s1, s2, t), raw_inputs, cable,
                    veh1, veh2, world, profile)
                return _pack_derivs(d1, d2)

            y = rk4_step(deriv, times[k], y, h)
            if not np.isfinite(y).all():
                raise InadmissibleConfiguration(
                    f"non-finite state at t={times[k + 1]:.6g}")
            y[6:15] = nearest_rotation(y[6:15].reshape(3, 3)).ravel()
            y[24:33] = nearest_rotation(y[24:33].reshape(3, 3)).ravel()
            sys_state, inputs, desireds = control_at(times[k + 1], y)
            log_sample(k + 1, times[k + 1], sys_state, inputs, desireds)
            last = k + 1
    except (InadmissibleConfiguration, DegenerateForce, HeadingDegenerate) as exc:
        aborted = True
        reason = f"{type(exc).__name__}: {exc}"
        events.append(f"abort: {reason}")

    m = last + 1
    times = times[:m]
    rel = np.array([reference.relative(t) for t in times]).reshape(m, 3)
    rel_rate = np.array([reference.relative_rate(t) for t in times]).reshape(m, 3)
    ep = (pos[1][:m] - pos[0][:m]) - rel
    ev = (vel[1][:m] - vel[0][:m]) - rel_rate
    dd = np.array([plant.disturbance_signal(t, profile) for t in times]).reshape(m, 3)

    params = cfg.lyapunov_params()
    value = (0.5 * params.reduced_mass * np.einsum("ij,ij->i", ev, ev)
             + 0.5 * np.einsum("ij,jk,ik->i", ep, params.kp, ep)
             + params.alpha * np.einsum("ij,ij->i", ep, ev))
    for i, (inertia, beta) in enumerate(((cfg.inertia1, cfg.beta1),
                                         (cfg.inertia2, cfg.beta2))):
        eo, er, gp = e_omg[i][:m], e_rot[i][:m], gap[i][:m]
        value += (0.5 * np.einsum("ij,jk,ik->i", eo, inertia, eo)
                  + 0.5 * params.k_rot * gp
                  + beta * np.einsum("ij,jk,ik->i", er, inertia, eo))
    norm_e = np.sqrt(
        np.einsum("ij,ij->i", ep, ep) + np.einsum("ij,ij->i", ev, ev)
        + sum(np.einsum("ij,ij->i", e_rot[i][:m], e_rot[i][:m])
              + np.einsum("ij,ij->i", e_omg[i][:m], e_omg[i][:m]) for i in (0, 1)))

    vdot = (analysis.central_difference(times, value) if m >= 2
            else np.zeros(m))
    return SimTrace(
        mode="full", h=h, t=times, e_p=ep, e_v=ev, norm_e=norm_e, V=value,
        Vdot_fd=vdot, disturbance=dd, aborted=aborted, abort_reason=reason,
        events=events,
        pos1=pos[0][:m], vel1=vel[0][:m], rot1=rot[0][:m], omega1=omg[0][:m],
        thrust1=thr[0][:m], torque1=trq[0][:m],
        pos2=pos[1][:m], vel2=vel[1][:m], rot2=rot[1][:m], omega2=omg[1][:m],
        thrust2=thr[1][:m], torque2=trq[1][:m],
        e_rot1=e_rot[0][:m], e_omega1=e_omg[0][:m],
        e_rot2=e_rot[1][:m], e_omega2=e_omg[1][:m],
        rot_gap1=gap[0][:m], rot_gap2=gap[1][:m],
        height_skew=height_skew[:m], separation=separation[:m],
        max_rotation_drift=max_drift)


def run_scenario(cfg):
    """Integrate one scenario. Aborts are recorded on the trace, not raised."""
    cfg.validate()
    if cfg.mode == "reduced":
        return _run_reduced(cfg)
    return _run_full(cfg)


@dataclass
class SweepPoint:
    param: float
    tail_metric: float
    lambda_hat: float
    status: str


@dataclass
class SweepResult:
    name: str
    parameter: str
    points: list
    nominal_trace: Optional[SimTrace] = None
    traces: list = field(default_factory=list)
    # gain sweeps keep one nominal companion per swept value
    nominal_traces: list = field(default_factory=list)


def _with_kv(cfg, kv_scalar, k_omega=None):
    kv = _diag3(kv_scalar)
    changes = dict(kv=kv, kv1=kv.copy(), kv2=kv.copy())
    if k_omega is not None:
        changes["k_omega"] = k_omega
    return dataclasses.replace(cfg, **changes)


def _nominal_lambda(cfg):
    nominal = run_scenario(dataclasses.replace(cfg, amplitude=0.0))
    try:
        lam = analysis.decay_rate_fit(nominal.series()).rate
    except CatsimError:
        lam = math.nan
    return nominal, lam


def sweep_disturbance(cfg, amplitudes=DISTURBANCE_SWEEP_AMPLITUDES,
                      variants=None):
    """Tail metric vs disturbance amplitude for each damping variant.

    Returns {variant name: SweepResult}. A failing point is recorded with
    a status note instead of aborting the sweep.
    """
    if variants is None:
        variants = SWEEP_VARIANTS
    results = {}
    for name, (kv_scalar, k_omega) in variants.items():
        cfg_v = _with_kv(cfg, kv_scalar, k_omega)
        nominal, lam = _nominal_lambda(cfg_v)
        points, traces = [], []
        for amp in amplitudes:
            try:
                trace = run_scenario(dataclasses.replace(cfg_v, amplitude=float(amp)))
                if trace.aborted:
                    raise InadmissibleConfiguration(trace.abort_reason or "aborted")
                tail = analysis.tail_metric(trace.t, trace.norm_e, cfg.tail_fraction)
                points.append(SweepPoint(float(amp), tail, lam, "ok"))
                traces.append(trace)
            except CatsimError as exc:
                points.append(SweepPoint(float(amp), math.nan, lam,
                                         f"failed: {exc}"))
                traces.append(None)
        results[name] = SweepResult(name=name, parameter="amplitude",
                                    points=points, nominal_trace=nominal,
                                    traces=traces)
    return results


def sweep_gain(cfg, kvs=GAIN_SWEEP_KVS, amplitude=GAIN_SWEEP_AMPLITUDE):
    """Tail metric vs velocity gain at a fixed disturbance amplitude."""
    points, traces = [], []
    nominal_traces = []
    for kv_scalar in kvs:
        cfg_kv = _with_kv(cfg, float(kv_scalar))
        nominal, lam = _nominal_lambda(cfg_kv)
        nominal_traces.append(nominal)
        try:
            trace = run_scenario(dataclasses.replace(cfg_kv, amplitude=float(amplitude)))
            if trace.aborted:
                raise InadmissibleConfiguration(trace.abort_reason or "aborted")
            tail = analysis.tail_metric(trace.t, trace.norm_e, cfg.tail_fraction)
            points.append(SweepPoint(float(kv_scalar), tail, lam, "ok"))
            traces.append(trace)
        except CatsimError as exc:
            points.append(SweepPoint(float(kv_scalar), math.nan, lam,
                                     f"failed: {exc}"))
            traces.append(None)
    return SweepResult(name="gain", parameter="kv", points=points,
                       traces=traces, nominal_traces=nominal_traces)


def _fmt(x):
    return f"{x:.11e}"


_REDUCED_HEADER = ("t,ep_x,ep_y,ep_z,ev_x,ev_y,ev_z,norm_e,V,Vdot_fd,"
                   "dd_x,dd_y,dd_z")


def _full_block_header(suffix):
    names = [f"p_{ax}_{suffix}" for ax in "xyz"]
    names += [f"v_{ax}_{suffix}" for ax in "xyz"]
    names += [f"r{i}{j}_{suffix}" for i in range(3) for j in range(3)]
    names += [f"om_{ax}_{suffix}" for ax in "xyz"]
    names += [f"f_{suffix}"]
    names += [f"tau_{ax}_{suffix}" for ax in "xyz"]
    return ",".join(names)


def _trace_matrix(trace):
    cols = [trace.t, trace.e_p[:, 0], trace.e_p[:, 1], trace.e_p[:, 2],
            trace.e_v[:, 0], trace.e_v[:, 1], trace.e_v[:, 2],
            trace.norm_e, trace.V, trace.Vdot_fd,
            trace.disturbance[:, 0], trace.disturbance[:, 1],
            trace.disturbance[:, 2]]
    if trace.mode == "full":
        for pos, vel, rot, omg, thr, trq in (
                (trace.pos1, trace.vel1, trace.rot1, trace.omega1,
                 trace.thrust1, trace.torque1),
                (trace.pos2, trace.vel2, trace.rot2, trace.omega2,
                 trace.thrust2, trace.torque2)):
            cols.extend([pos[:, 0], pos[:, 1], pos[:, 2],
                         vel[:, 0], vel[:, 1], vel[:, 2]])
            cols.extend([rot[:, i, j] for i in range(3) for j in range(3)])
            cols.extend([omg[:, 0], omg[:, 1], omg[:, 2], thr,
                         trq[:, 0], trq[:, 1], trq[:, 2]])
    return cols


def _write_lines(path, lines):
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc
    return path


def emit_csv(obj, path):
    """Write a trace or sweep result as CSV (12 significant digits)."""
    if isinstance(obj, SimTrace):
        header = _REDUCED_HEADER
        if obj.mode == "full":
            header = ",".join([_REDUCED_HEADER, _full_block_header("1"),
                               _full_block_header("2")])
        cols = _trace_matrix(obj)
        lines = [header]
        for k in range(obj.t.size):
            lines.append(",".join(_fmt(col[k]) for col in cols))
        return _write_lines(path, lines)
    if isinstance(obj, SweepResult):
        lines = ["param,tail_metric,lambda_hat,status"]
        for pt in obj.points:
            status = pt.status.replace(",", ";")
            lines.append(f"{_fmt(pt.param)},{_fmt(pt.tail_metric)},"
                         f"{_fmt(pt.lambda_hat)},{status}")
        return _write_lines(path, lines)
    raise ConfigInvalid(f"cannot emit object of type {type(obj).__name__}")


def emit_lyapunov_csv(trace, path):
    """Per-sample monitor CSV: t, V, Vdot_fd, norm_e, norm_Delta."""
    delta_norm = np.linalg.norm(trace.disturbance, axis=1)
    lines = ["t,V,Vdot_fd,norm_e,norm_Delta"]
    for k in range(trace.t.size):
        lines.append(",".join(_fmt(v) for v in (
            trace.t[k], trace.V[k], trace.Vdot_fd[k], trace.norm_e[k],
            delta_norm[k])))
    return _write_lines(path, lines)


def trace_report(trace, cfg):
    """Key/value summary of one run for the CLI report."""
    entries = {
        "mode": trace.mode,
        "samples": trace.t.size,
        "h": cfg.h,
        "aborted": str(trace.aborted).lower(),
    }
    if trace.abort_reason:
        entries["abort_reason"] = trace.abort_reason
    if trace.t.size == 0:
        return entries
    entries["V_initial"] = float(trace.V[0])
    entries["V_final"] = float(trace.V[-1])
    entries["norm_e_final"] = float(trace.norm_e[-1])
    if trace.t.size >= 2:
        entries["tail_metric"] = analysis.tail_metric(
            trace.t, trace.norm_e, cfg.tail_fraction)
    if cfg.amplitude == 0.0 and not trace.aborted:
        try:
            fit = analysis.decay_rate_fit(trace.series())
            entries["lambda_hat"] = fit.rate
            entries["fit_r_squared"] = fit.r_squared
        except CatsimError as exc:
            entries["lambda_hat"] = f"unavailable ({type(exc).__name__})"
        try:
            check = analysis.dissipation_check(trace.series())
            entries["vdot_violation_fraction"] = check.violation_fraction
        except CatsimError:
            pass
    if trace.mode == "full":
        entries["max_rotation_drift"] = trace.max_rotation_drift
        entries["max_height_skew"] = float(trace.height_skew.max())
        entries["events"] = len(trace.events)
    return entries
