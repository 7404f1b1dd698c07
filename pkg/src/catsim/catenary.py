"""Quasi-static catenary between two equal-height suspension points.

Given the endpoint positions and a cable of fixed length and weight per
unit length, this module recovers the hanging shape, the internal
tension along the cable, and the forces the cable applies to whatever
holds its endpoints. The taut limit is excluded: the model needs slack.

Conventions
-----------
The cable hangs in a vertical plane. Its local frame has basis columns
[d x e3, d, e3] where d is the horizontal unit vector from the first
endpoint toward the second: the curve parameter r runs along the second
basis axis from -s (first endpoint) to +s (second endpoint), and local
z is inertial up. The yaw angle atan2(dy, dx) and rot_z(yaw) are kept on
the shape for reporting, but mapping local components to inertial goes
through the basis above (rot_z(yaw) maps e1, not e2, onto d).

`tension_distribution(r)` is the force transmitted across the section at
r by the increasing-r side onto the decreasing-r side. At r = -s that is
exactly the pull on the first endpoint; at r = +s the pull on the second
endpoint is its negation.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigInvalid,
    DegenerateSeparation,
    InadmissibleConfiguration,
    NoConvergence,
    ParamOutOfRange,
    TautCable,
)
from .geom3 import E3, rot_z

# Slack margin: the model is rejected once 2s >= length * (1 - TAUT_MARGIN).
TAUT_MARGIN = 1e-6
# Horizontal separations below this cannot define the cable plane.
SEPARATION_TOL = 1e-9
# Static admissibility requires endpoint heights equal to this tolerance.
HEIGHT_TOL = 1e-6

_SOLVER_BUDGET = 200
_BISECTION_WIDTH = 1e-3
_RESIDUAL_REL_TOL = 1e-10


@dataclass(frozen=True)
class CableParams:
    """Physical cable: total length (m) and weight per unit length (N/m)."""

    length: float
    unit_weight: float

    def __post_init__(self):
        if not (self.length > 0.0):
            raise ConfigInvalid("cable length must be positive")
        if not (self.unit_weight > 0.0):
            raise ConfigInvalid("cable unit weight must be positive")


@dataclass(frozen=True)
class CatenaryShape:
    """Solved geometry of one hanging configuration.

    yaw        : atan2 of the horizontal endpoint separation (rad)
    rotation   : rot_z(yaw), kept for reporting
    half_span  : s, half the horizontal endpoint distance (m)
    shape_param: a, the catenary scale constant solving l/2 = a sinh(s/a)
    vertex     : inertial position of the lowest point of the curve
    direction  : horizontal unit vector from first toward second endpoint
    """

    yaw: float
    rotation: np.ndarray
    half_span: float
    shape_param: float
    vertex: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        if not (self.half_span > 0.0):
            raise ConfigInvalid("half_span must be positive")
        if not (self.shape_param > 0.0):
            raise ConfigInvalid("shape_param must be positive")
        if np.linalg.norm(self.rotation - rot_z(self.yaw)) > 1e-9:
            raise ConfigInvalid("rotation inconsistent with yaw")

    @property
    def frame(self):
        """Local-to-inertial basis [d x e3, d, e3] (columns)."""
        d = self.direction
        return np.column_stack((np.array([d[1], -d[0], 0.0]), d, E3))


@dataclass(frozen=True)
class EndpointTensions:
    """Cable pull on each endpoint holder, in local frame components.

    Both vertical components equal -w*l/2 (each holder carries half the
    cable weight); the horizontal components point inward, toward the
    opposite endpoint.
    """

    t1: np.ndarray
    t2: np.ndarray


@dataclass(frozen=True)
class Admissibility:
    """Result of the static admissibility query, with a reason when False."""

    ok: bool
    reason: str

    def __bool__(self):
        return self.ok


def _classify(p1, p2, length, tol_height):
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    sep_xy = math.hypot(p2[0] - p1[0], p2[1] - p1[1])
    if sep_xy <= SEPARATION_TOL:
        return Admissibility(False, f"degenerate separation: horizontal distance {sep_xy:.3e}")
    skew = abs(p2[2] - p1[2])
    if skew > tol_height:
        return Admissibility(False, f"height mismatch: |z1 - z2| = {skew:.3e}")
    if sep_xy >= length * (1.0 - TAUT_MARGIN):
        return Admissibility(False, f"taut: separation {sep_xy:.6g} vs length {length:.6g}")
    return Admissibility(True, "ok")


def admissible(p1, p2, length, tol_height=HEIGHT_TOL):
    """Check that (p1, p2, length) supports a hanging-cable solution.

    Requires a usable horizontal separation, equal heights within
    tol_height, and strict slack (2s < length * (1 - TAUT_MARGIN)).
    """
    return _classify(p1, p2, length, tol_height)


def orientation(p1, p2):
    """Yaw of the endpoint pair: (yaw, rot_z(yaw), horizontal unit direction)."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    dx, dy = p2[0] - p1[0], p2[1] - p1[1]
    sep = math.hypot(dx, dy)
    if sep <= SEPARATION_TOL:
        raise DegenerateSeparation(f"horizontal separation {sep:.3e} below {SEPARATION_TOL}")
    yaw = math.atan2(dy, dx)
    direction = np.array([dx / sep, dy / sep, 0.0])
    return yaw, rot_z(yaw), direction


def half_span(p1, p2):
    """Half the horizontal distance between the endpoints (m)."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    return 0.5 * math.hypot(p2[0] - p1[0], p2[1] - p1[1])


def solve_shape_parameter(half_span, length):
    """Solve l/2 = a sinh(s/a) for the scale constant a.

    Substituting u = s/a turns this into sinh(u)/u = l/(2s), which has a
    unique positive root because sinh(u)/u increases from 1. Bisection
    narrows a doubling-grown bracket to width 1e-3, then Newton polishes;
    the combined iteration budget is 200. The result satisfies
    |a sinh(s/a) - l/2| < 1e-10 * l.
    """
    s, length = float(half_span), float(length)
    if not (s > 0.0):
        raise DegenerateSeparation("half_span must be positive")
    if not (length > 0.0):
        raise ConfigInvalid("length must be positive")
    if 2.0 * s >= length * (1.0 - TAUT_MARGIN):
        raise TautCable(f"2s = {2 * s:.6g} leaves no slack on length {length:.6g}")
    rho = length / (2.0 * s)

    def g(u):
        return math.sinh(u) / u - rho

    budget = _SOLVER_BUDGET
    lo, hi = 1e-12, 1.0
    while g(hi) < 0.0:
        hi *= 2.0
        budget -= 1
        if hi > 750.0 or budget <= 0:
            raise NoConvergence("failed to bracket the shape-parameter root")
    while hi - lo > _BISECTION_WIDTH and budget > 0:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        budget -= 1
    u = 0.5 * (lo + hi)
    while budget > 0:
        slope = (math.cosh(u) - math.sinh(u) / u) / u
        step = g(u) / slope
        u -= step
        budget -= 1
        if abs(step) < 1e-14 * max(1.0, u):
            break
    else:
        raise NoConvergence("iteration budget exhausted")

    a = s / u
    if abs(a * math.sinh(s / a) - 0.5 * length) >= _RESIDUAL_REL_TOL * length:
        raise NoConvergence("residual tolerance not met")
    return a


def _check_param(r, shape):
    r = np.asarray(r, dtype=float)
    worst = float(np.max(np.abs(r))) if r.size else 0.0
    if worst > shape.half_span * (1.0 + 1e-12):
        raise ParamOutOfRange(
            f"|r| = {worst:.6g} exceeds half_span {shape.half_span:.6g}")
    return r


def curve_point_local(r, shape):
    """Curve sample in local components: (0, r, a (cosh(r/a) - 1)).

    r may be a scalar or an array; an array of n parameters yields an
    (n, 3) block of points.
    """
    r = _check_param(r, shape)
    a = shape.shape_param
    z = a * (np.cosh(r / a) - 1.0)
    return np.stack([np.zeros_like(r), r, z], axis=-1)


def curve_point(r, shape):
    """Inertial position of the cable point at arc parameter r in [-s, s]."""
    return curve_point_local(r, shape) @ shape.frame.T + shape.vertex


def tension_distribution(r, shape, unit_weight):
    """Internal tension at section r, local components w*a*(0, 1, sinh(r/a)).

    The vector is the pull of the increasing-r side on the decreasing-r
    side; its magnitude is w*a*cosh(r/a), smallest at the vertex. Accepts
    scalar or array r like curve_point_local.
    """
    r = _check_param(r, shape)
    wa = float(unit_weight) * shape.shape_param
    return np.stack([np.zeros_like(r), np.full_like(r, wa),
                     wa * np.sinh(r / shape.shape_param)], axis=-1)


def endpoint_tensions(shape, cable):
    """Cable pull on each endpoint holder, local components.

    Closed form: t1 = (0, +w a, -w l/2), t2 = (0, -w a, -w l/2). The
    vertical parts use w*l/2 directly (not w*a*sinh(s/a)) so they are
    exact regardless of the solver residual; the two agree to the solver
    tolerance. Sum of the inertial forces is (0, 0, -w*l): the holders
    jointly carry the full cable weight.
    """
    w, length = cable.unit_weight, cable.length
    a = shape.shape_param
    t1 = np.array([0.0, w * a, -0.5 * w * length])
    t2 = np.array([0.0, -w * a, -0.5 * w * length])
    return EndpointTensions(t1=t1, t2=t2)


def endpoint_forces_inertial(shape, cable):
    """Inertial cable forces on (first, second) endpoint holders."""
    tensions = endpoint_tensions(shape, cable)
    frame = shape.frame
    return frame @ tensions.t1, frame @ tensions.t2


def catenary_of_positions(p1, p2, cable, tol_height=HEIGHT_TOL):
    """Full static solve for endpoints p1, p2: returns (shape, tensions).

    Raises DegenerateSeparation / InadmissibleConfiguration / TautCable
    when the endpoint pair leaves the model's domain; no partial result
    is produced.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    verdict = _classify(p1, p2, cable.length, tol_height)
    if not verdict:
        reason = verdict.reason
        if reason.startswith("degenerate"):
            raise DegenerateSeparation(reason)
        if reason.startswith("taut"):
            raise TautCable(reason)
        raise InadmissibleConfiguration(reason)
    yaw, rotation, direction = orientation(p1, p2)
    s = half_span(p1, p2)
    a = solve_shape_parameter(s, cable.length)
    sag = a * (math.cosh(s / a) - 1.0)
    vertex = 0.5 * (p1 + p2) - sag * E3
    shape = CatenaryShape(yaw=yaw, rotation=rotation, half_span=s,
                          shape_param=a, vertex=vertex, direction=direction)
    return shape, endpoint_tensions(shape, cable)
