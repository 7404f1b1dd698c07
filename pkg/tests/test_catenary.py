import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catsim.catenary import (
    HEIGHT_TOL,
    CableParams,
    admissible,
    catenary_of_positions,
    curve_point,
    curve_point_local,
    endpoint_forces_inertial,
    endpoint_tensions,
    half_span,
    orientation,
    solve_shape_parameter,
    tension_distribution,
)
from catsim.errors import (
    ConfigInvalid,
    DegenerateSeparation,
    InadmissibleConfiguration,
    ParamOutOfRange,
    TautCable,
)
from conftest import shape_param_oracle

# Frozen oracle values (bisection on a sinh(s/a) = l/2, see conftest).
ORACLE_CASES = [
    (0.8, 2.0, 6.764037581707e-01),
    (0.1, 2.0, 2.222264693638e-02),
    (1.4, 3.0, 2.161079334810e+00),
    (0.45, 1.0, 5.600943750526e-01),
]

# strategies drawing admissible (span ratio, length, weight) triples
ratios = st.floats(0.05, 0.95, allow_nan=False)
lengths = st.floats(0.2, 50.0, allow_nan=False)
weights = st.floats(1e-3, 20.0, allow_nan=False)


def _place(yaw, s, z=2.0, base=(0.0, 0.0)):
    d = np.array([math.cos(yaw), math.sin(yaw), 0.0])
    mid = np.array([base[0], base[1], z])
    return mid - s * d, mid + s * d


@pytest.mark.parametrize("s,l,expected", ORACLE_CASES)
def test_shape_parameter_matches_oracle(s, l, expected):
    a = solve_shape_parameter(s, l)
    assert math.isclose(a, expected, rel_tol=1e-10)
    assert math.isclose(a, shape_param_oracle(s, l), rel_tol=1e-9)


@given(ratios, lengths)
@settings(max_examples=200, deadline=None)
def test_shape_parameter_residual(ratio, l):
    s = 0.5 * l * ratio
    a = solve_shape_parameter(s, l)
    assert abs(a * math.sinh(s / a) - 0.5 * l) < 1e-10 * l


def test_shape_parameter_near_taut_boundary():
    # strictly inside the slack margin: still solvable
    a = solve_shape_parameter(0.999 * 1.0, 2.0)
    assert a > 0.0


def test_shape_parameter_taut_raises():
    with pytest.raises(TautCable):
        solve_shape_parameter(1.0 - 1e-8, 2.0)
    with pytest.raises(TautCable):
        solve_shape_parameter(1.5, 2.0)


def test_shape_parameter_bad_inputs():
    with pytest.raises(DegenerateSeparation):
        solve_shape_parameter(0.0, 2.0)
    with pytest.raises(ConfigInvalid):
        solve_shape_parameter(0.5, -1.0)


def test_orientation_yaw_and_direction():
    p1, p2 = _place(0.7, 0.8)
    yaw, rotation, direction = orientation(p1, p2)
    assert math.isclose(yaw, 0.7, rel_tol=1e-12)
    np.testing.assert_allclose(rotation, np.array(
        [[math.cos(0.7), -math.sin(0.7), 0.0],
         [math.sin(0.7), math.cos(0.7), 0.0],
         [0.0, 0.0, 1.0]]), atol=1e-15)
    np.testing.assert_allclose(direction, [math.cos(0.7), math.sin(0.7), 0.0],
                               atol=1e-15)


def test_orientation_degenerate():
    with pytest.raises(DegenerateSeparation):
        orientation([0.0, 0.0, 1.0], [0.0, 0.0, 3.0])


def test_half_span_ignores_height():
    assert math.isclose(half_span([0, 0, 0], [3.0, 4.0, 9.0]), 2.5)


def test_admissible_reasons():
    assert admissible([-0.8, 0, 2], [0.8, 0, 2], 2.0)
    v = admissible([0, 0, 2], [1e-12, 0, 2], 2.0)
    assert not v and v.reason.startswith("degenerate separation")
    v = admissible([-0.8, 0, 2.0], [0.8, 0, 2.1], 2.0)
    assert not v and v.reason.startswith("height mismatch")
    v = admissible([-1.2, 0, 2], [1.2, 0, 2], 2.0)
    assert not v and v.reason.startswith("taut")


def test_catenary_of_positions_raises_by_kind():
    cable = CableParams(2.0, 0.5)
    with pytest.raises(DegenerateSeparation):
        catenary_of_positions([0, 0, 2], [0, 0, 2], cable)
    with pytest.raises(TautCable):
        catenary_of_positions([-1.2, 0, 2], [1.2, 0, 2], cable)
    with pytest.raises(InadmissibleConfiguration):
        catenary_of_positions([-0.8, 0, 2.0], [0.8, 0, 2.1], cable)
    # relaxed height tolerance admits skewed endpoints
    shape, _ = catenary_of_positions([-0.8, 0, 2.0], [0.8, 0, 2.1], cable,
                                     tol_height=math.inf)
    assert shape.shape_param > 0.0


def test_height_tolerance_default():
    cable = CableParams(2.0, 0.5)
    catenary_of_positions([-0.8, 0, 2.0], [0.8, 0, 2.0 + 0.5 * HEIGHT_TOL], cable)


def test_curve_endpoint_interpolation():
    cable = CableParams(2.0, 0.5)
    p1, p2 = _place(1.1, 0.8, z=3.0, base=(0.4, -0.2))
    shape, _ = catenary_of_positions(p1, p2, cable)
    np.testing.assert_allclose(curve_point(-shape.half_span, shape), p1, atol=1e-9)
    np.testing.assert_allclose(curve_point(shape.half_span, shape), p2, atol=1e-9)


def test_curve_vertex_is_lowest_and_sagged():
    cable = CableParams(2.0, 0.5)
    shape, _ = catenary_of_positions([-0.8, 0, 2], [0.8, 0, 2], cable)
    rs = np.linspace(-shape.half_span, shape.half_span, 201)
    pts = curve_point(rs, shape)
    assert np.all(pts[:, 2] <= 2.0 + 1e-12)
    np.testing.assert_allclose(curve_point(0.0, shape), shape.vertex, atol=1e-12)
    assert shape.vertex[2] < 2.0


def test_curve_point_local_shape_and_bounds():
    cable = CableParams(2.0, 0.5)
    shape, _ = catenary_of_positions([-0.8, 0, 2], [0.8, 0, 2], cable)
    local = curve_point_local(0.0, shape)
    np.testing.assert_allclose(local, np.zeros(3), atol=0.0)
    assert curve_point_local(np.linspace(-0.8, 0.8, 7), shape).shape == (7, 3)
    with pytest.raises(ParamOutOfRange):
        curve_point_local(0.81, shape)
    with pytest.raises(ParamOutOfRange):
        tension_distribution(np.array([0.0, 0.9]), shape, 0.5)


def test_endpoint_tensions_closed_form():
    cable = CableParams(2.0, 1.0)
    shape, tensions = catenary_of_positions([-0.8, 0, 2], [0.8, 0, 2], cable)
    a = shape.shape_param
    np.testing.assert_allclose(tensions.t1, [0.0, a, -1.0], atol=1e-12)
    np.testing.assert_allclose(tensions.t2, [0.0, -a, -1.0], atol=1e-12)
    # frozen magnitude for this case
    assert math.isclose(np.linalg.norm(tensions.t1), 1.207278776450, rel_tol=1e-10)


def test_tension_distribution_matches_endpoints():
    cable = CableParams(2.0, 0.7)
    shape, tensions = catenary_of_positions([-0.8, 0, 2], [0.8, 0, 2], cable)
    s = shape.half_span
    internal_lo = tension_distribution(-s, shape, cable.unit_weight)
    internal_hi = tension_distribution(s, shape, cable.unit_weight)
    np.testing.assert_allclose(internal_lo, tensions.t1, atol=1e-10)
    np.testing.assert_allclose(-internal_hi, tensions.t2, atol=1e-10)
    # magnitude profile w a cosh(r/a), minimal at the vertex
    mags = np.linalg.norm(
        tension_distribution(np.linspace(-s, s, 101), shape, cable.unit_weight),
        axis=1)
    assert mags.argmin() == 50
    assert math.isclose(mags[50], cable.unit_weight * shape.shape_param,
                        rel_tol=1e-12)


@given(ratios, lengths, weights, st.floats(-math.pi, math.pi))
@settings(max_examples=150, deadline=None)
def test_static_force_balance(ratio, l, w, yaw):
    s = 0.5 * l * ratio
    cable = CableParams(l, w)
    p1, p2 = _place(yaw, s, z=1.0 + l)
    shape, _ = catenary_of_positions(p1, p2, cable)
    f1, f2 = endpoint_forces_inertial(shape, cable)
    # the two holders jointly carry exactly the cable weight
    np.testing.assert_allclose(f1 + f2, [0.0, 0.0, -w * l],
                               atol=1e-9 * max(1.0, w * l))
    # vertical split is exact by construction
    assert f1[2] == pytest.approx(-0.5 * w * l, abs=1e-12 * max(1.0, w * l))
    # horizontal components pull the holders toward each other
    d = shape.direction
    assert f1 @ d > 0.0
    assert f2 @ d < 0.0
    # endpoints interpolated
    np.testing.assert_allclose(curve_point(-shape.half_span, shape), p1,
                               atol=1e-9 * max(1.0, l))
    np.testing.assert_allclose(curve_point(shape.half_span, shape), p2,
                               atol=1e-9 * max(1.0, l))


def test_swap_symmetry():
    cable = CableParams(2.0, 0.5)
    p1, p2 = _place(0.3, 0.7)
    fa = endpoint_forces_inertial(catenary_of_positions(p1, p2, cable)[0], cable)
    fb = endpoint_forces_inertial(catenary_of_positions(p2, p1, cable)[0], cable)
    np.testing.assert_allclose(fa[0], fb[1], atol=1e-12)
    np.testing.assert_allclose(fa[1], fb[0], atol=1e-12)


def test_arc_length_polyline():
    cable = CableParams(2.0, 0.5)
    shape, _ = catenary_of_positions([-0.8, 0.3, 2], [0.8, -0.1, 2], cable)
    rs = np.linspace(-shape.half_span, shape.half_span, 10001)
    pts = curve_point(rs, shape)
    arc = float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
    assert abs(arc - cable.length) < 1e-6


def test_frame_columns():
    cable = CableParams(2.0, 0.5)
    shape, _ = catenary_of_positions([0, -0.8, 2], [0, 0.8, 2], cable)
    f = shape.frame
    np.testing.assert_allclose(f.T @ f, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(f[:, 1], [0.0, 1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(f[:, 2], [0.0, 0.0, 1.0], atol=0.0)
    assert math.isclose(np.linalg.det(f), 1.0, rel_tol=1e-12)


def test_cable_params_validation():
    with pytest.raises(ConfigInvalid):
        CableParams(0.0, 0.5)
    with pytest.raises(ConfigInvalid):
        CableParams(2.0, -0.1)
