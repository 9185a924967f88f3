import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flie.errors import DegenerateView, EmptyCloud
from flie.geometry import FrameTag, PointCloud, Pose
from flie.inspection import (
    StepKind,
    heading_of,
    horizontal_overlap,
    inspection_step,
    vertical_overlap,
    view_basis,
)
from flie.params import PlannerParams

P = PlannerParams()
TAN43 = math.tan(math.radians(43.0))
TAN28_5 = math.tan(math.radians(28.5))


def wall_cloud(x=1.0, z_top=3.0):
    ys, zs = np.meshgrid(np.linspace(-1, 1, 41), np.linspace(0.2, z_top, 57))
    return PointCloud(np.column_stack([np.full(ys.size, x), ys.ravel(), zs.ravel()]), FrameTag.WORLD)


def test_view_basis_axis_case():
    b = view_basis([1, 0, 1], [0, 0, 1])
    np.testing.assert_allclose(b.v_x, [1, 0, 0])
    np.testing.assert_allclose(b.v_y, [0, 1, 0])
    np.testing.assert_allclose(b.v_z, [0, 0, 1])


def test_view_basis_facing_y():
    b = view_basis([0, 2, 1], [0, 0, 1])
    np.testing.assert_allclose(b.v_x, [0, 1, 0])
    np.testing.assert_allclose(b.v_y, [-1, 0, 0])
    np.testing.assert_allclose(b.v_z, [0, 0, 1])


def test_view_basis_vertical_is_degenerate():
    with pytest.raises(DegenerateView):
        view_basis([0, 0, 5], [0, 0, 1])


vec = st.tuples(*[st.floats(-10, 10, allow_nan=False)] * 3)


@given(vec, vec)
def test_view_basis_orthonormal_right_handed(a, b):
    a, b = np.array(a), np.array(b)
    d = a - b
    if math.hypot(d[0], d[1]) < 1e-3:
        return
    basis = view_basis(a, b)
    m = basis.matrix()
    np.testing.assert_allclose(m.T @ m, np.eye(3), atol=1e-9)
    assert np.linalg.det(m) == pytest.approx(1.0)
    assert basis.v_y[2] == pytest.approx(0.0, abs=1e-12)
    assert basis.v_z[2] >= 0.0


@pytest.mark.parametrize(
    "v,expected", [((1, 0, 0), 0.0), ((0, 1, 0), math.pi / 2), ((-1 / 2**0.5, -1 / 2**0.5, 0), -3 * math.pi / 4)]
)
def test_heading_of(v, expected):
    assert heading_of(v) == pytest.approx(expected)


def test_overlaps_at_reference_values():
    h = horizontal_overlap([0, 0, 0], [1, 0, 0], math.radians(86), 0.8)
    v = vertical_overlap([0, 0, 0], [1, 0, 0], math.radians(57), 0.5)
    assert h == pytest.approx(2 * TAN43 * 0.2)
    assert v == pytest.approx(2 * TAN28_5 * 0.5)
    assert abs(h - 0.3730) <= 1e-3
    assert abs(v - 0.5430) <= 1e-3


def test_overlap_limits():
    assert horizontal_overlap([0, 0, 0], [1, 0, 0], 1.0, 1.0) == 0.0
    assert vertical_overlap([0, 0, 0], [1, 0, 0], 1.0, 1.0) == 0.0
    assert horizontal_overlap([0, 0, 0], [1, 0, 0], math.pi / 2, 0.0) == pytest.approx(2.0)
    v1 = vertical_overlap([0, 0, 0], [1, 0, 0], 1.0, 0.5)
    assert vertical_overlap([0, 0, 0], [2, 0, 0], 1.0, 0.5) == pytest.approx(2 * v1)


def test_lateral_step_at_standoff():
    s = inspection_step(Pose(0, 0, 1), wall_cloud(), False, P)
    assert s.kind == StepKind.LATERAL
    np.testing.assert_allclose(s.next_pose.position, [0.0, 2 * TAN43 * 0.2, 1.0], atol=1e-12)
    assert s.next_pose.yaw == 0.0


def test_distance_correction():
    s = inspection_step(Pose(-0.5, 0, 1), wall_cloud(), False, P)
    assert s.distance == pytest.approx(1.5)
    assert s.next_pose.x == pytest.approx(0.0)
    assert s.next_pose.y == pytest.approx(2 * TAN43 * 0.2 * 1.5)


def test_ascend_adds_vertical_overlap():
    lateral = inspection_step(Pose(0, 0, 1), wall_cloud(), False, P)
    up = inspection_step(Pose(0, 0, 1), wall_cloud(), True, P)
    assert up.kind == StepKind.ASCEND and up.ascended
    assert up.next_pose.z - lateral.next_pose.z == pytest.approx(2 * TAN28_5 * 0.5)


def test_top_reached_when_cloud_ends_below_target():
    s = inspection_step(Pose(0, 0, 1), wall_cloud(z_top=1.3), True, P)
    assert s.kind == StepKind.TOP_REACHED


def test_body_cloud_is_moved_to_world():
    agent = Pose(0, 0, 1, math.pi / 2)
    world = wall_cloud()
    # Same wall, rotated into the agent's frame: x=1 ahead becomes y=1 in world.
    body = PointCloud(world.points - [0, 0, 1], FrameTag.BODY)
    s = inspection_step(agent, body, False, P)
    assert s.poi[1] == pytest.approx(1.0)
    assert s.next_pose.yaw == pytest.approx(math.pi / 2)


def test_empty_cloud():
    with pytest.raises(EmptyCloud):
        inspection_step(Pose(0, 0, 1), PointCloud(), False, P)


@given(st.floats(0.55, 1.5))
def test_flat_wall_standoff_restored_in_one_step(d0):
    s = inspection_step(Pose(1.0 - d0, 0, 1), wall_cloud(), False, P)
    assert 1.0 - s.next_pose.x == pytest.approx(1.0, abs=1e-12)
