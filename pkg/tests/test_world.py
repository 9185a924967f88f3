import itertools

import numpy as np
import pytest

from flie.errors import ParseError, ValidationError
from flie.geometry import round_half_away
from flie.world import (
    Box,
    bundled_scenario,
    load_scenario,
    scenario_from_mapping,
    surface_points,
)

MINIMAL = {"structures": [[0, 0, 0, 1, 1, 1]], "start_pose": [-2, 0.5, 0.5, 0], "seed": 3}


def test_defaults_applied():
    s = scenario_from_mapping(MINIMAL)
    assert s.params.gamma_h == 0.8 and s.params.gamma_v == 0.5
    assert s.params.horizon == 6 and s.params.threshold_init == 0.6
    assert s.sensor.max_range == 1.5 and s.sensor.min_range == 0.5
    assert s.max_steps == 500
    assert len(s.structures) == 1


def test_unknown_key_rejected():
    with pytest.raises(ValidationError):
        scenario_from_mapping({**MINIMAL, "gamma_hh": 0.7})


@pytest.mark.parametrize("key", ["structures", "start_pose", "seed"])
def test_missing_required_key(key):
    data = dict(MINIMAL)
    del data[key]
    with pytest.raises(ValidationError):
        scenario_from_mapping(data)


def test_start_inside_structure_rejected():
    with pytest.raises(ValidationError):
        scenario_from_mapping({**MINIMAL, "start_pose": [0.5, 0.5, 0.5, 0]})


def test_bad_box_rejected():
    with pytest.raises(ValidationError):
        scenario_from_mapping({**MINIMAL, "structures": [[0, 0, 0, 1, 1]]})
    with pytest.raises(ValidationError):
        Box((0, 0, 0), (1, 0, 1))


def test_unparseable_file(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("structures: [[0, 0\n")
    with pytest.raises(ParseError):
        load_scenario(p)
    with pytest.raises(ParseError):
        load_scenario(tmp_path / "missing.yaml")


def test_multi_block_structure_and_name(tmp_path):
    p = tmp_path / "tower.yaml"
    p.write_text("seed: 1\nstart_pose: [-3, 0, 1, 0]\nstructures:\n  - [[0, 0, 0, 2, 1, 1], [0, 0, 1, 1, 1, 2]]\n")
    s = load_scenario(p)
    assert s.name == "tower"
    assert len(s.structures) == 1 and len(s.structures[0].blocks) == 2


def test_landmark_counts_follow_face_areas():
    s = scenario_from_mapping({**MINIMAL, "structures": [[0, 0, 0, 2.0, 0.5, 1.5]], "landmark_density": 10})
    dx, dy, dz = 2.0, 0.5, 1.5
    expected = 2 * sum(round_half_away(a * 10) for a in (dy * dz, dx * dz, dx * dy))
    assert len(s.landmarks) == expected
    box = s.structures[0].blocks[0]
    for lm in s.landmarks:
        p = np.array(lm.position)
        assert box.contains(p)
        on_face = np.isclose(p, box.lo) | np.isclose(p, box.hi)
        assert on_face.any()


def test_landmarks_depend_only_on_seed():
    a = scenario_from_mapping(MINIMAL)
    b = scenario_from_mapping(MINIMAL)
    c = scenario_from_mapping({**MINIMAL, "seed": 4})
    assert a.landmarks == b.landmarks
    assert a.landmarks != c.landmarks


def test_surface_points_unit_cube_enumeration():
    # At resolution 0.5 the cube's surface lattice is {0, .5, 1}^3 minus the centre.
    s = scenario_from_mapping(MINIMAL)
    pts = surface_points(s, 0.5).points
    oracle = sorted(p for p in itertools.product((0.0, 0.5, 1.0), repeat=3) if p != (0.5, 0.5, 0.5))
    assert len(pts) == 26
    assert sorted(map(tuple, pts)) == oracle


def test_surface_points_drop_shared_faces():
    # Two unit cubes glued along x = 1: the shared face's interior points vanish.
    s = scenario_from_mapping({**MINIMAL, "structures": [[[0, 0, 0, 1, 1, 1], [1, 0, 0, 2, 1, 1]]]})
    pts = surface_points(s, 0.5).points
    oracle = {
        p
        for p in itertools.product((0.0, 0.5, 1.0, 1.5, 2.0), (0.0, 0.5, 1.0), (0.0, 0.5, 1.0))
        if p[1] in (0.0, 1.0) or p[2] in (0.0, 1.0) or p[0] in (0.0, 2.0)
    }
    assert set(map(tuple, pts)) == oracle


def test_distance_to_structures():
    s = scenario_from_mapping(MINIMAL)
    assert s.distance_to_structures([-2, 0.5, 0.5]) == pytest.approx(2.0)
    assert s.distance_to_structures([2, 2, 0.5]) == pytest.approx(2**0.5)


@pytest.mark.parametrize("name", ["reference_box", "flat_wall", "two_structures", "empty"])
def test_bundled_scenarios_load(name):
    s = bundled_scenario(name)
    assert s.name == name


def test_reference_box_volume():
    s = bundled_scenario("reference_box")
    assert 1.8 <= sum(b.volume for b in s.boxes) <= 2.2
