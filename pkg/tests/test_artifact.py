"""Offline artifact: save/load roundtrip and version gate."""

import json

import numpy as np
import pytest

from ssmtrack.artifact import SCHEMA_VERSION, load_artifact, save_artifact
from ssmtrack.robots import PointBody, centers_over_grid
from ssmtrack.sim import Scenario, build_world, run_scenario


@pytest.fixture(scope="module")
def car_world():
    return build_world(Scenario(world="car1d", robot={"kind": "point"}, N=20, M=8))


def _save(world, path, **kw):
    robot = PointBody()
    return save_artifact(path, world.grid, world.limits, world.family, world.tables,
                         world.centers, robot.sphere_radii, **kw)


def test_roundtrip_is_bitwise(tmp_path, car_world):
    f = tmp_path / "car.npz"
    meta = _save(car_world, f)
    assert meta == {"version": SCHEMA_VERSION, "N": 20, "M": 8,
                    "delta_v": car_world.tables.delta_v}
    bundle = load_artifact(f)
    assert bundle.meta == meta
    assert np.array_equal(bundle.grid.stages, car_world.grid.stages)
    assert np.array_equal(bundle.grid.qp, car_world.grid.qp)
    assert np.array_equal(bundle.family.K, car_world.family.K, equal_nan=True)
    assert np.array_equal(bundle.tables.tau, car_world.tables.tau)
    assert np.array_equal(bundle.tables.rho, car_world.tables.rho)
    assert np.array_equal(bundle.tables.band, car_world.tables.band)
    assert bundle.tables.delta_v == car_world.tables.delta_v
    assert bundle.tables.M == car_world.tables.M
    assert np.array_equal(bundle.centers, car_world.centers)
    assert bundle.radii.shape == (1,)


def test_extra_meta_survives(tmp_path, car_world):
    f = tmp_path / "car.npz"
    _save(car_world, f, extra_meta={"scenario": "unit-test"})
    assert load_artifact(f).meta["scenario"] == "unit-test"


def test_version_mismatch_rejected(tmp_path, car_world):
    f = tmp_path / "car.npz"
    _save(car_world, f)
    with np.load(f) as z:
        arrays = {k: z[k] for k in z.files}
    meta = json.loads(str(arrays["meta"]))
    meta["version"] = SCHEMA_VERSION + 1
    arrays["meta"] = np.array(json.dumps(meta))
    np.savez_compressed(f, **arrays)
    with pytest.raises(ValueError, match="artifact version"):
        load_artifact(f)


def test_build_world_reuses_artifact(tmp_path, car_world):
    f = tmp_path / "car.npz"
    _save(car_world, f)
    bundle = load_artifact(f)
    scn = Scenario(world="car1d", robot={"kind": "point"}, N=20, M=8)
    world = build_world(scn, precomputed=bundle)
    assert world.tables is bundle.tables
    assert np.array_equal(world.grid.stages, car_world.grid.stages)
    # artifact geometry must match the scenario's robot
    scn_arm = Scenario(world="arm", robot={"kind": "planar", "dof": 2},
                       path={"waypoints": [[0, 0], [1, 1]]},
                       limits={"v_max": [1, 1], "a_max": [5, 5]})
    with pytest.raises(ValueError, match="geometry"):
        build_world(scn_arm, precomputed=bundle)


def test_loaded_tables_drive_executor(tmp_path, car_world):
    f = tmp_path / "car.npz"
    _save(car_world, f)
    bundle = load_artifact(f)
    scn = Scenario(world="car1d", robot={"kind": "point"}, N=20, M=8,
                   duration=6.0, goal=25.0)
    summary, _ = run_scenario(scn, precomputed=bundle)
    assert summary["arrived"]
    assert summary["violations"] == 0
