"""Offline-artifact serialization.

One compressed .npz bundles everything the runtime needs: the
discretized path, joint limits, stoppable-set family, braking-time
tables, and the robot's sphere centers per stage.  A JSON header keyed
"meta" carries {version, N, M, delta_v} plus free-form entries so a
file can be sanity-checked without loading the big arrays.
"""

import json
from dataclasses import dataclass

import numpy as np

from .constraints import LimitSpec
from .path import PathGrid
from .reach import ReachTables, StoppableSetFamily

SCHEMA_VERSION = 1


@dataclass
class ArtifactBundle:
    meta: dict
    grid: PathGrid
    limits: LimitSpec
    family: StoppableSetFamily
    tables: ReachTables
    centers: np.ndarray
    radii: np.ndarray


def save_artifact(path, grid, limits, family, tables, centers, radii, extra_meta=None):
    meta = {
        "version": SCHEMA_VERSION,
        "N": int(grid.n_segments),
        "M": int(tables.M),
        "delta_v": float(tables.delta_v),
    }
    if extra_meta:
        meta.update(extra_meta)
    np.savez_compressed(
        path,
        meta=np.array(json.dumps(meta)),
        stages=grid.stages, deltas=grid.deltas,
        q=grid.q, qp=grid.qp, qpp=grid.qpp,
        v_max=limits.v_max, a_max=limits.a_max,
        K=family.K,
        tau=tables.tau, rho=tables.rho, band=tables.band,
        centers=centers, radii=radii,
    )
    return meta


def load_artifact(path):
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        if meta.get("version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported artifact version {meta.get('version')!r}")
        grid = PathGrid(stages=z["stages"], deltas=z["deltas"],
                        q=z["q"], qp=z["qp"], qpp=z["qpp"])
        limits = LimitSpec(v_max=z["v_max"], a_max=z["a_max"])
        family = StoppableSetFamily(K=z["K"])
        tables = ReachTables(delta_v=meta["delta_v"], M=meta["M"],
                             tau=z["tau"], rho=z["rho"], band=z["band"])
        return ArtifactBundle(meta=meta, grid=grid, limits=limits, family=family,
                              tables=tables, centers=z["centers"], radii=z["radii"])
