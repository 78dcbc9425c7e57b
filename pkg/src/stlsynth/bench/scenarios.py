"""The four benchmark scenarios on the planar double integrator.

Formula shapes are fixed here; region geometry and the start state come
from ``data/scenarios.json`` so that layouts can be inspected and edited
without touching code.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from ..formula import Formula
from ..parser import RegionDef, parse, regions_from_json
from ..system import LinearSystem, double_integrator

HORIZONS = (10, 25, 50)


@dataclass(frozen=True)
class Scenario:
    name: str
    regions: dict[str, RegionDef]
    spec_text: str
    system: LinearSystem
    x0: np.ndarray
    horizon: int
    Q: tuple[float, ...] = (0.0, 0.0, 0.0, 0.0)
    R: tuple[float, ...] = (0.0, 0.0)
    horizons: tuple[int, ...] = HORIZONS
    # cap on the robustness variable used when solving the scenario
    rho_max: float | None = None
    # region name -> plot category (obstacle, goal, target, key, door)
    kinds: dict[str, str] = field(default_factory=dict)

    def formula(self) -> Formula:
        return parse(self.spec_text, self.regions, dim=self.system.p)

    @property
    def quadratic(self) -> bool:
        return any(self.Q) or any(self.R)


@lru_cache(maxsize=None)
def _layout_text() -> str:
    return resources.files("stlsynth.data").joinpath("scenarios.json").read_text()


def load_layouts(text: str | None = None) -> dict[str, dict]:
    return json.loads(text if text is not None else _layout_text())


def _make(name: str, spec: str, T: int, kinds: dict[str, str], layouts=None) -> Scenario:
    layout = (layouts or load_layouts())[name]
    sys = double_integrator()
    x0 = np.asarray(layout["x0"], dtype=float)
    lo, hi = sys.x_bounds[:, 0], sys.x_bounds[:, 1]
    if x0.shape != (sys.n,) or np.any(x0 < lo) or np.any(x0 > hi):
        raise ValueError(f"{name}: x0 outside the state bounds")
    regions = regions_from_json(layout["regions"])
    sc = Scenario(name, regions, spec, sys, x0, T, kinds=kinds,
                  Q=tuple(layout.get("Q", (0.0,) * sys.n)), R=tuple(layout.get("R", (0.0,) * sys.m)),
                  rho_max=layout.get("rho_max"))
    sc.formula()  # fail early if the text does not parse against the regions
    return sc


def scenario_two_target(T: int = 25, layouts=None) -> Scenario:
    """Dwell in one of two targets for six samples, avoid ``O`` and reach ``G``."""
    if T < 5:
        raise ValueError("two_target needs T >= 5 for its dwell window")
    spec = (f"F[0,{T - 5}] (G[0,5] in(T1) | G[0,5] in(T2)) "
            f"& G[0,{T}] out(O) & F[0,{T}] in(G)")
    kinds = {"T1": "target", "T2": "target", "O": "obstacle", "G": "goal"}
    return _make("two_target", spec, T, kinds, layouts)


def scenario_narrow_passage(T: int = 25, layouts=None) -> Scenario:
    spec = (f"F[0,{T}] (in(G1) | in(G2)) "
            f"& G[0,{T}] (out(O1) & out(O2) & out(O3) & out(O4))")
    kinds = {f"O{i}": "obstacle" for i in range(1, 5)} | {"G1": "goal", "G2": "goal"}
    return _make("narrow_passage", spec, T, kinds, layouts)


def scenario_many_target(T: int = 25, layouts=None) -> Scenario:
    groups = " & ".join(f"(F[0,{T}] in(T{i}_1) | F[0,{T}] in(T{i}_2))" for i in range(1, 6))
    spec = f"{groups} & G[0,{T}] out(O)"
    kinds = {"O": "obstacle"} | {f"T{i}_{j}": "target" for i in range(1, 6) for j in (1, 2)}
    return _make("many_target", spec, T, kinds, layouts)


def scenario_door_puzzle(T: int = 25, layouts=None) -> Scenario:
    """Collect each key before passing its door, reach ``G``, avoid five obstacles."""
    keys = " & ".join(f"(out(D{i}) U[0,{T}] in(K{i}))" for i in (1, 2))
    obstacles = " & ".join(f"out(O{i})" for i in range(1, 6))
    spec = f"{keys} & F[0,{T}] in(G) & G[0,{T}] ({obstacles})"
    kinds = ({f"K{i}": "key" for i in (1, 2)} | {f"D{i}": "door" for i in (1, 2)}
             | {"G": "goal"} | {f"O{i}": "obstacle" for i in range(1, 6)})
    return _make("door_puzzle", spec, T, kinds, layouts)


SCENARIOS = {
    "two_target": scenario_two_target,
    "narrow_passage": scenario_narrow_passage,
    "many_target": scenario_many_target,
    "door_puzzle": scenario_door_puzzle,
}

# published (standard, proposed) binary counts by horizon, for comparison
REFERENCE_COUNTS = {
    "two_target": {25: (1216, 89), 50: (2616, 166)},
    "narrow_passage": {25: (624, 318), 50: (1124, 619)},
    "many_target": {25: (1144, 441), 50: (2244, 846)},
    "door_puzzle": {25: (3432, 2355), 50: (11832, 8433)},
}


def get_scenario(name: str, T: int) -> Scenario:
    try:
        return SCENARIOS[name](T)
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
