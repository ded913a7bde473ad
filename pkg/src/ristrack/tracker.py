"""Per-slot beam search over the codebook and multi-slot tracking episodes.

Each one-second slot freezes the UE in a grid cell, and the base station
must pick a codebook entry using a limited measurement budget.  Four methods
are provided: an exhaustive sweep, uniform random sampling, and two Bayesian
optimization loops (GP + expected improvement, TPE + density-ratio score).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import acquisition, surrogate
from .channel import SceneConfig, bs_ris_channel, lin_to_db, ris_ue_channel, uniform_transmit_signal
from .codebook import Codebook, GridMap, RisGeometry, build_codebook


class Method(str, Enum):
    ERGODIC = "ergodic"
    RANDOM = "random"
    GP_EI = "gp_ei"
    TPE_EI = "tpe_ei"


@dataclass(frozen=True)
class TrackerConfig:
    method: Method = Method.TPE_EI
    overhead: float = 0.2          # fraction of the codebook measured per slot
    total_slots: int = 12
    warm_start: bool = False       # seed each slot with the previous chosen entry
    measure_with_noise: bool = False
    gamma: float = surrogate.DEFAULT_GAMMA
    kde_bandwidth: float = surrogate.DEFAULT_BANDWIDTH
    length_scale: float = surrogate.DEFAULT_LENGTH_SCALE
    collect_timing: bool = True

    def __post_init__(self):
        if not 0.0 < self.overhead <= 1.0:
            raise ValueError("overhead must be in (0, 1]")
        if self.total_slots < 1:
            raise ValueError("total_slots must be >= 1")

    def budget(self, num_cells: int) -> int:
        if self.method == Method.ERGODIC:
            return num_cells
        return min(max(int(round(self.overhead * num_cells)), 1), num_cells)


@dataclass(frozen=True)
class MobilityState:
    row: int
    col: int
    speed: int  # grid cells per slot


_MOVES = np.array([(-1, 0), (1, 0), (0, -1), (0, 1)])


def mobility_step(state: MobilityState, grid: GridMap, rng: np.random.Generator) -> MobilityState:
    """Advance the UE by `speed` single-cell moves on the 4-neighborhood.

    Moves that would leave the grid are redrawn; a cell with no valid
    neighbor (1x1 grid) stays put.
    """
    row, col = state.row, state.col
    for _ in range(state.speed):
        valid = [(row + dr, col + dc) for dr, dc in _MOVES
                 if 0 <= row + dr < grid.rows and 0 <= col + dc < grid.cols]
        if not valid:
            break
        while True:
            dr, dc = _MOVES[rng.integers(4)]
            if 0 <= row + dr < grid.rows and 0 <= col + dc < grid.cols:
                row, col = row + dr, col + dc
                break
    return MobilityState(row=row, col=col, speed=state.speed)


@dataclass(frozen=True)
class SlotResult:
    slot_index: int
    true_best_index: int
    chosen_index: int
    true_best_rsrp: float
    achieved_rsrp: float
    measurements_used: int
    elapsed: float


@dataclass
class TrackingScenario:
    """Immutable per-experiment setup: scene, RIS, grid, codebook, BS signal."""

    scene: SceneConfig
    ris: RisGeometry
    grid: GridMap
    codebook: Codebook
    z: np.ndarray
    bs_ris: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.bs_ris is None:
            self.bs_ris = bs_ris_channel(self.scene, self.ris)

    @classmethod
    def default(cls, scene: SceneConfig | None = None, ris: RisGeometry | None = None,
                grid: GridMap | None = None, sweep_resolution: int = 64) -> "TrackingScenario":
        scene = scene or SceneConfig()
        ris = ris or RisGeometry.for_scene(scene)
        grid = grid or GridMap()
        codebook = build_codebook(scene, ris, grid, sweep_resolution=sweep_resolution)
        return cls(scene=scene, ris=ris, grid=grid, codebook=codebook,
                   z=uniform_transmit_signal(scene.num_bs_antennas))


@dataclass
class SlotEnv:
    """One slot's frozen radio environment, ready for repeated measurements."""

    grid: GridMap
    ue_cell: tuple[int, int]
    signals: np.ndarray        # complex received sample per codebook entry
    rsrp_values: np.ndarray    # |signals|^2
    noise_power: float


def build_slot_env(scenario: TrackingScenario, ue_cell: tuple[int, int]) -> SlotEnv:
    ue = scenario.grid.cell_center(scenario.grid.index_of(*ue_cell))
    h = ris_ue_channel(scenario.scene, scenario.ris, ue)
    cascade = h * (scenario.bs_ris @ scenario.z)
    signals = scenario.codebook.unit_phasors() @ cascade
    return SlotEnv(grid=scenario.grid, ue_cell=ue_cell, signals=signals,
                   rsrp_values=np.abs(signals) ** 2,
                   noise_power=scenario.scene.noise_power_watts)


def track_slot(env: SlotEnv, config: TrackerConfig, rng: np.random.Generator,
               slot_index: int = 1, warm_index: int | None = None) -> SlotResult:
    """Run one slot of beam search and report chosen vs. true-best power."""
    num_cells = env.rsrp_values.shape[0]
    budget = config.budget(num_cells)
    true_best = int(np.argmax(env.rsrp_values))

    measure = _make_measure(env, config, rng)

    t0 = time.perf_counter() if config.collect_timing else 0.0

    if config.method == Method.ERGODIC:
        measured = [(k, measure(k)) for k in range(num_cells)]
        used = num_cells
    elif config.method == Method.RANDOM:
        picks = rng.choice(num_cells, size=budget, replace=False)
        measured = [(int(k), measure(int(k))) for k in picks]
        used = budget
    else:
        measured = _bo_loop(env, config, rng, budget, warm_index, measure)
        used = budget

    chosen = max(measured, key=lambda kv: kv[1])[0]
    elapsed = (time.perf_counter() - t0) if config.collect_timing else 0.0

    return SlotResult(
        slot_index=slot_index,
        true_best_index=true_best,
        chosen_index=chosen,
        true_best_rsrp=float(env.rsrp_values[true_best]),
        achieved_rsrp=float(env.rsrp_values[chosen]),
        measurements_used=used,
        elapsed=elapsed,
    )


def _make_measure(env: SlotEnv, config: TrackerConfig, rng: np.random.Generator):
    if not config.measure_with_noise:
        return lambda k: float(env.rsrp_values[k])
    sigma = float(np.sqrt(env.noise_power / 2.0))

    def measure(k: int) -> float:
        noise = rng.normal(0.0, sigma) + 1j * rng.normal(0.0, sigma)
        return float(np.abs(env.signals[k] + noise) ** 2)

    return measure


def _bo_loop(env: SlotEnv, config: TrackerConfig, rng: np.random.Generator,
             budget: int, warm_index: int | None, measure) -> list[tuple[int, float]]:
    """Algorithm: one initial codebook entry, then fit -> select -> measure.

    The surrogate is fit on negated dB power so that the whole
    surrogate/acquisition stack minimizes.
    """
    grid = env.grid
    candidates = grid.grid_points()
    history = surrogate.ObservationHistory()
    measured: list[tuple[int, float]] = []

    def record(k: int) -> None:
        value = measure(k)
        measured.append((k, value))
        history.add(grid.cell_of(k), -lin_to_db(value))

    first = warm_index if warm_index is not None else int(rng.integers(env.rsrp_values.shape[0]))
    record(first)
    for _ in range(budget - 1):
        if config.method == Method.GP_EI:
            model = surrogate.gp_fit(history, length_scale=config.length_scale)
        else:
            model = surrogate.tpe_fit(history, gamma=config.gamma,
                                      bandwidth=config.kde_bandwidth, candidates=candidates)
        point = acquisition.select_next(candidates, model, history)
        record(grid.index_of(int(point[0]), int(point[1])))
    return measured


def run_episode(scenario: TrackingScenario, config: TrackerConfig, speed: int,
                rng: np.random.Generator) -> list[SlotResult]:
    """One tracking episode: T slots of mobility + per-slot beam search.

    The UE starts in a uniformly random cell and performs a reflecting random
    walk.  With warm_start the previous slot's chosen entry replaces the
    random initial measurement.
    """
    grid = scenario.grid
    state = MobilityState(row=int(rng.integers(grid.rows)),
                          col=int(rng.integers(grid.cols)), speed=speed)
    results: list[SlotResult] = []
    prev_chosen: int | None = None
    for t in range(1, config.total_slots + 1):
        state = mobility_step(state, grid, rng)
        env = build_slot_env(scenario, (state.row, state.col))
        warm = prev_chosen if config.warm_start else None
        result = track_slot(env, config, rng, slot_index=t, warm_index=warm)
        results.append(result)
        prev_chosen = result.chosen_index
    return results
