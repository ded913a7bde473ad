"""Benchmark harness: run the method x overhead x speed matrix and report
accuracy, RSRP error, overhead, and execution time per cell, plus per-slot
path traces suitable for plotting.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import lin_to_db, uniform_transmit_signal
from .codebook import GridMap, build_codebook
from .config import ExperimentConfig
from .tracker import Method, SlotResult, TrackerConfig, TrackingScenario, run_episode

ACCURACY_REL_TOL = 1e-9  # tie handling when comparing achieved vs. best power
CSV_HEADER = "method,overhead,speed,accuracy,rsrp_mae_db,exec_time_s"
TRACE_HEADER = "t,true_row,true_col,pred_row,pred_col,true_rsrp_db,achieved_rsrp_db"


@dataclass(frozen=True)
class MetricsRow:
    method: str
    overhead: float
    speed: int
    accuracy: float
    rsrp_mae_db: float
    exec_time_s: float


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def slot_hit(result: SlotResult) -> bool:
    gap = result.true_best_rsrp - result.achieved_rsrp
    return gap <= ACCURACY_REL_TOL * result.true_best_rsrp


def compute_metrics(results: list[SlotResult], method: str, speed: int,
                    num_cells: int = 100) -> MetricsRow:
    """Aggregate one (method, overhead, speed) cell of slot results."""
    if not results:
        raise ValueError("no slot results to aggregate")
    hits = sum(1 for r in results if slot_hit(r))
    gaps_db = [lin_to_db(r.true_best_rsrp) - lin_to_db(r.achieved_rsrp) for r in results]
    return MetricsRow(
        method=method,
        overhead=float(np.mean([r.measurements_used for r in results])) / num_cells,
        speed=speed,
        accuracy=hits / len(results),
        rsrp_mae_db=float(np.mean(np.abs(gaps_db))),
        exec_time_s=float(np.mean([r.elapsed for r in results])),
    )


def experiment_cells(config: ExperimentConfig) -> list[tuple[Method, float, int]]:
    """Row order of the result table; the sweep method ignores overhead."""
    cells = []
    for method in config.methods:
        etas = (1.0,) if method == Method.ERGODIC else tuple(config.overheads)
        for eta in etas:
            for speed in config.speeds:
                cells.append((method, eta, speed))
    return cells


def episode_rng(master_seed: int, epoch: int) -> np.random.Generator:
    """Per-epoch stream, shared by every cell so epochs are paired."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, epoch]))


def run_cell(scenario: TrackingScenario, config: ExperimentConfig, method: Method,
             eta: float, speed: int) -> list[SlotResult]:
    """All slot results for one table cell: `epochs` independent episodes."""
    tracker_config = TrackerConfig(
        method=method,
        overhead=eta,
        total_slots=config.total_slots,
        warm_start=config.warm_start,
        measure_with_noise=config.measure_with_noise,
        gamma=config.tpe_gamma,
        kde_bandwidth=config.kde_bandwidth,
        length_scale=config.gp_length_scale,
        collect_timing=config.collect_timing,
    )
    results: list[SlotResult] = []
    for epoch in range(config.epochs):
        rng = episode_rng(config.master_seed, epoch)
        results.extend(run_episode(scenario, tracker_config, speed, rng))
    return results


def run_matrix(config: ExperimentConfig) -> dict[tuple[Method, float, int], list[SlotResult]]:
    """Raw slot results for every cell, keyed by (method, overhead, speed)."""
    scenario = scenario_from_config(config)
    return {
        (method, eta, speed): run_cell(scenario, config, method, eta, speed)
        for method, eta, speed in experiment_cells(config)
    }


def rows_from_matrix(config: ExperimentConfig,
                     matrix: dict[tuple[Method, float, int], list[SlotResult]]) -> list[MetricsRow]:
    return [
        compute_metrics(matrix[cell], cell[0].value, cell[2], num_cells=config.grid.num_cells)
        for cell in experiment_cells(config)
    ]


def run_experiment(config: ExperimentConfig) -> list[MetricsRow]:
    """Full benchmark: every cell averaged over `epochs` episodes."""
    return rows_from_matrix(config, run_matrix(config))


def emit_csv(rows: list[MetricsRow], path: str | Path) -> None:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            r.method, _fmt(r.overhead), str(r.speed),
            _fmt(r.accuracy), _fmt(r.rsrp_mae_db), _fmt(r.exec_time_s),
        ]))
    _write_lines(path, lines)


def parse_csv(path: str | Path) -> list[MetricsRow]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: unexpected CSV header")
    rows = []
    for line in lines[1:]:
        method, eta, speed, acc, mae, secs = line.split(",")
        rows.append(MetricsRow(method=method, overhead=float(eta), speed=int(speed),
                               accuracy=float(acc), rsrp_mae_db=float(mae),
                               exec_time_s=float(secs)))
    return rows


def emit_trace(episode: list[SlotResult], path: str | Path,
               grid: GridMap | None = None) -> None:
    """Per-slot path trace: true-best vs. predicted cell and their powers."""
    grid = grid or GridMap()
    lines = [TRACE_HEADER]
    for r in episode:
        true_row, true_col = grid.cell_of(r.true_best_index)
        pred_row, pred_col = grid.cell_of(r.chosen_index)
        lines.append(",".join([
            str(r.slot_index), str(true_row), str(true_col),
            str(pred_row), str(pred_col),
            _fmt(lin_to_db(r.true_best_rsrp)), _fmt(lin_to_db(r.achieved_rsrp)),
        ]))
    _write_lines(path, lines)


def _write_lines(path: str | Path, lines: list[str]) -> None:
    path = Path(path)
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def scenario_from_config(config: ExperimentConfig) -> TrackingScenario:
    codebook = build_codebook(config.scene, config.ris, config.grid,
                              sweep_resolution=config.sweep_resolution)
    return TrackingScenario(scene=config.scene, ris=config.ris, grid=config.grid,
                            codebook=codebook,
                            z=uniform_transmit_signal(config.scene.num_bs_antennas))
