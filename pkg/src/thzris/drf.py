"""Ray searching and beam selecting across all human blockage positions.

For every free grid cell the blocker is placed, the natural links (LOS and
one-bounce reflections) and every RIS relay are evaluated, SNR-gain matrices
are filled, and the best panel per cell is selected. Strategy statistics
mirror the per-branch occurrence / mean / deviation layout used for link
selection studies.

Because the blocker only occludes and never reflects, all candidate paths
and RIS sums are computed once per receiver; the per-cell work is pure
occlusion testing. Cells are independent, so a worker pool changes nothing
but wall-clock time.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from statistics import fmean, pstdev

from .config import SimulationConfig
from .errors import ValidationError
from .geometry import segment_hits_box
from .raytrace import PropagationPath, trace_los, trace_reflections, trace_ris_link
from .ris import RisPanel, panel_frame
from .scene import BlockageGrid, Scene, blocker_box_at
from .atmosphere import gaseous_attenuation, path_attenuation
from .propagation import friis_path_loss

BASELINE = "baseline"
OPTIONS = ("baseline", "opt1", "opt2", "opt3")


@dataclass(frozen=True)
class RisLinkRecord:
    """State of one panel for one blockage position."""

    panel_id: str
    reachable: bool
    field_region: str | None
    pl_db: float | None


@dataclass(frozen=True)
class HbpRecord:
    """Everything recorded for one human blockage position."""

    cell_index: int
    cell_center: tuple[float, float]
    los_present: bool
    pl_los_geometric: float
    nlos_pls: tuple[float, ...]
    ris: tuple[RisLinkRecord, ...]
    snr_gain_los: tuple[float | None, ...]
    snr_gain_nlos: tuple[float | None, ...]
    best_ris: int | None

    @property
    def min_nlos(self) -> float | None:
        return self.nlos_pls[0] if self.nlos_pls else None


@dataclass(frozen=True)
class Selection:
    """Branch chosen by a strategy for one cell."""

    cell_index: int
    branch: str  # "los" | "ris:<panel>" | "nlos" | "outage"
    pl_db: float | None


@dataclass(frozen=True)
class BranchStats:
    branch: str
    count: int
    fraction: float
    mean_pl: float
    std_pl: float


@dataclass(frozen=True)
class StrategyStats:
    option: str
    branches: tuple[BranchStats, ...]
    delta_snr_all: float
    delta_snr_nlos: float | None
    improved_fraction: float | None
    improved_count: int
    former_nlos_count: int
    outage_count: int
    mean_pl: float


@dataclass(frozen=True)
class RxEvaluation:
    rx_id: str
    records: tuple[HbpRecord, ...]
    stats: dict[str, StrategyStats]
    recommended: str


@dataclass(frozen=True)
class DrfReport:
    frequency_hz: float
    convention: str
    n_free_cells: int
    evaluations: tuple[RxEvaluation, ...]


def _path_pl(path: PropagationPath, convention: str) -> float:
    return path.total_pl_raw if convention == "raw" else path.total_pl_budget


def run_drf(
    scene: Scene,
    rx_id: str,
    grid: BlockageGrid,
    config: SimulationConfig | None = None,
    threads: int | None = None,
) -> list[HbpRecord]:
    """Evaluate every free cell for one receiver, ordered by cell index."""
    config = config or SimulationConfig()
    tx = scene.tx()
    rx = scene.rx(rx_id)
    base = replace(scene, blocker_box=None)

    # Static candidates: the blocker only ever removes, never adds, paths.
    los_static = trace_los(base, tx, rx)
    refl_static = trace_reflections(
        base, tx, rx, max_order=config.reflection_order, polarization=config.polarization
    )
    ris_static = [
        trace_ris_link(base, tx, rx, panel, phase_bits=config.phase_bits,
                       field_rule=config.field_rule)
        for panel in scene.ris_panels
    ]

    # Geometric LOS loss: recorded even when the direct ray is obstructed so
    # the gain over direct propagation stays defined for every cell.
    d_los = tx.position.distance_to(rx.position)
    gamma = gaseous_attenuation(scene.frequency_hz, scene.atmosphere)
    pl_geo_raw = friis_path_loss(d_los, scene.wavelength_m) + path_attenuation(gamma, d_los)
    pl_geo = pl_geo_raw if config.convention == "raw" else (
        pl_geo_raw - tx.antenna_gain_db - rx.antenna_gain_db
    )

    ris_pl = [
        None if entry is None else _path_pl(entry[1], config.convention)
        for entry in ris_static
    ]
    ris_region = [None if entry is None else entry[1].field_region for entry in ris_static]

    free_cells = grid.free_indices()

    def eval_cell(i: int) -> HbpRecord:
        cx, cy = grid.cell_center(i)
        box = blocker_box_at(scene, cx, cy)

        def clear(a, b) -> bool:
            return not segment_hits_box(a, b, box)

        los_present = los_static is not None and clear(tx.position, rx.position)

        nlos = []
        for path in refl_static:
            vs = path.vertices
            if all(clear(vs[k], vs[k + 1]) for k in range(len(vs) - 1)):
                nlos.append(_path_pl(path, config.convention))
        nlos.sort()

        ris_records = []
        gains_los = []
        gains_nlos = []
        best_j = None
        best_pl = math.inf
        for j, panel in enumerate(scene.ris_panels):
            entry = ris_static[j]
            reachable = (
                entry is not None
                and clear(tx.position, panel.center)
                and clear(panel.center, rx.position)
            )
            pl = ris_pl[j] if reachable else None
            ris_records.append(
                RisLinkRecord(
                    panel_id=panel.id,
                    reachable=reachable,
                    field_region=ris_region[j] if reachable else None,
                    pl_db=pl,
                )
            )
            gains_los.append(pl_geo - pl if pl is not None else None)
            gains_nlos.append(nlos[0] - pl if (pl is not None and nlos) else None)
            if pl is not None and pl < best_pl:
                best_pl, best_j = pl, j

        return HbpRecord(
            cell_index=i,
            cell_center=(cx, cy),
            los_present=los_present,
            pl_los_geometric=pl_geo,
            nlos_pls=tuple(nlos),
            ris=tuple(ris_records),
            snr_gain_los=tuple(gains_los),
            snr_gain_nlos=tuple(gains_nlos),
            best_ris=best_j,
        )

    if threads is None or threads <= 1:
        return [eval_cell(i) for i in free_cells]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(eval_cell, free_cells))


def apply_strategy(records: list[HbpRecord], option: str) -> list[Selection]:
    """Per-cell branch selection.

    baseline: LOS, else best NLOS, else outage.
    opt1: best reachable RIS, else the baseline branch.
    opt2: LOS, else best RIS, else best NLOS, else outage.
    opt3: best RIS, else LOS, else best NLOS, else outage.
    """
    if option not in OPTIONS:
        raise ValueError(f"unknown option {option!r}")
    out = []
    for r in records:
        los = ("los", r.pl_los_geometric) if r.los_present else None
        nlos = ("nlos", r.min_nlos) if r.nlos_pls else None
        ris = None
        if r.best_ris is not None:
            link = r.ris[r.best_ris]
            ris = (f"ris:{link.panel_id}", link.pl_db)

        if option == "baseline":
            pick = los or nlos
        elif option == "opt1":
            pick = ris or los or nlos
        elif option == "opt2":
            pick = los or ris or nlos
        else:  # opt3
            pick = ris or los or nlos

        if pick is None:
            out.append(Selection(r.cell_index, "outage", None))
        else:
            out.append(Selection(r.cell_index, pick[0], pick[1]))
    return out


def summarize(records: list[HbpRecord], option: str) -> StrategyStats:
    """Occurrence-weighted per-branch statistics plus SNR improvements."""
    base_sel = apply_strategy(records, BASELINE)
    opt_sel = base_sel if option == BASELINE else apply_strategy(records, option)

    active = [(b, o) for b, o in zip(base_sel, opt_sel)
              if b.branch != "outage" and o.branch != "outage"]
    outage_count = sum(1 for o in opt_sel if o.branch == "outage")

    keys: list[str] = []
    for o in opt_sel:
        if o.branch != "outage" and o.branch not in keys:
            keys.append(o.branch)
    non_outage = [o for o in opt_sel if o.branch != "outage"]
    branches = []
    for key in keys:
        pls = [o.pl_db for o in non_outage if o.branch == key]
        branches.append(
            BranchStats(
                branch=key,
                count=len(pls),
                fraction=len(pls) / len(non_outage),
                mean_pl=fmean(pls),
                std_pl=pstdev(pls),
            )
        )

    mean_base = fmean([b.pl_db for b, _ in active]) if active else math.nan
    mean_opt = fmean([o.pl_db for _, o in active]) if active else math.nan
    delta_all = mean_base - mean_opt

    former_nlos = [(b, o) for b, o in zip(base_sel, opt_sel) if b.branch == "nlos"]
    ris_cases = [(b, o) for b, o in former_nlos if o.branch.startswith("ris:")]
    delta_nlos = (
        fmean([b.pl_db for b, _ in ris_cases]) - fmean([o.pl_db for _, o in ris_cases])
        if ris_cases
        else None
    )
    improved = sum(
        1 for b, o in former_nlos if o.pl_db is not None and o.pl_db < b.pl_db
    )
    improved_fraction = improved / len(former_nlos) if former_nlos else None

    return StrategyStats(
        option=option,
        branches=tuple(branches),
        delta_snr_all=delta_all,
        delta_snr_nlos=delta_nlos,
        improved_fraction=improved_fraction,
        improved_count=improved,
        former_nlos_count=len(former_nlos),
        outage_count=outage_count,
        mean_pl=mean_opt,
    )


def recommend_option(stats: dict[str, StrategyStats]) -> str:
    """Best non-baseline option: max delta_snr_all, delta_snr_nlos tiebreak."""
    candidates = [s for name, s in stats.items() if name != BASELINE]

    def rank(s: StrategyStats):
        tiebreak = s.delta_snr_nlos if s.delta_snr_nlos is not None else -math.inf
        return (s.delta_snr_all, tiebreak)

    return max(candidates, key=rank).option


def evaluate_rx(
    scene: Scene,
    rx_id: str,
    grid: BlockageGrid,
    config: SimulationConfig | None = None,
    threads: int | None = None,
) -> RxEvaluation:
    records = run_drf(scene, rx_id, grid, config, threads)
    stats = {option: summarize(records, option) for option in OPTIONS}
    return RxEvaluation(
        rx_id=rx_id,
        records=tuple(records),
        stats=stats,
        recommended=recommend_option(stats),
    )


def evaluate_scene(
    scene: Scene,
    rx_ids: list[str] | None = None,
    grid: BlockageGrid | None = None,
    config: SimulationConfig | None = None,
    threads: int | None = None,
    cell_dx: float = 0.1,
    cell_dy: float = 0.2,
) -> DrfReport:
    from .scene import build_grid

    config = config or SimulationConfig()
    grid = grid or build_grid(scene, cell_dx, cell_dy)
    rx_ids = rx_ids or scene.rx_ids()
    evaluations = tuple(
        evaluate_rx(scene, rx_id, grid, config, threads) for rx_id in rx_ids
    )
    return DrfReport(
        frequency_hz=scene.frequency_hz,
        convention=config.convention,
        n_free_cells=grid.n_free,
        evaluations=evaluations,
    )


def scene_with_config(scene: Scene, f_hz: float, m_columns: int, n_rows: int) -> Scene:
    """Scene copy at another carrier / panel dimension.

    Panels whose pitch was specified in wavelengths are re-resolved at the
    new carrier; metric pitches stay fixed.
    """
    from scipy.constants import c

    wavelength = c / f_hz
    panels = []
    for p in scene.ris_panels:
        if p.pitch_wavelengths is not None:
            d_x = p.pitch_wavelengths[0] * wavelength
            d_y = p.pitch_wavelengths[1] * wavelength
        else:
            d_x, d_y = p.d_x, p.d_y
        panels.append(
            replace(p, m_columns=m_columns, n_rows=n_rows, d_x=d_x, d_y=d_y)
        )
    return replace(scene, frequency_hz=f_hz, ris_panels=tuple(panels))


@dataclass(frozen=True)
class SweepRow:
    rx_id: str
    f_hz: float
    m_columns: int
    n_rows: int
    mean_improvement_db: float | None
    n_former_nlos: int


def sweep_configs(
    scene: Scene,
    rx_ids: list[str] | None = None,
    configs: list[tuple[float, int, int]] | None = None,
    config: SimulationConfig | None = None,
    grid: BlockageGrid | None = None,
) -> list[SweepRow]:
    """Mean RIS-over-NLOS improvement per receiver per (f, M, N) setting."""
    from .scene import build_grid

    if not configs:
        raise ValidationError("sweep requires at least one (f, M, N) configuration")
    config = config or SimulationConfig()
    grid = grid or build_grid(scene, 0.1, 0.2)
    rx_ids = rx_ids or scene.rx_ids()
    rows = []
    for f_hz, m, n in configs:
        varied = scene_with_config(scene, f_hz, m, n)
        for rx_id in rx_ids:
            records = run_drf(varied, rx_id, grid, config)
            stats = summarize(records, "opt3")
            rows.append(
                SweepRow(
                    rx_id=rx_id,
                    f_hz=f_hz,
                    m_columns=m,
                    n_rows=n,
                    mean_improvement_db=stats.delta_snr_nlos,
                    n_former_nlos=stats.former_nlos_count,
                )
            )
    return rows


def sweep_deltas(rows: list[SweepRow]) -> list[tuple[str, str, str, float]]:
    """All pairwise per-receiver differences of the mean improvement."""
    by_rx: dict[str, list[SweepRow]] = {}
    for row in rows:
        by_rx.setdefault(row.rx_id, []).append(row)
    out = []
    for rx_id, entries in by_rx.items():
        for i, a in enumerate(entries):
            for b in entries[i + 1:]:
                if a.mean_improvement_db is None or b.mean_improvement_db is None:
                    continue
                label_a = f"{a.f_hz / 1e9:g}GHz,{a.m_columns}x{a.n_rows}"
                label_b = f"{b.f_hz / 1e9:g}GHz,{b.m_columns}x{b.n_rows}"
                out.append((rx_id, label_b, label_a,
                            b.mean_improvement_db - a.mean_improvement_db))
    return out
