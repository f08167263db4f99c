import math
from dataclasses import replace

import pytest

from conftest import make_panel, make_room
from thzris.config import SimulationConfig
from thzris.drf import (
    OPTIONS,
    apply_strategy,
    evaluate_rx,
    recommend_option,
    run_drf,
    scene_with_config,
    summarize,
    sweep_configs,
    sweep_deltas,
)
from thzris.geometry import Box, Vec3
from thzris.scene import Node, Obstacle, build_grid


def nodes_at(tx, rx):
    return (Node("TX", Vec3(*tx), 20.0, "tx"), Node("RX", Vec3(*rx), 10.0, "rx"))


@pytest.fixture(scope="module")
def fixture_records(fixture_scene, fixture_grid):
    scene, config = fixture_scene
    return {
        rx_id: run_drf(scene, rx_id, fixture_grid, config)
        for rx_id in scene.rx_ids()
    }


def test_no_ris_scene_has_empty_ris_fields():
    scene = make_room()
    grid = build_grid(scene, 0.1, 0.2)
    records = run_drf(scene, "RX", grid)
    assert len(records) == grid.n_free
    for r in records:
        assert r.ris == ()
        assert r.best_ris is None
        assert r.snr_gain_los == ()


def test_ris_near_tx_smoke_path():
    panel = make_panel(m=100, n=100, center=(0.0, 2.5, 1.9))
    scene = make_room(nodes=nodes_at((0.3, 2.5, 1.9), (5.0, 2.5, 1.0)),
                      panels=(panel,))
    grid = build_grid(scene, 0.1, 0.2)
    records = run_drf(scene, "RX", grid)
    reachable = [r for r in records if r.best_ris is not None]
    assert reachable
    for r in reachable:
        link = r.ris[r.best_ris]
        assert math.isfinite(link.pl_db)
        assert r.snr_gain_los[r.best_ris] == pytest.approx(
            r.pl_los_geometric - link.pl_db
        )


def test_records_cover_all_free_cells_in_order(fixture_records, fixture_grid):
    for records in fixture_records.values():
        assert [r.cell_index for r in records] == fixture_grid.free_indices()
        assert len(records) == 727


def test_record_invariants(fixture_records):
    for records in fixture_records.values():
        for r in records:
            assert tuple(sorted(r.nlos_pls)) == r.nlos_pls
            for j, link in enumerate(r.ris):
                if link.reachable:
                    assert r.snr_gain_los[j] == pytest.approx(
                        r.pl_los_geometric - link.pl_db
                    )
                    if r.nlos_pls:
                        assert r.snr_gain_nlos[j] == pytest.approx(
                            r.nlos_pls[0] - link.pl_db
                        )
                else:
                    assert r.snr_gain_los[j] is None
                    assert link.pl_db is None
            if any(link.reachable for link in r.ris):
                best = min(
                    (link.pl_db, j) for j, link in enumerate(r.ris) if link.reachable
                )
                assert r.best_ris == best[1]
            else:
                assert r.best_ris is None


def test_strategy_definitions_per_cell(fixture_records):
    records = fixture_records["RX3"]
    selections = {opt: apply_strategy(records, opt) for opt in OPTIONS}
    for k, r in enumerate(records):
        base = selections["baseline"][k]
        opt1 = selections["opt1"][k]
        opt2 = selections["opt2"][k]
        opt3 = selections["opt3"][k]
        ris_available = r.best_ris is not None
        if r.los_present:
            assert base.branch == "los"
            assert opt2.branch == "los"
            if ris_available:
                assert opt3.branch.startswith("ris:")
        elif r.nlos_pls:
            assert base.branch == "nlos"
        if ris_available:
            assert opt1.branch.startswith("ris:")
            assert opt3.branch.startswith("ris:")
        else:
            assert opt1.branch == base.branch
            assert opt3.branch in ("los", "nlos", "outage")


def test_all_blocked_except_one_nlos_forces_all_options_to_it():
    # Carve a scene where LOS is dead and RIS panels are absent.
    blockers = [
        Obstacle(Box(Vec3(2.4, 2.0, 0.0), Vec3(2.8, 3.0, 2.5)), "plaster", "slab"),
    ]
    scene = make_room(nodes=nodes_at((1.0, 2.5, 1.5), (5.0, 2.5, 1.0)),
                      obstacles=blockers)
    grid = build_grid(scene, 0.1, 0.2)
    records = run_drf(scene, "RX", grid)
    blocked = [r for r in records if not r.los_present and r.nlos_pls]
    assert blocked
    for opt in OPTIONS:
        selections = {s.cell_index: s for s in apply_strategy(records, opt)}
        for r in blocked:
            s = selections[r.cell_index]
            assert s.branch == "nlos"
            assert s.pl_db == pytest.approx(r.nlos_pls[0])


def test_rx2_opt2_degenerates_to_opt3_on_ris_cells(fixture_records):
    records = fixture_records["RX2"]
    assert not any(r.los_present for r in records)  # LOS never available
    opt2 = apply_strategy(records, "opt2")
    opt3 = apply_strategy(records, "opt3")
    for r, s2, s3 in zip(records, opt2, opt3):
        if r.best_ris is not None:
            assert s2.branch == s3.branch
            assert s2.pl_db == s3.pl_db


def test_argmin_invariant_under_constant_shift(fixture_records):
    for records in fixture_records.values():
        for r in records:
            if r.best_ris is None:
                continue
            shifted = [
                (link.pl_db + 7.5, j)
                for j, link in enumerate(r.ris)
                if link.reachable
            ]
            assert min(shifted)[1] == r.best_ris


def test_opt3_never_worse_than_opt1(fixture_records):
    for records in fixture_records.values():
        for s1, s3 in zip(apply_strategy(records, "opt1"),
                          apply_strategy(records, "opt3")):
            if s1.pl_db is not None and s3.pl_db is not None:
                assert s3.pl_db <= s1.pl_db + 1e-12


def test_removing_a_panel_never_improves_mean(fixture_scene, fixture_grid):
    scene, config = fixture_scene
    full = summarize(run_drf(scene, "RX3", fixture_grid, config), "opt3")
    pruned_scene = replace(scene, ris_panels=scene.ris_panels[:2])
    pruned = summarize(run_drf(pruned_scene, "RX3", fixture_grid, config), "opt3")
    assert pruned.mean_pl >= full.mean_pl - 1e-12


def test_summary_fractions_and_weighted_mean(fixture_records):
    for records in fixture_records.values():
        n = len(records)
        for opt in OPTIONS:
            stats = summarize(records, opt)
            total = sum(b.count for b in stats.branches)
            assert total + stats.outage_count == n
            assert sum(b.fraction for b in stats.branches) == pytest.approx(1.0, abs=1e-12)
            weighted = sum(b.fraction * b.mean_pl for b in stats.branches)
            assert weighted == pytest.approx(stats.mean_pl, rel=1e-12)
            for b in stats.branches:
                assert b.std_pl >= 0.0


def test_baseline_self_comparison_is_zero(fixture_records):
    for records in fixture_records.values():
        stats = summarize(records, "baseline")
        assert stats.delta_snr_all == pytest.approx(0.0, abs=1e-12)


def test_all_los_no_ris_gives_zero_delta_and_zero_sigma():
    scene = make_room(nodes=nodes_at((1.0, 2.5, 2.3), (5.0, 2.5, 2.2)))
    grid = build_grid(scene, 0.1, 0.2)
    records = run_drf(scene, "RX", grid)
    assert all(r.los_present for r in records)  # blocker too short to reach
    stats = summarize(records, "opt3")
    assert stats.delta_snr_all == pytest.approx(0.0, abs=1e-12)
    los_branch = stats.branches[0]
    assert los_branch.branch == "los"
    assert los_branch.fraction == 1.0
    assert los_branch.std_pl == 0.0


def test_fixture_rx3_statistics(fixture_records):
    records = fixture_records["RX3"]
    n = len(records)
    los_occ = sum(1 for r in records if r.los_present) / n
    assert los_occ > 0.90
    stats = summarize(records, "opt3")
    assert stats.delta_snr_nlos is not None and stats.delta_snr_nlos > 10.0
    assert stats.improved_fraction == pytest.approx(1.0)


def test_fixture_showcase_cell_two_band_nlos(fixture_records):
    # Frozen fixture cell: LOS blocked, exactly two surviving bounce paths,
    # both inside the 105-110 dB raw-loss band, best RIS >10 dB better.
    record = next(r for r in fixture_records["RX3"] if r.cell_index == 283)
    assert not record.los_present
    assert len(record.nlos_pls) == 2
    assert all(105.0 <= pl <= 110.0 for pl in record.nlos_pls)
    assert record.best_ris is not None
    gain = record.snr_gain_nlos[record.best_ris]
    assert gain > 10.0


def test_fixture_aggregate_improved_fraction(fixture_records):
    improved = 0
    former = 0
    for records in fixture_records.values():
        stats = {opt: summarize(records, opt) for opt in OPTIONS}
        best = recommend_option(stats)
        improved += stats[best].improved_count
        former += stats[best].former_nlos_count
    assert former > 0
    assert improved / former >= 0.99


def test_fixture_recommendation_prefers_ris_strategy(fixture_records):
    for rx_id, records in fixture_records.items():
        stats = {opt: summarize(records, opt) for opt in OPTIONS}
        best = recommend_option(stats)
        assert best in ("opt1", "opt2", "opt3")
        assert stats[best].delta_snr_all >= stats["opt2"].delta_snr_all - 1e-12


def test_threaded_run_matches_serial(fixture_scene, fixture_grid):
    scene, config = fixture_scene
    serial = run_drf(scene, "RX1", fixture_grid, config)
    for workers in (4, 16):
        threaded = run_drf(scene, "RX1", fixture_grid, config, threads=workers)
        assert threaded == serial


def test_evaluate_rx_bundles_stats(fixture_scene, fixture_grid):
    scene, config = fixture_scene
    ev = evaluate_rx(scene, "RX4", fixture_grid, config)
    assert set(ev.stats) == set(OPTIONS)
    assert ev.recommended in OPTIONS
    assert len(ev.records) == 727


def test_scene_with_config_rescales_wavelength_pitch(fixture_scene):
    scene, _ = fixture_scene
    varied = scene_with_config(scene, 700e9, 306, 306)
    assert varied.frequency_hz == 700e9
    lam700 = 299792458.0 / 700e9
    for p in varied.ris_panels:
        assert p.m_columns == p.n_rows == 306
        assert p.d_x == pytest.approx(0.35 * lam700, rel=1e-12)
    # metric pitch stays put when specified in meters
    fixed = replace(scene.ris_panels[0], pitch_wavelengths=None)
    varied2 = scene_with_config(replace(scene, ris_panels=(fixed,)), 700e9, 100, 100)
    assert varied2.ris_panels[0].d_x == pytest.approx(fixed.d_x, rel=1e-12)


def test_sweep_reports_rows_and_deltas(fixture_scene, fixture_grid):
    scene, config = fixture_scene
    rows = sweep_configs(scene, ["RX3"], [(300e9, 200, 200), (300e9, 283, 283)],
                         config, fixture_grid)
    assert len(rows) == 2
    assert all(row.n_former_nlos > 0 for row in rows)
    deltas = sweep_deltas(rows)
    assert len(deltas) == 1
    rx_id, label_b, label_a, delta = deltas[0]
    assert rx_id == "RX3"
    assert delta == pytest.approx(6.02, abs=0.1)
