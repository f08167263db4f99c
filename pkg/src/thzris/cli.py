"""Command-line interface: trace, drf, sweep, attenuation, heatmap.

Every subcommand is deterministic for identical inputs and data files;
``--threads`` only changes wall-clock time, never output bytes. ``--seed``
is accepted for future stochastic extensions and is currently unused.
Exit codes: 0 success, 2 validation failure, 3 physics-coverage or
data-integrity error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from scipy.constants import c as SPEED_OF_LIGHT

from . import __version__
from .atmosphere import (
    AtmosphericConditions,
    fog_attenuation,
    gaseous_components,
    rain_attenuation,
    snow_attenuation,
)
from .config import SimulationConfig
from .drf import OPTIONS, evaluate_scene, sweep_configs, sweep_deltas
from .errors import CoverageError, DataIntegrityError, ValidationError
from .heatmap import METRICS, grid_csv, heatmap_from_report, render_svg
from .raytrace import trace_los, trace_reflections, trace_ris_link
from .scenario import (
    build_report,
    load_report,
    load_scenario,
    records_csv,
    save_report,
    summary_csv,
)
from .scene import build_grid, place_blocker

OPTION_ALIASES = {"baseline": "baseline", "1": "opt1", "2": "opt2", "3": "opt3",
                  "opt1": "opt1", "opt2": "opt2", "opt3": "opt3"}


def _sim_config(args, default: SimulationConfig) -> SimulationConfig:
    return SimulationConfig(
        polarization=args.polarization or default.polarization,
        reflection_order=args.order or default.reflection_order,
        convention=args.convention or default.convention,
        phase_bits=default.phase_bits if args.bits is None else args.bits,
        field_rule=default.field_rule,
    )


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scene", required=True, help="scene JSON file")
    p.add_argument("--polarization", choices=("avg", "te", "tm"))
    p.add_argument("--order", type=int, choices=(1, 2))
    p.add_argument("--convention", choices=("raw", "budget"))
    p.add_argument("--bits", type=int)
    p.add_argument("--seed", type=int, help="reserved; no stochastic stage exists yet")


def cmd_trace(args) -> int:
    scene, default = load_scenario(args.scene)
    config = _sim_config(args, default)
    grid = build_grid(scene, 0.1, 0.2)
    if args.cell is not None:
        scene = place_blocker(scene, grid, args.cell)
    tx = scene.tx()
    rx = scene.rx(args.rx)
    paths = []
    los = trace_los(scene, tx, rx)
    if los:
        paths.append(los)
    paths.extend(
        trace_reflections(scene, tx, rx, max_order=config.reflection_order,
                          polarization=config.polarization)
    )
    for panel in scene.ris_panels:
        entry = trace_ris_link(scene, tx, rx, panel, phase_bits=config.phase_bits,
                               field_rule=config.field_rule)
        if entry:
            paths.append(entry[1])

    if args.format == "json":
        out = [
            {
                "kind": p.kind,
                "vertices": [[v.x, v.y, v.z] for v in p.vertices],
                "total_length_m": p.total_length,
                "delay_s": p.delay_s,
                "pl_raw_db": p.total_pl_raw,
                "pl_budget_db": p.total_pl_budget,
                "loss_breakdown": p.loss_breakdown,
                "surfaces": list(p.surface_ids),
                "incidence_deg": [math.degrees(a) for a in p.incidence_angles],
                "ris": p.ris_id,
                "field_region": p.field_region,
            }
            for p in paths
        ]
        print(json.dumps(out, indent=1))
    else:
        print("kind,via,total_length_m,delay_ns,pl_raw_db,pl_budget_db,aod_deg,aoa_deg")
        for p in paths:
            via = p.ris_id or (":".join(p.surface_ids) if p.surface_ids else "direct")
            aod = p.aod()
            aoa = p.aoa()
            aod_deg = math.degrees(math.atan2(aod.y, aod.x))
            aoa_deg = math.degrees(math.atan2(aoa.y, aoa.x))
            print(
                f"{p.kind},{via},{p.total_length:.6f},{p.delay_s * 1e9:.6f},"
                f"{p.total_pl_raw:.6f},{p.total_pl_budget:.6f},{aod_deg:.3f},{aoa_deg:.3f}"
            )
    return 0


def _print_summary(evaluation, options) -> None:
    print(f"=== {evaluation.rx_id} (recommended: {evaluation.recommended}) ===")
    print("option    branch        Occ.      (mu_PL, sigma_PL) dB")
    for name in options:
        s = evaluation.stats[name]
        for b in s.branches:
            label = {"los": "LOS", "nlos": "NLOS-min"}.get(b.branch, b.branch)
            print(f"{name:<9} {label:<12} {100 * b.fraction:7.2f}%  "
                  f"({b.mean_pl:.2f}, {b.std_pl:.2f})")
        if name != "baseline":
            nlos = "n/a" if s.delta_snr_nlos is None else f"{s.delta_snr_nlos:.2f}"
            frac = ("n/a" if s.improved_fraction is None
                    else f"{s.improved_count}/{s.former_nlos_count}"
                         f" ({100 * s.improved_fraction:.2f}%)")
            print(f"{name:<9} dSNR_all = {s.delta_snr_all:.2f} dB, dSNR_NLOS = {nlos} dB, "
                  f"former-NLOS improved = {frac}, outages = {s.outage_count}")
    print()


def cmd_drf(args) -> int:
    scene, default = load_scenario(args.scene)
    config = _sim_config(args, default)
    grid = build_grid(scene, 0.1, 0.2)
    rx_ids = None if args.rx in (None, "all") else [args.rx]
    report = evaluate_scene(scene, rx_ids, grid, config, threads=args.threads)
    doc = build_report(scene, grid, config, report)

    options = list(OPTIONS) if args.option in (None, "all") else \
        ["baseline", OPTION_ALIASES[args.option]]
    for evaluation in report.evaluations:
        _print_summary(evaluation, options)

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_bytes(save_report(doc, "json"))
        for evaluation in report.evaluations:
            (out / f"cells_{evaluation.rx_id}.csv").write_text(
                records_csv(doc, evaluation.rx_id)
            )
        (out / "summary.csv").write_text(summary_csv(doc))
        print(f"wrote {out / 'report.json'}, per-cell CSVs and {out / 'summary.csv'}")
    return 0


def _parse_configs(spec: str) -> list[tuple[float, int, int]]:
    configs = []
    for token in spec.split(","):
        token = token.strip()
        try:
            f_part, mn = token.split(":")
            m, n = mn.lower().split("x")
            configs.append((float(f_part) * 1e9, int(m), int(n)))
        except Exception as exc:
            raise ValidationError(
                f"bad config token {token!r}; expected <f_ghz>:<M>x<N>") from exc
    return configs


def cmd_sweep(args) -> int:
    scene, default = load_scenario(args.scene)
    config = _sim_config(args, default)
    grid = build_grid(scene, 0.1, 0.2)
    rx_ids = None if args.rx in (None, "all") else [args.rx]
    rows = sweep_configs(scene, rx_ids, _parse_configs(args.configs), config, grid)
    lines = ["rx,f_ghz,m,n,mean_improvement_db,n_former_nlos"]
    for r in rows:
        imp = "" if r.mean_improvement_db is None else f"{r.mean_improvement_db:.6f}"
        lines.append(f"{r.rx_id},{r.f_hz / 1e9:g},{r.m_columns},{r.n_rows},"
                     f"{imp},{r.n_former_nlos}")
    lines.append("")
    lines.append("rx,config_a,config_b,delta_db (a - b)")
    for rx_id, a, b, delta in sweep_deltas(rows):
        lines.append(f"{rx_id},{a},{b},{delta:.6f}")
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(text)
    return 0


def cmd_attenuation(args) -> int:
    cond = AtmosphericConditions(
        temperature_k=args.temperature_k,
        pressure_kpa=args.pressure_kpa,
        relative_humidity=None if args.humidity_percent is None
        else args.humidity_percent / 100.0,
        water_vapor_density_g_m3=args.vapor_density,
    )
    f_hz = args.f_ghz * 1e9
    gamma_o, gamma_w = gaseous_components(f_hz, cond)
    header = "f_GHz,gamma_o,gamma_w,gamma_total"
    row = f"{args.f_ghz:g},{gamma_o:.6f},{gamma_w:.6f},{gamma_o + gamma_w:.6f}"
    if args.rain_mm_h or args.fog_g_m3 or args.snow_mm_h:
        extras = {
            "gamma_rain": rain_attenuation(f_hz, args.rain_mm_h or 0.0,
                                           polarization=args.rain_polarization),
            "gamma_fog": fog_attenuation(f_hz, cond.temperature_k, args.fog_g_m3 or 0.0),
            "gamma_snow": snow_attenuation(SPEED_OF_LIGHT / f_hz * 100.0,
                                           args.snow_mm_h or 0.0),
        }
        header += "," + ",".join(extras)
        row += "," + ",".join(f"{v:.6f}" for v in extras.values())
    print(header)
    print(row)
    return 0


def cmd_heatmap(args) -> int:
    doc = load_report(Path(args.report).read_bytes())
    rx_id = args.rx or doc.report.evaluations[0].rx_id
    data = heatmap_from_report(doc, rx_id, args.metric)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    svg_path = out / f"heatmap_{rx_id}_{args.metric}.svg"
    csv_path = out / f"heatmap_{rx_id}_{args.metric}.csv"
    svg_path.write_text(render_svg(data))
    csv_path.write_text(grid_csv(data))
    print(f"wrote {svg_path} and {csv_path} "
          f"(range {data.vmin:.2f} .. {data.vmax:.2f} dB)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thzris",
        description="Indoor THz propagation simulator with distributed RIS selection",
    )
    parser.add_argument("--version", action="version", version=f"thzris {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="list propagation paths for one blocker cell")
    _add_common(p)
    p.add_argument("--rx", required=True)
    p.add_argument("--cell", type=int, help="blocker cell index (omit for no blocker)")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("drf", help="run the full blockage sweep and selection")
    _add_common(p)
    p.add_argument("--rx", help="receiver id or 'all' (default all)")
    p.add_argument("--option", choices=tuple(OPTION_ALIASES) + ("all",),
                   help="strategy to print (default all)")
    p.add_argument("--threads", type=int, help="worker threads (default: serial)")
    p.add_argument("--out", help="output directory for report files")
    p.set_defaults(func=cmd_drf)

    p = sub.add_parser("sweep", help="compare frequency / panel-size configurations")
    _add_common(p)
    p.add_argument("--rx", help="receiver id or 'all' (default all)")
    p.add_argument("--configs", required=True,
                   help="comma list of <f_ghz>:<M>x<N>, e.g. 300:200x200,300:283x283")
    p.add_argument("--out", help="output directory for sweep.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("attenuation", help="print specific attenuation components")
    p.add_argument("--f-ghz", type=float, required=True)
    p.add_argument("--temperature-k", type=float, default=293.15)
    p.add_argument("--pressure-kpa", type=float, default=101.325)
    p.add_argument("--humidity-percent", type=float)
    p.add_argument("--vapor-density", type=float, help="water vapour density, g/m^3")
    p.add_argument("--rain-mm-h", type=float)
    p.add_argument("--rain-polarization", choices=("h", "v"), default="h")
    p.add_argument("--fog-g-m3", type=float)
    p.add_argument("--snow-mm-h", type=float)
    p.set_defaults(func=cmd_attenuation)

    p = sub.add_parser("heatmap", help="render per-cell metric as SVG + CSV grid")
    p.add_argument("--report", required=True, help="report.json from the drf command")
    p.add_argument("--rx")
    p.add_argument("--metric", choices=METRICS, default="opt3")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_heatmap)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {json.dumps(exc.as_dict())}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CoverageError, DataIntegrityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
