"""Scenario/report file formats.

Scene files are JSON documents with schema tag ``thz-scene/1``; lengths are
meters, frequencies GHz, gains dB. Unknown fields are rejected so typos
cannot silently change the physics. Units are converted to SI once, at this
boundary. Reports are self-describing JSON (or CSV) carrying the tool
version, a content digest of the scene, and a config echo.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass

from . import __version__
from .atmosphere import AtmosphericConditions
from .config import SimulationConfig
from .drf import (
    BranchStats,
    DrfReport,
    HbpRecord,
    RisLinkRecord,
    RxEvaluation,
    StrategyStats,
)
from .errors import ValidationError
from .geometry import Box, Rect3, Vec3
from .propagation import Material, material_from_dict, material_library
from .ris import RisPanel, panel_frame
from .scene import (
    BlockageGrid,
    HumanBlocker,
    Node,
    Obstacle,
    Scene,
    Surface,
    room_shell_surfaces,
)

SCHEMA_V1 = "thz-scene/1"


def _check_keys(obj: dict, allowed: set[str], required: set[str], path: str) -> None:
    if not isinstance(obj, dict):
        raise ValidationError(f"expected an object at {path}", path=path)
    unknown = set(obj) - allowed
    if unknown:
        raise ValidationError(
            f"unknown field(s) {sorted(unknown)} at {path}", path=f"{path}.{sorted(unknown)[0]}"
        )
    missing = required - set(obj)
    if missing:
        raise ValidationError(
            f"missing required field(s) {sorted(missing)} at {path}", path=f"{path}.{sorted(missing)[0]}"
        )


def _number(obj, path: str, positive: bool = False) -> float:
    if not isinstance(obj, (int, float)) or isinstance(obj, bool) or not math.isfinite(obj):
        raise ValidationError(f"expected a finite number at {path}", path=path)
    if positive and obj <= 0:
        raise ValidationError(f"expected a positive number at {path}", path=path)
    return float(obj)


def _vec(obj, path: str) -> Vec3:
    if not isinstance(obj, list) or len(obj) != 3:
        raise ValidationError(f"expected [x, y, z] at {path}", path=path)
    return Vec3(*(_number(v, f"{path}[{i}]") for i, v in enumerate(obj)))


def _parse_materials(entries, path: str) -> dict[str, Material]:
    if not isinstance(entries, list) or not entries:
        raise ValidationError(f"expected a non-empty material list at {path}", path=path)
    library = None
    out: dict[str, Material] = {}
    for i, entry in enumerate(entries):
        p = f"{path}[{i}]"
        _check_keys(entry, {"id", "library", "points", "roughness_m"}, {"id"}, p)
        mat_id = entry["id"]
        if not isinstance(mat_id, str) or not mat_id:
            raise ValidationError(f"material id must be a non-empty string at {p}.id", path=f"{p}.id")
        if mat_id in out:
            raise ValidationError(f"duplicate material id {mat_id!r}", path=f"{p}.id")
        if "library" in entry:
            if library is None:
                library = material_library()
            name = entry["library"]
            if name not in library:
                raise ValidationError(
                    f"unknown library material {name!r} at {p}.library",
                    kind="reference",
                    path=f"{p}.library",
                )
            base = library[name]
            rough = entry.get("roughness_m")
            if rough is not None:
                base = Material(base.name, base.points, _number(rough, f"{p}.roughness_m"), base.source)
            out[mat_id] = base
        elif "points" in entry:
            pts = entry["points"]
            if not isinstance(pts, list) or not pts:
                raise ValidationError(f"expected measurement rows at {p}.points", path=f"{p}.points")
            for j, row in enumerate(pts):
                if not isinstance(row, list) or len(row) != 3:
                    raise ValidationError(
                        f"expected [f_ghz, n_t, alpha_per_m] at {p}.points[{j}]",
                        path=f"{p}.points[{j}]",
                    )
            out[mat_id] = material_from_dict(
                {
                    "name": mat_id,
                    "points": pts,
                    "roughness_m": entry.get("roughness_m", 0.0),
                }
            )
        else:
            raise ValidationError(
                f"material {mat_id!r} needs either 'library' or 'points'", path=p
            )
    return out


def _parse_ris(entries, path: str, wavelength_m: float) -> tuple[RisPanel, ...]:
    panels = []
    for i, entry in enumerate(entries):
        p = f"{path}[{i}]"
        _check_keys(
            entry,
            {"id", "center_m", "normal", "up", "columns", "rows", "pitch_m",
             "pitch_wavelengths", "amplitude", "phase_bits"},
            {"id", "center_m", "normal", "columns", "rows"},
            p,
        )
        center = _vec(entry["center_m"], f"{p}.center_m")
        normal, axis_u, axis_v = panel_frame(
            _vec(entry["normal"], f"{p}.normal"),
            _vec(entry["up"], f"{p}.up") if "up" in entry else Vec3(0.0, 0.0, 1.0),
        )
        cols = entry["columns"]
        rows = entry["rows"]
        for name, val in (("columns", cols), ("rows", rows)):
            if not isinstance(val, int) or isinstance(val, bool) or val < 1:
                raise ValidationError(f"expected a positive integer at {p}.{name}", path=f"{p}.{name}")
        pw = None
        if "pitch_wavelengths" in entry and "pitch_m" in entry:
            raise ValidationError(
                f"give either pitch_m or pitch_wavelengths at {p}", path=f"{p}.pitch_m"
            )
        if "pitch_m" in entry:
            d_x = _number(entry["pitch_m"][0], f"{p}.pitch_m[0]", positive=True)
            d_y = _number(entry["pitch_m"][1], f"{p}.pitch_m[1]", positive=True)
        else:
            raw = entry.get("pitch_wavelengths", [0.35, 0.35])
            pw = (
                _number(raw[0], f"{p}.pitch_wavelengths[0]", positive=True),
                _number(raw[1], f"{p}.pitch_wavelengths[1]", positive=True),
            )
            d_x, d_y = pw[0] * wavelength_m, pw[1] * wavelength_m
        amplitude = entry.get("amplitude", 1.0)
        bits = entry.get("phase_bits", 0)
        if not isinstance(bits, int) or isinstance(bits, bool) or bits < 0:
            raise ValidationError(f"expected a non-negative integer at {p}.phase_bits",
                                  path=f"{p}.phase_bits")
        try:
            panels.append(
                RisPanel(
                    id=entry["id"],
                    center=center,
                    normal=normal,
                    axis_u=axis_u,
                    axis_v=axis_v,
                    m_columns=cols,
                    n_rows=rows,
                    d_x=d_x,
                    d_y=d_y,
                    amplitude=_number(amplitude, f"{p}.amplitude"),
                    phase_bits=bits,
                    pitch_wavelengths=pw,
                )
            )
        except ValidationError as exc:
            raise ValidationError(str(exc), path=p) from exc
    return tuple(panels)


def load_scenario(path: str) -> tuple[Scene, SimulationConfig]:
    """Parse, validate and resolve a scene file into an immutable Scene."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ValidationError(f"scene file not found: {path}", kind="parse") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"JSON parse error: {exc.msg}", kind="parse", line=exc.lineno, col=exc.colno
        ) from exc
    return scenario_from_dict(doc)


def scenario_from_dict(doc: dict) -> tuple[Scene, SimulationConfig]:
    _check_keys(
        doc,
        {"schema", "room", "frequency_ghz", "atmosphere", "materials", "surfaces",
         "obstacles", "blocker", "nodes", "ris", "simulation"},
        {"schema", "room", "frequency_ghz", "atmosphere", "materials", "nodes"},
        "$",
    )
    if doc["schema"] != SCHEMA_V1:
        raise ValidationError(
            f"unsupported schema {doc['schema']!r} (supported: {SCHEMA_V1})", path="$.schema"
        )

    _check_keys(doc["room"], {"size_m"}, {"size_m"}, "$.room")
    room = _vec(doc["room"]["size_m"], "$.room.size_m")

    f_hz = _number(doc["frequency_ghz"], "$.frequency_ghz", positive=True) * 1e9
    from scipy.constants import c

    wavelength = c / f_hz

    atm = doc["atmosphere"]
    _check_keys(
        atm,
        {"temperature_k", "pressure_kpa", "relative_humidity_percent", "water_vapor_density_g_m3"},
        {"temperature_k", "pressure_kpa"},
        "$.atmosphere",
    )
    rh = atm.get("relative_humidity_percent")
    try:
        atmosphere = AtmosphericConditions(
            temperature_k=_number(atm["temperature_k"], "$.atmosphere.temperature_k", positive=True),
            pressure_kpa=_number(atm["pressure_kpa"], "$.atmosphere.pressure_kpa", positive=True),
            relative_humidity=None if rh is None else _number(rh, "$.atmosphere.relative_humidity_percent") / 100.0,
            water_vapor_density_g_m3=atm.get("water_vapor_density_g_m3"),
        )
    except ValueError as exc:
        raise ValidationError(str(exc), path="$.atmosphere") from exc

    materials = _parse_materials(doc["materials"], "$.materials")

    surf_spec = doc.get("surfaces", {})
    _check_keys(surf_spec, {"shell_material", "extra"}, {"shell_material"}, "$.surfaces")
    shell_mat = surf_spec["shell_material"]
    if shell_mat not in materials:
        raise ValidationError(
            f"shell material {shell_mat!r} is not defined", kind="reference",
            path="$.surfaces.shell_material",
        )
    surfaces = list(room_shell_surfaces(room, shell_mat))
    for i, entry in enumerate(surf_spec.get("extra", [])):
        p = f"$.surfaces.extra[{i}]"
        _check_keys(
            entry,
            {"id", "origin_m", "edge_u_m", "edge_v_m", "material", "kind", "reflective"},
            {"id", "origin_m", "edge_u_m", "edge_v_m", "material"},
            p,
        )
        if entry["material"] not in materials:
            raise ValidationError(
                f"surface {entry['id']!r} references unknown material {entry['material']!r}",
                kind="reference", path=f"{p}.material",
            )
        surfaces.append(
            Surface(
                id=entry["id"],
                rect=Rect3(
                    _vec(entry["origin_m"], f"{p}.origin_m"),
                    _vec(entry["edge_u_m"], f"{p}.edge_u_m"),
                    _vec(entry["edge_v_m"], f"{p}.edge_v_m"),
                ),
                material_id=entry["material"],
                kind=entry.get("kind", "furniture"),
                reflective=bool(entry.get("reflective", True)),
            )
        )

    obstacles = []
    for i, entry in enumerate(doc.get("obstacles", [])):
        p = f"$.obstacles[{i}]"
        _check_keys(entry, {"label", "min_m", "max_m", "material", "penetration_loss_db"},
                    {"label", "min_m", "max_m", "material"}, p)
        if entry["material"] not in materials:
            raise ValidationError(
                f"obstacle {entry['label']!r} references unknown material {entry['material']!r}",
                kind="reference", path=f"{p}.material",
            )
        lo = _vec(entry["min_m"], f"{p}.min_m")
        hi = _vec(entry["max_m"], f"{p}.max_m")
        if not (lo.x < hi.x and lo.y < hi.y and lo.z < hi.z):
            raise ValidationError(f"box min must be below max at {p}", path=f"{p}.min_m")
        obstacles.append(
            Obstacle(
                box=Box(lo, hi),
                material_id=entry["material"],
                label=entry["label"],
                penetration_loss_db=entry.get("penetration_loss_db", math.inf),
            )
        )

    blk = doc.get("blocker", {})
    _check_keys(blk, {"width_m", "depth_m", "height_m"}, set(), "$.blocker")
    blocker = HumanBlocker(
        width_m=blk.get("width_m", 0.4),
        depth_m=blk.get("depth_m", 0.2),
        height_m=blk.get("height_m", 1.7),
    )

    nodes = []
    for i, entry in enumerate(doc["nodes"]):
        p = f"$.nodes[{i}]"
        _check_keys(entry, {"id", "role", "position_m", "gain_db"},
                    {"id", "role", "position_m", "gain_db"}, p)
        nodes.append(
            Node(
                id=entry["id"],
                position=_vec(entry["position_m"], f"{p}.position_m"),
                antenna_gain_db=_number(entry["gain_db"], f"{p}.gain_db"),
                role=entry["role"],
            )
        )

    panels = _parse_ris(doc.get("ris", []), "$.ris", wavelength)

    sim = doc.get("simulation", {})
    _check_keys(
        sim,
        {"polarization", "reflection_order", "convention", "phase_bits", "field_rule"},
        set(),
        "$.simulation",
    )
    try:
        config = SimulationConfig(
            polarization=sim.get("polarization", "avg"),
            reflection_order=sim.get("reflection_order", 1),
            convention=sim.get("convention", "raw"),
            phase_bits=sim.get("phase_bits", 0),
            field_rule=sim.get("field_rule", "either"),
        )
        scene = Scene(
            room=room,
            surfaces=tuple(surfaces),
            obstacles=tuple(obstacles),
            blocker=blocker,
            nodes=tuple(nodes),
            ris_panels=panels,
            atmosphere=atmosphere,
            frequency_hz=f_hz,
            materials=materials,
        )
    except ValueError as exc:
        raise ValidationError(str(exc), path="$.simulation") from exc
    return scene, config


def canonical_scene_dict(scene: Scene) -> dict:
    """Physical content of a scene in canonical (unit-normalized) form."""
    return {
        "room": [scene.room.x, scene.room.y, scene.room.z],
        "frequency_hz": scene.frequency_hz,
        "atmosphere": {
            "temperature_k": scene.atmosphere.temperature_k,
            "pressure_kpa": scene.atmosphere.pressure_kpa,
            "vapor_pressure_hpa": scene.atmosphere.vapor_pressure_hpa,
        },
        "materials": {
            mid: {"points": list(map(list, m.points)), "roughness_m": m.roughness_m}
            for mid, m in sorted(scene.materials.items())
        },
        "surfaces": [
            {
                "id": s.id,
                "origin": list(s.rect.origin.as_array()),
                "edge_u": list(s.rect.edge_u.as_array()),
                "edge_v": list(s.rect.edge_v.as_array()),
                "material": s.material_id,
                "kind": s.kind,
                "reflective": s.reflective,
            }
            for s in scene.surfaces
        ],
        "obstacles": [
            {
                "label": o.label,
                "min": list(o.box.min.as_array()),
                "max": list(o.box.max.as_array()),
                "material": o.material_id,
                "penetration_loss_db": None if math.isinf(o.penetration_loss_db)
                else o.penetration_loss_db,
            }
            for o in scene.obstacles
        ],
        "blocker": [scene.blocker.width_m, scene.blocker.depth_m, scene.blocker.height_m],
        "nodes": [
            {"id": n.id, "role": n.role, "position": list(n.position.as_array()),
             "gain_db": n.antenna_gain_db}
            for n in scene.nodes
        ],
        "ris": [
            {
                "id": p.id,
                "center": list(p.center.as_array()),
                "normal": list(p.normal.as_array()),
                "axis_u": list(p.axis_u.as_array()),
                "axis_v": list(p.axis_v.as_array()),
                "columns": p.m_columns,
                "rows": p.n_rows,
                "d_x": p.d_x,
                "d_y": p.d_y,
                "amplitude": p.amplitude,
                "phase_bits": p.phase_bits,
            }
            for p in scene.ris_panels
        ],
    }


def scene_digest(scene: Scene) -> str:
    blob = json.dumps(canonical_scene_dict(scene), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ReportDocument:
    """Self-describing result container."""

    tool_version: str
    scene_digest: str
    config: SimulationConfig
    grid: dict
    report: DrfReport


def build_report(scene: Scene, grid: BlockageGrid, config: SimulationConfig,
                 report: DrfReport) -> ReportDocument:
    return ReportDocument(
        tool_version=__version__,
        scene_digest=scene_digest(scene),
        config=config,
        grid={
            "nx": grid.nx,
            "ny": grid.ny,
            "cell_dx": grid.cell_dx,
            "cell_dy": grid.cell_dy,
            "occupied": [i for i, occ in enumerate(grid.occupied) if occ],
        },
        report=report,
    )


def _stats_to_dict(s: StrategyStats) -> dict:
    return {
        "option": s.option,
        "branches": [
            {"branch": b.branch, "count": b.count, "fraction": b.fraction,
             "mean_pl": b.mean_pl, "std_pl": b.std_pl}
            for b in s.branches
        ],
        "delta_snr_all": s.delta_snr_all,
        "delta_snr_nlos": s.delta_snr_nlos,
        "improved_fraction": s.improved_fraction,
        "improved_count": s.improved_count,
        "former_nlos_count": s.former_nlos_count,
        "outage_count": s.outage_count,
        "mean_pl": s.mean_pl,
    }


def _record_to_dict(r: HbpRecord) -> dict:
    return {
        "i": r.cell_index,
        "x": r.cell_center[0],
        "y": r.cell_center[1],
        "los": r.los_present,
        "pl_los_geometric": r.pl_los_geometric,
        "nlos": list(r.nlos_pls),
        "ris": [
            {"panel": e.panel_id, "reachable": e.reachable,
             "region": e.field_region, "pl": e.pl_db}
            for e in r.ris
        ],
        "gain_los": list(r.snr_gain_los),
        "gain_nlos": list(r.snr_gain_nlos),
        "best_ris": r.best_ris,
    }


def report_to_dict(doc: ReportDocument) -> dict:
    return {
        "tool": "thzris",
        "version": doc.tool_version,
        "scene_digest": doc.scene_digest,
        "config": {
            "polarization": doc.config.polarization,
            "reflection_order": doc.config.reflection_order,
            "convention": doc.config.convention,
            "phase_bits": doc.config.phase_bits,
            "field_rule": doc.config.field_rule,
        },
        "grid": doc.grid,
        "frequency_hz": doc.report.frequency_hz,
        "n_free_cells": doc.report.n_free_cells,
        "receivers": [
            {
                "rx": ev.rx_id,
                "recommended": ev.recommended,
                "stats": {name: _stats_to_dict(s) for name, s in ev.stats.items()},
                "records": [_record_to_dict(r) for r in ev.records],
            }
            for ev in doc.report.evaluations
        ],
    }


def _stats_from_dict(d: dict) -> StrategyStats:
    return StrategyStats(
        option=d["option"],
        branches=tuple(
            BranchStats(b["branch"], b["count"], b["fraction"], b["mean_pl"], b["std_pl"])
            for b in d["branches"]
        ),
        delta_snr_all=d["delta_snr_all"],
        delta_snr_nlos=d["delta_snr_nlos"],
        improved_fraction=d["improved_fraction"],
        improved_count=d["improved_count"],
        former_nlos_count=d["former_nlos_count"],
        outage_count=d["outage_count"],
        mean_pl=d["mean_pl"],
    )


def _record_from_dict(d: dict) -> HbpRecord:
    return HbpRecord(
        cell_index=d["i"],
        cell_center=(d["x"], d["y"]),
        los_present=d["los"],
        pl_los_geometric=d["pl_los_geometric"],
        nlos_pls=tuple(d["nlos"]),
        ris=tuple(
            RisLinkRecord(e["panel"], e["reachable"], e["region"], e["pl"])
            for e in d["ris"]
        ),
        snr_gain_los=tuple(d["gain_los"]),
        snr_gain_nlos=tuple(d["gain_nlos"]),
        best_ris=d["best_ris"],
    )


def report_from_dict(payload: dict) -> ReportDocument:
    config = SimulationConfig(**payload["config"])
    evaluations = tuple(
        RxEvaluation(
            rx_id=entry["rx"],
            records=tuple(_record_from_dict(r) for r in entry["records"]),
            stats={name: _stats_from_dict(s) for name, s in entry["stats"].items()},
            recommended=entry["recommended"],
        )
        for entry in payload["receivers"]
    )
    return ReportDocument(
        tool_version=payload["version"],
        scene_digest=payload["scene_digest"],
        config=config,
        grid=payload["grid"],
        report=DrfReport(
            frequency_hz=payload["frequency_hz"],
            convention=config.convention,
            n_free_cells=payload["n_free_cells"],
            evaluations=evaluations,
        ),
    )


def save_report(doc: ReportDocument, format: str = "json") -> bytes:
    """Serialize a report; JSON round-trips exactly, CSV is per-cell rows."""
    if format == "json":
        return json.dumps(report_to_dict(doc), indent=1).encode("utf-8")
    if format == "csv":
        return records_csv(doc).encode("utf-8")
    raise ValueError(f"unknown report format {format!r}")


def load_report(blob: bytes) -> ReportDocument:
    return report_from_dict(json.loads(blob.decode("utf-8")))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def records_csv(doc: ReportDocument, rx_id: str | None = None) -> str:
    """Per-cell CSV; one row per blockage position (column order is fixed)."""
    evaluations = [
        ev for ev in doc.report.evaluations if rx_id is None or ev.rx_id == rx_id
    ]
    if not evaluations:
        raise ValidationError(f"report has no receiver {rx_id!r}", kind="reference")
    panel_ids = [e.panel_id for e in evaluations[0].records[0].ris] if evaluations[0].records else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["rx", "i", "x", "y", "los", "min_nlos"]
    header += [f"pl_ris_{pid}" for pid in panel_ids]
    header += ["j_star"]
    header += [f"gain_los_{pid}" for pid in panel_ids]
    header += [f"gain_nlos_{pid}" for pid in panel_ids]
    writer.writerow(header)
    for ev in evaluations:
        for r in ev.records:
            row = [ev.rx_id, r.cell_index, _fmt(r.cell_center[0]), _fmt(r.cell_center[1]),
                   _fmt(r.los_present), _fmt(r.min_nlos)]
            row += [_fmt(e.pl_db) for e in r.ris]
            row += [_fmt(r.best_ris)]
            row += [_fmt(g) for g in r.snr_gain_los]
            row += [_fmt(g) for g in r.snr_gain_nlos]
            writer.writerow(row)
    return buf.getvalue()


def summary_csv(doc: ReportDocument) -> str:
    """Per-strategy summary: occurrence, mean and deviation per branch."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["rx", "option", "branch", "count", "occurrence_percent", "mu_pl_db",
         "sigma_pl_db", "delta_snr_all_db", "delta_snr_nlos_db",
         "improved_fraction", "outage_count", "recommended"]
    )
    for ev in doc.report.evaluations:
        for name, s in ev.stats.items():
            for b in s.branches:
                writer.writerow(
                    [ev.rx_id, name, b.branch, b.count, _fmt(100.0 * b.fraction),
                     _fmt(b.mean_pl), _fmt(b.std_pl), _fmt(s.delta_snr_all),
                     _fmt(s.delta_snr_nlos), _fmt(s.improved_fraction),
                     s.outage_count, _fmt(ev.recommended == name)]
                )
    return buf.getvalue()
