"""Deterministic image-method ray tracer.

Produces LOS, first-order (optionally second-order) specular reflections and
RIS-relayed paths with a per-path loss breakdown: free-space spreading,
reflection loss (Fresnel x roughness), gaseous absorption, and penetration
loss where an obstacle allows it. Raw losses exclude antenna gains; budget
losses subtract them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.constants import c as SPEED_OF_LIGHT

from . import ris as ris_mod
from .atmosphere import gaseous_attenuation, path_attenuation
from .geometry import Vec3
from .propagation import friis_path_loss, reflection_loss_db
from .scene import Node, Scene, segment_penetration_db
from .ris import LinkGeometry, RisPanel

PATH_KINDS = ("los", "reflected", "ris")


@dataclass(frozen=True)
class PropagationPath:
    """One traced ray from TX to RX."""

    kind: str
    vertices: tuple[Vec3, ...]
    segment_lengths: tuple[float, ...]
    total_length: float
    loss_breakdown: dict = field(default_factory=dict)
    total_pl_raw: float = 0.0
    total_pl_budget: float = 0.0
    surface_ids: tuple[str, ...] = ()
    incidence_angles: tuple[float, ...] = ()
    ris_id: str | None = None
    field_region: str | None = None

    @property
    def delay_s(self) -> float:
        """Propagation delay metadata; no impulse-response modeling implied."""
        return self.total_length / SPEED_OF_LIGHT

    def aod(self) -> Vec3:
        """Departure direction at the TX."""
        return (self.vertices[1] - self.vertices[0]).normalized()

    def aoa(self) -> Vec3:
        """Arrival direction into the RX."""
        return (self.vertices[-1] - self.vertices[-2]).normalized()


def _assemble(
    scene: Scene,
    kind: str,
    vertices: tuple[Vec3, ...],
    g_t_db: float,
    g_r_db: float,
    reflection_db: float = 0.0,
    penetration_db: float = 0.0,
    surface_ids: tuple[str, ...] = (),
    incidence_angles: tuple[float, ...] = (),
) -> PropagationPath:
    lengths = tuple(
        vertices[i].distance_to(vertices[i + 1]) for i in range(len(vertices) - 1)
    )
    total = sum(lengths)
    wavelength = scene.wavelength_m
    spreading = friis_path_loss(total, wavelength)
    gamma = gaseous_attenuation(scene.frequency_hz, scene.atmosphere)
    atmospheric = path_attenuation(gamma, total)
    breakdown = {
        "spreading_db": spreading,
        "reflection_db": reflection_db,
        "atmospheric_db": atmospheric,
        "penetration_db": penetration_db,
    }
    raw = spreading + reflection_db + atmospheric + penetration_db
    return PropagationPath(
        kind=kind,
        vertices=vertices,
        segment_lengths=lengths,
        total_length=total,
        loss_breakdown=breakdown,
        total_pl_raw=raw,
        total_pl_budget=raw - g_t_db - g_r_db,
        surface_ids=surface_ids,
        incidence_angles=incidence_angles,
    )


def trace_los(scene: Scene, tx: Node, rx: Node) -> PropagationPath | None:
    """Direct path, present iff the TX-RX segment is not (totally) blocked."""
    pen = segment_penetration_db(scene, tx.position, rx.position)
    if math.isinf(pen):
        return None
    return _assemble(
        scene,
        "los",
        (tx.position, rx.position),
        tx.antenna_gain_db,
        rx.antenna_gain_db,
        penetration_db=pen,
    )


def _mirror(p: Vec3, rect_origin: Vec3, normal: Vec3) -> Vec3:
    return p - normal.scaled(2.0 * (p - rect_origin).dot(normal))


def _specular_point(surface, tx: Vec3, rx: Vec3) -> tuple[Vec3, float] | None:
    """Image-method reflection point on the surface, plus incidence angle."""
    rect = surface.rect
    normal = rect.normal()
    image = _mirror(tx, rect.origin, normal)
    d = rx - image
    denom = d.dot(normal)
    if denom == 0.0:
        return None  # path parallel to the plane
    t = (rect.origin - image).dot(normal) / denom
    if not (0.0 < t < 1.0):
        return None  # both endpoints on the same side
    point = image + d.scaled(t)
    u, v, _ = rect.local_coords(point)
    if not (0.0 < u < 1.0 and 0.0 < v < 1.0):
        return None  # specular point misses the finite rectangle
    incoming = tx - point
    cos_i = abs(incoming.dot(normal)) / incoming.norm()
    theta_i = math.acos(max(-1.0, min(1.0, cos_i)))
    return point, theta_i


def trace_reflections(
    scene: Scene,
    tx: Node,
    rx: Node,
    max_order: int = 1,
    polarization: str = "avg",
) -> list[PropagationPath]:
    """Specular reflection paths off reflective surfaces, sorted by raw loss."""
    if max_order not in (1, 2):
        raise ValueError("max_order must be 1 or 2")
    reflective = [s for s in scene.surfaces if s.reflective]
    paths: list[PropagationPath] = []

    for surface in reflective:
        hit = _specular_point(surface, tx.position, rx.position)
        if hit is None:
            continue
        point, theta_i = hit
        pen = segment_penetration_db(scene, tx.position, point)
        if math.isinf(pen):
            continue
        pen2 = segment_penetration_db(scene, point, rx.position)
        if math.isinf(pen2):
            continue
        material = scene.material_of(surface.material_id)
        refl_db = reflection_loss_db(material, scene.frequency_hz, theta_i, polarization)
        if math.isinf(refl_db):
            continue
        paths.append(
            _assemble(
                scene,
                "reflected",
                (tx.position, point, rx.position),
                tx.antenna_gain_db,
                rx.antenna_gain_db,
                reflection_db=refl_db,
                penetration_db=pen + pen2,
                surface_ids=(surface.id,),
                incidence_angles=(theta_i,),
            )
        )

    if max_order >= 2:
        paths.extend(_trace_second_order(scene, tx, rx, reflective, polarization))

    paths.sort(key=lambda p: (p.total_pl_raw, p.surface_ids))
    return paths


def _trace_second_order(scene, tx, rx, reflective, polarization) -> list[PropagationPath]:
    paths = []
    for s1 in reflective:
        n1 = s1.rect.normal()
        image1 = _mirror(tx.position, s1.rect.origin, n1)
        for s2 in reflective:
            if s2.id == s1.id:
                continue
            hit2 = _specular_point(s2, image1, rx.position)
            if hit2 is None:
                continue
            p2, theta_2 = hit2
            # Reflect p2's incoming ray back through s1 to locate the first bounce.
            hit1 = _specular_point(s1, tx.position, p2)
            if hit1 is None:
                continue
            p1, theta_1 = hit1
            segs = ((tx.position, p1), (p1, p2), (p2, rx.position))
            pen = 0.0
            dead = False
            for a, b in segs:
                d = segment_penetration_db(scene, a, b)
                if math.isinf(d):
                    dead = True
                    break
                pen += d
            if dead:
                continue
            m1 = scene.material_of(s1.material_id)
            m2 = scene.material_of(s2.material_id)
            refl = reflection_loss_db(m1, scene.frequency_hz, theta_1, polarization)
            refl += reflection_loss_db(m2, scene.frequency_hz, theta_2, polarization)
            if math.isinf(refl):
                continue
            paths.append(
                _assemble(
                    scene,
                    "reflected",
                    (tx.position, p1, p2, rx.position),
                    tx.antenna_gain_db,
                    rx.antenna_gain_db,
                    reflection_db=refl,
                    penetration_db=pen,
                    surface_ids=(s1.id, s2.id),
                    incidence_angles=(theta_1, theta_2),
                )
            )
    return paths


def trace_ris_link(
    scene: Scene,
    tx: Node,
    rx: Node,
    panel: RisPanel,
    phase_bits: int | None = None,
    field_rule: str = "either",
) -> tuple[LinkGeometry, PropagationPath] | None:
    """RIS-relayed path via one panel, or None when the panel is unreachable.

    Reachability is tested against the panel center (panels are small against
    room features) and requires both endpoints on the panel's front side.
    The beamforming model follows the field region: far field uses the
    aperture formula, near field the per-element coherent sum (optionally
    with a quantized phase profile).
    """
    geom = ris_mod.link_geometry(panel, tx.position, rx.position)
    if not geom.front_side:
        return None
    if math.isinf(segment_penetration_db(scene, tx.position, panel.center)):
        return None
    if math.isinf(segment_penetration_db(scene, panel.center, rx.position)):
        return None

    wavelength = scene.wavelength_m
    region = ris_mod.classify_field_region(panel, geom.d1, geom.d2, wavelength, rule=field_rule)
    bits = panel.phase_bits if phase_bits is None else phase_bits
    g_t, g_r = tx.antenna_gain_db, rx.antenna_gain_db
    if region == "far":
        pl_budget = ris_mod.pl_far_beam(panel, geom.d1, geom.d2, geom.theta_t, geom.theta_r, g_t, g_r)
    elif bits > 0:
        profile = ris_mod.synthesize_phase_profile(panel, tx.position, rx.position, wavelength, bits)
        gamma = ris_mod.gamma_from_profile(profile, panel.amplitude)
        pl_budget = ris_mod.pl_general(panel, geom, gamma, wavelength, g_t, g_r)
    else:
        pl_budget = ris_mod.pl_near_beam(panel, geom, g_t, g_r)
    if math.isinf(pl_budget):
        return None

    total_length = geom.d1 + geom.d2
    gamma_gas = gaseous_attenuation(scene.frequency_hz, scene.atmosphere)
    atmospheric = path_attenuation(gamma_gas, total_length)
    raw_model = pl_budget + g_t + g_r  # gain-free convention of the same model
    path = PropagationPath(
        kind="ris",
        vertices=(tx.position, panel.center, rx.position),
        segment_lengths=(geom.d1, geom.d2),
        total_length=total_length,
        loss_breakdown={
            "spreading_db": raw_model,
            "reflection_db": 0.0,
            "atmospheric_db": atmospheric,
            "penetration_db": 0.0,
        },
        total_pl_raw=raw_model + atmospheric,
        total_pl_budget=pl_budget + atmospheric,
        ris_id=panel.id,
        field_region=region,
    )
    return geom, path
