"""Geometric world model: room shell, furniture, nodes, RIS placements,
plus the floor blockage grid used to sweep the mobile human blocker.

The room spans [0, X] x [0, Y] x [0, Z]. Scenes are immutable; placing the
blocker returns a new scene view sharing all static data. Blockage is
total by default; an obstacle may carry a finite penetration-loss override.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .atmosphere import AtmosphericConditions
from .errors import ValidationError
from .geometry import Box, Rect3, Vec3, footprints_overlap, segment_hits_box, segment_hits_rect
from .propagation import Material
from .ris import RisPanel

SURFACE_KINDS = ("wall", "ceiling", "floor", "furniture")

# Tolerance for open-interval footprint overlap when classifying grid cells;
# obstacle edges aligned exactly with cell boundaries must not occupy.
_CELL_TOL = 1e-9


@dataclass(frozen=True)
class Surface:
    """One reflective rectangle of the environment."""

    id: str
    rect: Rect3
    material_id: str
    kind: str
    reflective: bool = True

    def __post_init__(self):
        if self.kind not in SURFACE_KINDS:
            raise ValidationError(f"surface {self.id!r}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned furniture/appliance/person box standing in the room."""

    box: Box
    material_id: str
    label: str
    penetration_loss_db: float = math.inf


@dataclass(frozen=True)
class HumanBlocker:
    """Mobile blocker template; the pose comes from the grid cell."""

    width_m: float = 0.4
    depth_m: float = 0.2
    height_m: float = 1.7

    def __post_init__(self):
        if min(self.width_m, self.depth_m, self.height_m) <= 0:
            raise ValidationError("blocker dimensions must be positive")


@dataclass(frozen=True)
class Node:
    id: str
    position: Vec3
    antenna_gain_db: float
    role: str  # "tx" | "rx"

    def __post_init__(self):
        if self.role not in ("tx", "rx"):
            raise ValidationError(f"node {self.id!r}: role must be tx or rx")
        if not math.isfinite(self.antenna_gain_db):
            raise ValidationError(f"node {self.id!r}: gain must be finite")


@dataclass(frozen=True)
class BlockageGrid:
    """Row-major floor grid; cell (ix, iy) has index iy * nx + ix."""

    cell_dx: float
    cell_dy: float
    nx: int
    ny: int
    occupied: tuple[bool, ...]

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def n_free(self) -> int:
        return self.n_cells - sum(self.occupied)

    def cell_center(self, index: int) -> tuple[float, float]:
        if not (0 <= index < self.n_cells):
            raise ValueError(f"cell index {index} out of range 0..{self.n_cells - 1}")
        iy, ix = divmod(index, self.nx)
        return ((ix + 0.5) * self.cell_dx, (iy + 0.5) * self.cell_dy)

    def is_free(self, index: int) -> bool:
        if not (0 <= index < self.n_cells):
            raise ValueError(f"cell index {index} out of range 0..{self.n_cells - 1}")
        return not self.occupied[index]

    def free_indices(self) -> list[int]:
        return [i for i, occ in enumerate(self.occupied) if not occ]

    def cells(self):
        """Iterate (index, (cx, cy), occupied) in row-major order."""
        for i in range(self.n_cells):
            yield i, self.cell_center(i), self.occupied[i]


@dataclass(frozen=True, eq=False)
class Scene:
    """Immutable world description; safe to share across workers."""

    room: Vec3  # dimensions (X, Y, Z)
    surfaces: tuple[Surface, ...]
    obstacles: tuple[Obstacle, ...]
    blocker: HumanBlocker
    nodes: tuple[Node, ...]
    ris_panels: tuple[RisPanel, ...]
    atmosphere: AtmosphericConditions
    frequency_hz: float
    materials: dict[str, Material] = field(default_factory=dict)
    blocker_box: Box | None = None

    def __post_init__(self):
        if min(self.room.x, self.room.y, self.room.z) <= 0:
            raise ValidationError("room dimensions must be positive")
        if self.frequency_hz <= 0:
            raise ValidationError("carrier frequency must be positive")
        txs = [n for n in self.nodes if n.role == "tx"]
        rxs = [n for n in self.nodes if n.role == "rx"]
        if len(txs) != 1:
            raise ValidationError(f"scene must contain exactly one TX, found {len(txs)}")
        if not rxs:
            raise ValidationError("scene must contain at least one RX")
        for n in self.nodes:
            if not self._inside_room(n.position):
                raise ValidationError(f"node {n.id!r} lies outside the room")
        for ob in self.obstacles:
            if not (self._inside_room(ob.box.min) and self._inside_room(ob.box.max)):
                raise ValidationError(f"obstacle {ob.label!r} extends outside the room")
        for s in self.surfaces:
            if s.material_id not in self.materials:
                raise ValidationError(
                    f"surface {s.id!r} references unknown material {s.material_id!r}",
                    kind="reference",
                )
        for ob in self.obstacles:
            if ob.material_id not in self.materials:
                raise ValidationError(
                    f"obstacle {ob.label!r} references unknown material {ob.material_id!r}",
                    kind="reference",
                )

    def _inside_room(self, p: Vec3, tol: float = 1e-9) -> bool:
        return (
            -tol <= p.x <= self.room.x + tol
            and -tol <= p.y <= self.room.y + tol
            and -tol <= p.z <= self.room.z + tol
        )

    @property
    def wavelength_m(self) -> float:
        from scipy.constants import c

        return c / self.frequency_hz

    def tx(self) -> Node:
        return next(n for n in self.nodes if n.role == "tx")

    def rx(self, rx_id: str) -> Node:
        for n in self.nodes:
            if n.id == rx_id and n.role == "rx":
                return n
        raise ValidationError(f"no RX named {rx_id!r}", kind="reference")

    def rx_ids(self) -> list[str]:
        return [n.id for n in self.nodes if n.role == "rx"]

    def panel(self, panel_id: str) -> RisPanel:
        for p in self.ris_panels:
            if p.id == panel_id:
                return p
        raise ValidationError(f"no RIS named {panel_id!r}", kind="reference")

    def material_of(self, material_id: str) -> Material:
        return self.materials[material_id]


def build_grid(scene: Scene, cell_dx: float, cell_dy: float) -> BlockageGrid:
    """Classify every floor cell as free or occupied by an obstacle footprint.

    Cells are open rectangles; an obstacle whose edge coincides with a cell
    boundary does not occupy that cell. The mobile blocker itself never
    occupies cells.
    """
    if cell_dx <= 0 or cell_dy <= 0:
        raise ValueError("cell dimensions must be positive")
    nx = int(scene.room.x / cell_dx + _CELL_TOL)
    ny = int(scene.room.y / cell_dy + _CELL_TOL)
    if nx < 1 or ny < 1:
        raise ValueError("cell size larger than the room footprint")
    occupied = [False] * (nx * ny)
    footprints = [ob.box.footprint() for ob in scene.obstacles]
    for iy in range(ny):
        y0, y1 = iy * cell_dy, (iy + 1) * cell_dy
        for ix in range(nx):
            x0, x1 = ix * cell_dx, (ix + 1) * cell_dx
            cell = (x0 + _CELL_TOL, y0 + _CELL_TOL, x1 - _CELL_TOL, y1 - _CELL_TOL)
            if any(footprints_overlap(cell, fp) for fp in footprints):
                occupied[iy * nx + ix] = True
    return BlockageGrid(cell_dx=cell_dx, cell_dy=cell_dy, nx=nx, ny=ny, occupied=tuple(occupied))


def blocker_box_at(scene: Scene, cx: float, cy: float) -> Box:
    """Blocker box for a footprint center, shifted minimally to stay in-room."""
    b = scene.blocker
    if b.width_m > scene.room.x or b.depth_m > scene.room.y:
        raise ValueError("blocker does not fit in the room")
    cx = min(max(cx, b.width_m / 2), scene.room.x - b.width_m / 2)
    cy = min(max(cy, b.depth_m / 2), scene.room.y - b.depth_m / 2)
    return Box(
        Vec3(cx - b.width_m / 2, cy - b.depth_m / 2, 0.0),
        Vec3(cx + b.width_m / 2, cy + b.depth_m / 2, min(b.height_m, scene.room.z)),
    )


def place_blocker(scene: Scene, grid: BlockageGrid, cell_index: int) -> Scene:
    """Scene view with the blocker standing on a free cell; base is untouched."""
    if not (0 <= cell_index < grid.n_cells):
        raise ValueError(f"cell index {cell_index} out of range")
    if not grid.is_free(cell_index):
        raise ValueError(f"cell {cell_index} is occupied")
    cx, cy = grid.cell_center(cell_index)
    return replace(scene, blocker_box=blocker_box_at(scene, cx, cy))


def remove_blocker(scene: Scene) -> Scene:
    return replace(scene, blocker_box=None)


def segment_blocked(scene: Scene, a: Vec3, b: Vec3) -> tuple[bool, str | None]:
    """Whether the open segment a-b is obstructed, and by what.

    Checks obstacle boxes, the placed blocker box, then surfaces. Endpoint
    touches and exact coplanar grazes do not block (strict-interior rule).
    """
    if a == b:
        raise ValueError("degenerate segment")
    for ob in scene.obstacles:
        if segment_hits_box(a, b, ob.box):
            return True, ob.label
    if scene.blocker_box is not None and segment_hits_box(a, b, scene.blocker_box):
        return True, "blocker"
    for s in scene.surfaces:
        if segment_hits_rect(a, b, s.rect):
            return True, s.id
    return False, None


def segment_obstructions(scene: Scene, a: Vec3, b: Vec3) -> list[Obstacle | str]:
    """All obstructions on the open segment; 'blocker' stands for the blocker."""
    hits: list[Obstacle | str] = []
    for ob in scene.obstacles:
        if segment_hits_box(a, b, ob.box):
            hits.append(ob)
    if scene.blocker_box is not None and segment_hits_box(a, b, scene.blocker_box):
        hits.append("blocker")
    for s in scene.surfaces:
        if segment_hits_rect(a, b, s.rect):
            hits.append(s.id)
    return hits


def segment_penetration_db(scene: Scene, a: Vec3, b: Vec3) -> float:
    """Total penetration loss along a segment; inf when blockage is total.

    Only obstacles with a finite override can be penetrated; the blocker and
    surfaces always block outright.
    """
    total = 0.0
    for hit in segment_obstructions(scene, a, b):
        if isinstance(hit, Obstacle):
            total += hit.penetration_loss_db
        else:
            return math.inf
        if total == math.inf:
            return math.inf
    return total


def room_shell_surfaces(room: Vec3, material_id: str) -> tuple[Surface, ...]:
    """The six wall/ceiling/floor rectangles of a [0,X]x[0,Y]x[0,Z] room."""
    x, y, z = room.x, room.y, room.z
    mk = material_id
    return (
        Surface("floor", Rect3(Vec3(0, 0, 0), Vec3(x, 0, 0), Vec3(0, y, 0)), mk, "floor"),
        Surface("ceiling", Rect3(Vec3(0, 0, z), Vec3(x, 0, 0), Vec3(0, y, 0)), mk, "ceiling"),
        Surface("wall_y0", Rect3(Vec3(0, 0, 0), Vec3(x, 0, 0), Vec3(0, 0, z)), mk, "wall"),
        Surface("wall_y1", Rect3(Vec3(0, y, 0), Vec3(x, 0, 0), Vec3(0, 0, z)), mk, "wall"),
        Surface("wall_x0", Rect3(Vec3(0, 0, 0), Vec3(0, y, 0), Vec3(0, 0, z)), mk, "wall"),
        Surface("wall_x1", Rect3(Vec3(x, 0, 0), Vec3(0, y, 0), Vec3(0, 0, z)), mk, "wall"),
    )
