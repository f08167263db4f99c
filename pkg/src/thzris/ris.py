"""RIS unit-cell model, Fraunhofer classification, path-loss models and
phase-profile synthesis.

The free-space path-loss models for RIS-assisted links follow Tang et al.
(IEEE Trans. Wireless Commun., 2021): a general per-element coherent sum,
its far-field and near-field beamforming specializations, the electrically
large near-field broadcasting limit, and the single-cell form. Element sums
run in fixed row-major order with exactly rounded (compensated) accumulation
so results are bit-stable regardless of threading.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ValidationError
from .geometry import Vec3

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RisPanel:
    """One wall-mounted RIS: centered uniform lattice of M x N unit cells.

    ``axis_u`` (columns, pitch d_x) and ``axis_v`` (rows, pitch d_y) span the
    panel plane; ``normal`` points into the serviced half-space. ``amplitude``
    is the common |reflection| of the cells; ``phase_bits`` = 0 means
    continuous phase control.
    """

    id: str
    center: Vec3
    normal: Vec3
    axis_u: Vec3
    axis_v: Vec3
    m_columns: int
    n_rows: int
    d_x: float
    d_y: float
    amplitude: float = 1.0
    phase_bits: int = 0
    pitch_wavelengths: tuple[float, float] | None = None

    def __post_init__(self):
        if self.m_columns < 1 or self.n_rows < 1:
            raise ValidationError(f"ris {self.id!r}: element counts must be >= 1")
        if self.d_x <= 0 or self.d_y <= 0:
            raise ValidationError(f"ris {self.id!r}: element pitch must be positive")
        if not (0.0 < self.amplitude <= 1.0):
            raise ValidationError(f"ris {self.id!r}: amplitude must be in (0, 1]")
        if self.phase_bits < 0:
            raise ValidationError(f"ris {self.id!r}: phase_bits must be >= 0")
        for name, v in (("normal", self.normal), ("axis_u", self.axis_u), ("axis_v", self.axis_v)):
            if abs(v.norm() - 1.0) > 1e-9:
                raise ValidationError(f"ris {self.id!r}: {name} must be a unit vector")
        if (
            abs(self.normal.dot(self.axis_u)) > 1e-9
            or abs(self.normal.dot(self.axis_v)) > 1e-9
            or abs(self.axis_u.dot(self.axis_v)) > 1e-9
        ):
            raise ValidationError(f"ris {self.id!r}: orientation frame must be orthonormal")

    @property
    def n_elements(self) -> int:
        return self.m_columns * self.n_rows

    @property
    def width_m(self) -> float:
        return self.m_columns * self.d_x

    @property
    def height_m(self) -> float:
        return self.n_rows * self.d_y

    def element_offsets(self) -> tuple[np.ndarray, np.ndarray]:
        """In-plane offsets of element centers: (u[m_columns], v[n_rows])."""
        u = (np.arange(self.m_columns) - (self.m_columns - 1) / 2.0) * self.d_x
        v = (np.arange(self.n_rows) - (self.n_rows - 1) / 2.0) * self.d_y
        return u, v


def panel_frame(normal, up_hint=(0.0, 0.0, 1.0)) -> tuple[Vec3, Vec3, Vec3]:
    """Orthonormal (normal, axis_u, axis_v) from a normal and an up hint."""
    n = Vec3(*normal).normalized() if not isinstance(normal, Vec3) else normal.normalized()
    up = Vec3(*up_hint) if not isinstance(up_hint, Vec3) else up_hint
    v = up - n.scaled(up.dot(n))
    if v.norm() < 1e-9:
        raise ValidationError("up hint is parallel to the panel normal")
    v = v.normalized()
    u = v.cross(n)
    return n, u, v


@dataclass(frozen=True)
class PhaseProfile:
    """Per-element reflection phases in [0, 2*pi)."""

    phases: np.ndarray  # shape (n_rows, m_columns)
    quantized: bool
    bits: int

    def as_degrees(self) -> np.ndarray:
        return np.degrees(self.phases)


class LinkGeometry:
    """Geometry between TX, one RIS panel, and RX.

    Scalar quantities are cheap; the per-element distance/pattern arrays are
    materialized lazily (a 466 x 466 panel needs ~2 MB per array).
    """

    def __init__(self, panel: RisPanel, tx: Vec3, rx: Vec3):
        self.panel = panel
        self.tx = tx
        self.rx = rx
        w_t = tx - panel.center
        w_r = rx - panel.center
        self.d1 = w_t.norm()
        self.d2 = w_r.norm()
        if self.d1 == 0 or self.d2 == 0:
            raise ValueError("TX/RX must not coincide with the panel center")
        # Components of TX/RX in the panel frame; z_* is the height over the plane.
        self.z_t = w_t.dot(panel.normal)
        self.z_r = w_r.dot(panel.normal)
        self._tu, self._tv = w_t.dot(panel.axis_u), w_t.dot(panel.axis_v)
        self._ru, self._rv = w_r.dot(panel.axis_u), w_r.dot(panel.axis_v)

    @property
    def theta_t(self) -> float:
        """TX elevation from the panel normal, radians."""
        return math.acos(max(-1.0, min(1.0, self.z_t / self.d1)))

    @property
    def theta_r(self) -> float:
        return math.acos(max(-1.0, min(1.0, self.z_r / self.d2)))

    @property
    def front_side(self) -> bool:
        return self.z_t > 0.0 and self.z_r > 0.0

    @cached_property
    def d_nm(self) -> np.ndarray:
        u, v = self.panel.element_offsets()
        return np.sqrt(u[None, :] ** 2 + v[:, None] ** 2)

    @cached_property
    def r_t(self) -> np.ndarray:
        u, v = self.panel.element_offsets()
        return np.sqrt(
            (self._tu - u[None, :]) ** 2 + (self._tv - v[:, None]) ** 2 + self.z_t**2
        )

    @cached_property
    def r_r(self) -> np.ndarray:
        u, v = self.panel.element_offsets()
        return np.sqrt(
            (self._ru - u[None, :]) ** 2 + (self._rv - v[:, None]) ** 2 + self.z_r**2
        )


def link_geometry(panel: RisPanel, tx: Vec3, rx: Vec3) -> LinkGeometry:
    return LinkGeometry(panel, tx, rx)


def fraunhofer_distance(panel: RisPanel, wavelength_m: float) -> float:
    """Far-field boundary L = 2*M*N*d_x*d_y / lambda, meters."""
    return 2.0 * panel.m_columns * panel.n_rows * panel.d_x * panel.d_y / wavelength_m


def classify_field_region(
    panel: RisPanel, d1: float, d2: float, wavelength_m: float, rule: str = "either"
) -> str:
    """'far' or 'near' relative to the Fraunhofer distance.

    The default rule flags far field as soon as either endpoint is beyond L;
    ``rule='both'`` is the stricter conventional alternative.
    """
    length = fraunhofer_distance(panel, wavelength_m)
    if rule == "either":
        return "far" if (d1 > length or d2 > length) else "near"
    if rule == "both":
        return "far" if (d1 > length and d2 > length) else "near"
    raise ValueError(f"unknown field-region rule {rule!r}")


def db_to_linear(gain_db: float) -> float:
    return 10.0 ** (gain_db / 10.0)


def nprp(
    theta: float,
    gain_db: float | None = None,
    exponent: float | None = None,
    unit_cell: bool = False,
) -> float:
    """Normalized power radiation pattern value at angle theta.

    Exactly one mode applies: antenna mode cos(theta)^(G/2-1) with G the
    linear gain, exponent mode cos(theta)^alpha, or unit-cell mode
    cos(theta). The back hemisphere radiates nothing.
    """
    modes = (gain_db is not None) + (exponent is not None) + unit_cell
    if modes != 1:
        raise ValueError("specify exactly one of gain_db, exponent, unit_cell")
    if not (0.0 <= theta <= math.pi):
        raise ValueError("theta must be in [0, pi]")
    c = math.cos(theta)
    if c <= 0.0:
        return 0.0
    if unit_cell:
        return c
    if exponent is not None:
        return c**exponent
    return c ** (db_to_linear(gain_db) / 2.0 - 1.0)


def combined_pattern(geom: LinkGeometry, g_t_db: float, g_r_db: float) -> np.ndarray:
    """Joint pattern F[n, m]: TX antenna x cell (in) x cell (out) x RX antenna.

    TX and RX boresights point at the panel center, so their factors use the
    law-of-cosines angle between element direction and center direction; the
    cell factors use the elevation cosines z/r. Elements outside any front
    hemisphere contribute zero.
    """
    g_t = db_to_linear(g_t_db)
    g_r = db_to_linear(g_r_db)
    r_t, r_r, d_nm = geom.r_t, geom.r_r, geom.d_nm
    cos_tx = (geom.d1**2 + r_t**2 - d_nm**2) / (2.0 * geom.d1 * r_t)
    cos_rx = (geom.d2**2 + r_r**2 - d_nm**2) / (2.0 * geom.d2 * r_r)
    np.clip(cos_tx, -1.0, 1.0, out=cos_tx)
    np.clip(cos_rx, -1.0, 1.0, out=cos_rx)
    cos_t = geom.z_t / r_t
    cos_r = geom.z_r / r_r
    front = (cos_tx > 0.0) & (cos_rx > 0.0) & (cos_t > 0.0) & (cos_r > 0.0)
    f = np.zeros_like(r_t)
    ct = np.where(front, cos_tx, 1.0)
    cr = np.where(front, cos_rx, 1.0)
    f[front] = (
        ct[front] ** (g_t / 2.0 - 1.0)
        * cos_t[front]
        * cos_r[front]
        * cr[front] ** (g_r / 2.0 - 1.0)
    )
    return f


def _fsum_array(values: np.ndarray) -> float:
    """Exactly rounded sum in fixed row-major order."""
    return math.fsum(values.ravel(order="C").tolist())


def pl_general(
    panel: RisPanel,
    geom: LinkGeometry,
    gamma: np.ndarray,
    wavelength_m: float,
    g_t_db: float,
    g_r_db: float,
) -> float:
    """General RIS path loss (dB) for an arbitrary reflection-coefficient map."""
    gamma = np.asarray(gamma, dtype=complex)
    if gamma.shape != (panel.n_rows, panel.m_columns):
        raise ValueError(f"gamma must have shape {(panel.n_rows, panel.m_columns)}")
    f = combined_pattern(geom, g_t_db, g_r_db)
    r_t, r_r = geom.r_t, geom.r_r
    phase = np.exp(-1j * TWO_PI * (r_t + r_r) / wavelength_m)
    terms = np.sqrt(f) * gamma * phase / (r_t * r_r)
    s = complex(_fsum_array(terms.real), _fsum_array(terms.imag))
    mag2 = abs(s) ** 2
    if mag2 == 0.0:
        return math.inf
    g_t, g_r = db_to_linear(g_t_db), db_to_linear(g_r_db)
    pl_lin = 16.0 * math.pi**2 / (g_t * g_r * (panel.d_x * panel.d_y) ** 2 * mag2)
    return 10.0 * math.log10(pl_lin)


def pl_near_beam(
    panel: RisPanel,
    geom: LinkGeometry,
    g_t_db: float,
    g_r_db: float,
    amplitude: float | None = None,
) -> float:
    """Near-field beamforming path loss (dB): all elements co-phased at |G|=A."""
    a = panel.amplitude if amplitude is None else amplitude
    f = combined_pattern(geom, g_t_db, g_r_db)
    s = _fsum_array(np.sqrt(f) / (geom.r_t * geom.r_r))
    if s == 0.0:
        return math.inf
    g_t, g_r = db_to_linear(g_t_db), db_to_linear(g_r_db)
    pl_lin = 16.0 * math.pi**2 / (g_t * g_r * (panel.d_x * panel.d_y) ** 2 * a * a * s * s)
    return 10.0 * math.log10(pl_lin)


def pl_far_beam(
    panel: RisPanel,
    d1: float,
    d2: float,
    theta_t: float,
    theta_r: float,
    g_t_db: float,
    g_r_db: float,
    amplitude: float | None = None,
) -> float:
    """Far-field beamforming path loss (dB)."""
    a = panel.amplitude if amplitude is None else amplitude
    cos_t, cos_r = math.cos(theta_t), math.cos(theta_r)
    if cos_t <= 0.0 or cos_r <= 0.0:
        return math.inf
    g_t, g_r = db_to_linear(g_t_db), db_to_linear(g_r_db)
    aperture = panel.m_columns * panel.n_rows * panel.d_x * panel.d_y
    pl_lin = (
        16.0 * math.pi**2 * (d1 * d2) ** 2 / (g_t * g_r * aperture**2 * cos_t * cos_r * a * a)
    )
    return 10.0 * math.log10(pl_lin)


def pl_broadcast(
    d1: float,
    d2: float,
    wavelength_m: float,
    g_t_db: float,
    g_r_db: float,
    amplitude: float = 1.0,
) -> float:
    """Electrically large near-field broadcast loss (dB): mirror over d1+d2."""
    g_t, g_r = db_to_linear(g_t_db), db_to_linear(g_r_db)
    pl_lin = (
        16.0
        * math.pi**2
        * (d1 + d2) ** 2
        / (g_t * g_r * wavelength_m**2 * amplitude**2)
    )
    return 10.0 * math.log10(pl_lin)


def pl_single_cell(
    r_t: float,
    r_r: float,
    f_combine: float,
    gamma: complex,
    d_x: float,
    d_y: float,
    g_t_db: float,
    g_r_db: float,
) -> float:
    """Path loss (dB) through one unit cell."""
    if f_combine <= 0.0 or gamma == 0:
        return math.inf
    g_t, g_r = db_to_linear(g_t_db), db_to_linear(g_r_db)
    pl_lin = (
        16.0
        * math.pi**2
        * (r_t * r_r) ** 2
        / (g_t * g_r * (d_x * d_y) ** 2 * f_combine * abs(gamma) ** 2)
    )
    return 10.0 * math.log10(pl_lin)


def cell_reflection(z_load: complex, z0: float) -> complex:
    """Reflection coefficient of one varactor-loaded cell: (ZL-Z0)/(ZL+Z0)."""
    den = z_load + z0
    if den == 0:
        raise ValueError("degenerate load: Z_L = -Z_0")
    return (z_load - z0) / den


def cell_phase(gamma: complex) -> float:
    """Reflection phase of a cell, wrapped to [0, 2*pi)."""
    if gamma == 0:
        raise ValueError("phase undefined for zero reflection coefficient")
    return cmath.phase(gamma) % TWO_PI


def quantize_phases(phases: np.ndarray, bits: int) -> np.ndarray:
    """Round to the nearest of 2**bits levels; ties go to the lower level."""
    if bits <= 0:
        return phases % TWO_PI
    levels = 2**bits
    step = TWO_PI / levels
    idx = np.ceil(phases / step - 0.5).astype(int) % levels
    return idx * step


def synthesize_phase_profile(
    panel: RisPanel, tx: Vec3, rx: Vec3, wavelength_m: float, bits: int = 0
) -> PhaseProfile:
    """Co-phasing profile phi = 2*pi*(r_t + r_r)/lambda mod 2*pi, optionally
    quantized; applying Gamma = A*exp(j*phi) makes every element add in phase."""
    geom = link_geometry(panel, tx, rx)
    phases = (TWO_PI * (geom.r_t + geom.r_r) / wavelength_m) % TWO_PI
    if bits > 0:
        return PhaseProfile(phases=quantize_phases(phases, bits), quantized=True, bits=bits)
    return PhaseProfile(phases=phases, quantized=False, bits=0)


def gamma_from_profile(profile: PhaseProfile, amplitude: float = 1.0) -> np.ndarray:
    return amplitude * np.exp(1j * profile.phases)
