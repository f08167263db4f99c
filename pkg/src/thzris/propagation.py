"""Surface electromagnetics and free-space loss.

Fresnel reflection for TE/TM polarization against lossy dielectrics, the
wave-impedance model Z = sqrt(mu0 / (eps0 (n^2 - b^2 - 2jnb))) with
b = alpha*c/(4*pi*f), Rayleigh roughness attenuation, and Friis path loss.
Material data (refractive index n_t and absorption coefficient alpha per
frequency) comes from the shipped measurement-derived table.
"""
from __future__ import annotations

import cmath
import math
from bisect import bisect_left
from dataclasses import dataclass

from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import epsilon_0, mu_0

from . import data
from .errors import CoverageError, ValidationError

#: Impedance of free space, ohm.
Z0_FREE_SPACE = math.sqrt(mu_0 / epsilon_0)


@dataclass(frozen=True)
class Material:
    """Electromagnetic surface properties over a frequency range.

    ``points`` holds (frequency_hz, n_t, alpha_per_m) rows sorted by
    frequency; lookups interpolate linearly and refuse extrapolation.
    ``roughness_m`` is the RMS surface-height deviation (0 = smooth).
    """

    name: str
    points: tuple[tuple[float, float, float], ...]
    roughness_m: float = 0.0
    source: str = ""

    def __post_init__(self):
        if not self.points:
            raise ValidationError(f"material {self.name!r} has an empty frequency table")
        freqs = [p[0] for p in self.points]
        if sorted(freqs) != freqs or len(set(freqs)) != len(freqs):
            raise ValidationError(f"material {self.name!r} table must be sorted by frequency")
        for f, n, a in self.points:
            if n < 1.0:
                raise ValidationError(f"material {self.name!r}: n_t < 1 at {f / 1e9:g} GHz")
            if a < 0.0:
                raise ValidationError(f"material {self.name!r}: alpha < 0 at {f / 1e9:g} GHz")
        if self.roughness_m < 0.0:
            raise ValidationError(f"material {self.name!r}: negative roughness")

    def _interp(self, f_hz: float, column: int) -> float:
        freqs = [p[0] for p in self.points]
        if not (freqs[0] <= f_hz <= freqs[-1]):
            raise CoverageError(
                f"material {self.name!r} covers {freqs[0] / 1e9:g}-{freqs[-1] / 1e9:g} GHz, "
                f"requested {f_hz / 1e9:g} GHz"
            )
        i = bisect_left(freqs, f_hz)
        if i < len(freqs) and freqs[i] == f_hz:
            return self.points[i][column]
        f0, f1 = freqs[i - 1], freqs[i]
        v0, v1 = self.points[i - 1][column], self.points[i][column]
        return v0 + (v1 - v0) * (f_hz - f0) / (f1 - f0)

    def refractive_index(self, f_hz: float) -> float:
        return self._interp(f_hz, 1)

    def absorption(self, f_hz: float) -> float:
        """Absorption coefficient, 1/m."""
        return self._interp(f_hz, 2)


def material_from_dict(entry: dict) -> Material:
    points = tuple((row[0] * 1e9, row[1], row[2]) for row in entry["points"])
    return Material(
        name=entry["name"],
        points=points,
        roughness_m=entry.get("roughness_m", 0.0),
        source=entry.get("source", ""),
    )


def material_library() -> dict[str, Material]:
    """Shipped material database, keyed by name."""
    table = data.load_table("materials.json")
    return {entry["name"]: material_from_dict(entry) for entry in table["materials"]}


def wave_impedance(material: Material, f_hz: float) -> complex:
    """Wave impedance of a lossy dielectric at f_hz, ohm (principal root)."""
    n = material.refractive_index(f_hz)
    alpha = material.absorption(f_hz)
    return wave_impedance_from(n, alpha, f_hz)


def wave_impedance_from(n_t: float, alpha_per_m: float, f_hz: float) -> complex:
    b = alpha_per_m * SPEED_OF_LIGHT / (4.0 * math.pi * f_hz)
    eps_rel = n_t * n_t - b * b - 2j * n_t * b
    z = cmath.sqrt(mu_0 / (epsilon_0 * eps_rel))
    # Principal root already has Re >= 0 for passive media; guard regardless.
    if z.real < 0:
        z = -z
    return z


def _check_incidence(theta_i: float) -> None:
    if not (0.0 <= theta_i < math.pi / 2):
        raise ValueError(f"incidence angle must be in [0, pi/2), got {theta_i}")


def fresnel_te(z1: complex, z2: complex, theta_i: float, theta_t: float) -> complex:
    """TE (perpendicular) reflection coefficient at a planar interface."""
    _check_incidence(theta_i)
    num = z2 * math.cos(theta_i) - z1 * cmath.cos(theta_t)
    den = z2 * math.cos(theta_i) + z1 * cmath.cos(theta_t)
    if den == 0:
        raise ValueError("degenerate geometry: zero TE denominator")
    return num / den


def fresnel_tm(z1: complex, z2: complex, theta_i: float, theta_t: float) -> complex:
    """TM (parallel) reflection coefficient at a planar interface."""
    _check_incidence(theta_i)
    num = z2 * cmath.cos(theta_t) - z1 * math.cos(theta_i)
    den = z2 * cmath.cos(theta_t) + z1 * math.cos(theta_i)
    if den == 0:
        raise ValueError("degenerate geometry: zero TM denominator")
    return num / den


def refraction_angle(n1: float, n2: float, theta_i: float) -> float:
    """Snell refraction angle, radians. Raises on total internal reflection."""
    _check_incidence(theta_i)
    s = n1 / n2 * math.sin(theta_i)
    if s > 1.0:
        raise ValueError(
            f"total internal reflection: n1={n1}, n2={n2}, theta_i={theta_i:.6f} rad"
        )
    return math.asin(s)


def roughness_factor(sigma_h_m: float, theta_i: float, wavelength_m: float) -> float:
    """Rayleigh roughness attenuation of the specular reflection, in (0, 1]."""
    if sigma_h_m < 0:
        raise ValueError("roughness must be >= 0")
    g = math.pi * sigma_h_m * math.cos(theta_i) / wavelength_m
    return math.exp(-8.0 * g * g)


def reflection_coefficient(
    material: Material, f_hz: float, theta_i: float, polarization: str = "avg"
) -> float:
    """|reflection| amplitude (roughness included) for one specular bounce.

    ``avg`` uses the unpolarized power mean of TE and TM; ``te``/``tm``
    select a single polarization. Incident medium is free space.
    """
    wavelength = SPEED_OF_LIGHT / f_hz
    n2 = material.refractive_index(f_hz)
    theta_t = refraction_angle(1.0, n2, theta_i)
    z2 = wave_impedance(material, f_hz)
    z1 = complex(Z0_FREE_SPACE)
    if polarization == "te":
        mag2 = abs(fresnel_te(z1, z2, theta_i, theta_t)) ** 2
    elif polarization == "tm":
        mag2 = abs(fresnel_tm(z1, z2, theta_i, theta_t)) ** 2
    elif polarization == "avg":
        te = abs(fresnel_te(z1, z2, theta_i, theta_t)) ** 2
        tm = abs(fresnel_tm(z1, z2, theta_i, theta_t)) ** 2
        mag2 = 0.5 * (te + tm)
    else:
        raise ValueError(f"unknown polarization {polarization!r}")
    rho = roughness_factor(material.roughness_m, theta_i, wavelength)
    return math.sqrt(mag2) * rho


def reflection_loss_db(
    material: Material, f_hz: float, theta_i: float, polarization: str = "avg"
) -> float:
    """Power loss of one specular bounce, dB (>= 0 for passive surfaces)."""
    mag = reflection_coefficient(material, f_hz, theta_i, polarization)
    if mag == 0.0:
        return math.inf
    return -20.0 * math.log10(mag)


def friis_path_loss(
    distance_m: float,
    wavelength_m: float,
    g_t_db: float = 0.0,
    g_r_db: float = 0.0,
    include_gains: bool = False,
) -> float:
    """Free-space path loss, dB. Raw mode is 20*log10(4*pi*d/lambda)."""
    if distance_m <= 0 or wavelength_m <= 0:
        raise ValueError("distance and wavelength must be positive")
    pl = 20.0 * math.log10(4.0 * math.pi * distance_m / wavelength_m)
    if include_gains:
        pl -= g_t_db + g_r_db
    return pl
