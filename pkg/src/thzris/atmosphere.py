"""Specific attenuation (dB/km) from atmospheric gases, rain, fog and snow.

Gaseous attenuation follows the ITU-R P.676 line-by-line method (oxygen and
water-vapour resonances plus the dry continuum), fog uses the ITU-R P.840
double-Debye water permittivity, rain the ITU-R P.838 power law with a
shipped coefficient grid, and dry snow the classic Oguchi wavelength model.
All coefficient tables live in versioned, checksummed data files.
"""
from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import data
from .errors import CoverageError


@dataclass(frozen=True)
class AtmosphericConditions:
    """Temperature (K), total pressure (kPa) and one humidity measure.

    Humidity may be given either as relative humidity (fraction, 0-1) or as
    water-vapour density (g/m^3); exactly one must be set. The conversion
    uses the ITU-R P.453 saturation pressure at the stated T and P.
    """

    temperature_k: float
    pressure_kpa: float
    relative_humidity: float | None = None
    water_vapor_density_g_m3: float | None = None

    def __post_init__(self):
        if self.temperature_k <= 0:
            raise ValueError("temperature must be positive")
        if self.pressure_kpa <= 0:
            raise ValueError("pressure must be positive")
        given = (self.relative_humidity is not None) + (self.water_vapor_density_g_m3 is not None)
        if given != 1:
            raise ValueError("specify exactly one of relative_humidity or water_vapor_density")
        if self.relative_humidity is not None and not (0.0 <= self.relative_humidity <= 1.0):
            raise ValueError("relative humidity must be within [0, 1]")
        if self.water_vapor_density_g_m3 is not None and self.water_vapor_density_g_m3 < 0:
            raise ValueError("water vapour density must be >= 0")

    @property
    def pressure_hpa(self) -> float:
        return self.pressure_kpa * 10.0

    @property
    def vapor_pressure_hpa(self) -> float:
        """Water-vapour partial pressure e, hPa."""
        if self.relative_humidity is not None:
            return self.relative_humidity * saturation_vapor_pressure_hpa(
                self.temperature_k, self.pressure_hpa
            )
        return self.water_vapor_density_g_m3 * self.temperature_k / 216.7

    @property
    def vapor_density_g_m3(self) -> float:
        return 216.7 * self.vapor_pressure_hpa / self.temperature_k

    @property
    def dry_pressure_hpa(self) -> float:
        return self.pressure_hpa - self.vapor_pressure_hpa


def saturation_vapor_pressure_hpa(temperature_k: float, pressure_hpa: float) -> float:
    """Saturation vapour pressure over water, ITU-R P.453 (hPa)."""
    t = temperature_k - 273.15
    ef = 1.0 + 1e-4 * (7.2 + pressure_hpa * (0.0320 + 5.9e-6 * t * t))
    return 6.1121 * ef * math.exp(17.502 * t / (t + 240.97))


@dataclass(frozen=True)
class RainCoefficients:
    """Power-law coefficients of gamma_R = k * R^alpha."""

    k: float
    alpha: float

    def __post_init__(self):
        if self.k <= 0 or self.alpha <= 0:
            raise ValueError("rain coefficients must be positive")


@lru_cache(maxsize=1)
def _gas_lines() -> tuple[dict, dict, tuple[float, float]]:
    table = data.load_table("p676_gas_lines.json")
    oxy = {k: np.asarray(v, dtype=float) for k, v in table["oxygen"].items()}
    wat = {k: np.asarray(v, dtype=float) for k, v in table["water"].items()}
    lo, hi = table["valid_ghz"]
    return oxy, wat, (lo, hi)


def _line_shape(f_ghz: float, f0: np.ndarray, width: np.ndarray, delta) -> np.ndarray:
    minus = f0 - f_ghz
    plus = f0 + f_ghz
    return (f_ghz / f0) * (
        (width - delta * minus) / (minus * minus + width * width)
        + (width - delta * plus) / (plus * plus + width * width)
    )


def _refractivity_oxygen(f_ghz: float, p_dry: float, e: float, theta: float) -> float:
    oxy, _, _ = _gas_lines()
    s = oxy["a1"] * 1e-7 * p_dry * theta**3 * np.exp(oxy["a2"] * (1.0 - theta))
    width = oxy["a3"] * 1e-4 * (p_dry * theta ** (0.8 - oxy["a4"]) + 1.1 * e * theta)
    width = np.sqrt(width * width + 2.25e-6)  # Zeeman broadening floor
    delta = (oxy["a5"] + oxy["a6"] * theta) * 1e-4 * (p_dry + e) * theta**0.8
    resonant = float(np.sum(s * _line_shape(f_ghz, oxy["f0"], width, delta)))
    # Dry continuum: non-resonant Debye spectrum + pressure-induced nitrogen.
    d = 5.6e-4 * (p_dry + e) * theta**0.8
    continuum = f_ghz * p_dry * theta**2 * (
        6.14e-5 / (d * (1.0 + (f_ghz / d) ** 2))
        + 1.4e-12 * p_dry * theta**1.5 / (1.0 + 1.9e-5 * f_ghz**1.5)
    )
    return resonant + continuum


def _refractivity_water(f_ghz: float, p_dry: float, e: float, theta: float) -> float:
    _, wat, _ = _gas_lines()
    s = wat["b1"] * 1e-1 * e * theta**3.5 * np.exp(wat["b2"] * (1.0 - theta))
    width = wat["b3"] * 1e-4 * (p_dry * theta ** wat["b4"] + wat["b5"] * e * theta ** wat["b6"])
    width = 0.535 * width + np.sqrt(
        0.217 * width * width + 2.1316e-12 * wat["f0"] ** 2 / theta
    )  # Doppler broadening
    return float(np.sum(s * _line_shape(f_ghz, wat["f0"], width, 0.0)))


@lru_cache(maxsize=4096)
def _gaseous_components_cached(
    f_hz: float, temperature_k: float, pressure_hpa: float, e_hpa: float
) -> tuple[float, float]:
    _, _, (lo, hi) = _gas_lines()
    f_ghz = f_hz / 1e9
    if not (lo <= f_ghz <= hi):
        raise CoverageError(f"gaseous attenuation valid {lo:g}-{hi:g} GHz, requested {f_ghz:g} GHz")
    theta = 300.0 / temperature_k
    p_dry = pressure_hpa - e_hpa
    gamma_o = 0.1820 * f_ghz * _refractivity_oxygen(f_ghz, p_dry, e_hpa, theta)
    gamma_w = 0.1820 * f_ghz * _refractivity_water(f_ghz, p_dry, e_hpa, theta)
    return gamma_o, gamma_w


def gaseous_components(f_hz: float, cond: AtmosphericConditions) -> tuple[float, float]:
    """(gamma_oxygen, gamma_water) in dB/km at frequency f_hz."""
    return _gaseous_components_cached(
        f_hz, cond.temperature_k, cond.pressure_hpa, cond.vapor_pressure_hpa
    )


def gaseous_attenuation(f_hz: float, cond: AtmosphericConditions) -> float:
    """Total specific gaseous attenuation, dB/km."""
    gamma_o, gamma_w = gaseous_components(f_hz, cond)
    return gamma_o + gamma_w


@lru_cache(maxsize=1)
def _rain_table():
    table = data.load_table("p838_rain.json")
    rows = np.asarray(table["rows"], dtype=float)
    lo, hi = table["valid_ghz"]
    return rows, (lo, hi)


def rain_coefficients(f_hz: float, polarization: str = "h") -> RainCoefficients:
    """k and alpha at f_hz from the shipped grid (log-frequency interpolation)."""
    rows, (lo, hi) = _rain_table()
    f_ghz = f_hz / 1e9
    if not (lo <= f_ghz <= hi):
        raise CoverageError(f"rain coefficients valid {lo:g}-{hi:g} GHz, requested {f_ghz:g} GHz")
    if polarization not in ("h", "v"):
        raise ValueError("polarization must be 'h' or 'v'")
    kcol, acol = (1, 2) if polarization == "h" else (3, 4)
    freqs = rows[:, 0]
    i = bisect_left(freqs.tolist(), f_ghz)
    if i < len(freqs) and freqs[i] == f_ghz:
        return RainCoefficients(rows[i, kcol], rows[i, acol])
    x0, x1 = math.log10(freqs[i - 1]), math.log10(freqs[i])
    w = (math.log10(f_ghz) - x0) / (x1 - x0)
    log_k = (1 - w) * math.log10(rows[i - 1, kcol]) + w * math.log10(rows[i, kcol])
    alpha = (1 - w) * rows[i - 1, acol] + w * rows[i, acol]
    return RainCoefficients(10.0**log_k, alpha)


def rain_attenuation(
    f_hz: float,
    rate_mm_h: float,
    coeffs: RainCoefficients | None = None,
    polarization: str = "h",
) -> float:
    """Specific rain attenuation gamma_R = k * R^alpha, dB/km."""
    if rate_mm_h < 0:
        raise ValueError("rain rate must be >= 0")
    if rate_mm_h == 0.0:
        return 0.0
    if coeffs is None:
        coeffs = rain_coefficients(f_hz, polarization)
    return coeffs.k * rate_mm_h**coeffs.alpha


@lru_cache(maxsize=1)
def _debye_constants() -> dict:
    return data.load_table("p840_debye_water.json")


def water_permittivity(f_hz: float, temperature_k: float) -> complex:
    """Double-Debye complex permittivity of liquid water (eps' - j eps'')."""
    cst = _debye_constants()
    t_lo, t_hi = cst["temperature_range_k"]
    if not (t_lo <= temperature_k <= t_hi):
        raise CoverageError(
            f"double-Debye model valid {t_lo:g}-{t_hi:g} K, requested {temperature_k:g} K"
        )
    theta = 300.0 / temperature_k
    eps0 = cst["eps0"]["const"] + cst["eps0"]["slope"] * (theta - 1.0)
    eps1 = cst["eps1_factor"] * eps0
    eps2 = cst["eps2"]
    c0, c1, c2 = cst["fp_ghz_poly"]
    fp = c0 + c1 * (theta - 1.0) + c2 * (theta - 1.0) ** 2
    fs = cst["fs_over_fp"] * fp
    f = f_hz / 1e9
    eps_re = (eps0 - eps1) / (1.0 + (f / fp) ** 2) + (eps1 - eps2) / (1.0 + (f / fs) ** 2) + eps2
    eps_im = f * (eps0 - eps1) / (fp * (1.0 + (f / fp) ** 2)) + f * (eps1 - eps2) / (
        fs * (1.0 + (f / fs) ** 2)
    )
    return complex(eps_re, -eps_im)


def fog_specific_coefficient(f_hz: float, temperature_k: float) -> float:
    """K_l in (dB/km)/(g/m^3) for cloud/fog liquid water."""
    eps = water_permittivity(f_hz, temperature_k)
    eps_re, eps_im = eps.real, -eps.imag
    eta = (2.0 + eps_re) / eps_im
    return 0.819 * (f_hz / 1e9) / (eps_im * (1.0 + eta * eta))


def fog_attenuation(f_hz: float, temperature_k: float, density_g_m3: float) -> float:
    """Specific fog/cloud attenuation K_l * M, dB/km."""
    if density_g_m3 < 0:
        raise ValueError("liquid water density must be >= 0")
    return fog_specific_coefficient(f_hz, temperature_k) * density_g_m3


def snow_attenuation(wavelength_cm: float, rate_mm_h: float) -> float:
    """Specific attenuation of dry snow, dB/km (wavelength in cm)."""
    if wavelength_cm <= 0:
        raise ValueError("wavelength must be positive")
    if rate_mm_h < 0:
        raise ValueError("snowfall rate must be >= 0")
    return 0.00349 * rate_mm_h**1.6 / wavelength_cm**4 + 0.00224 * rate_mm_h / wavelength_cm


def path_attenuation(gamma_db_per_km: float, distance_m: float) -> float:
    """Convert a specific attenuation to the loss over one path segment, dB."""
    if distance_m < 0:
        raise ValueError("distance must be >= 0")
    return gamma_db_per_km * distance_m / 1000.0
