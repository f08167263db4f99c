import math

import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import TABLE_CONDITIONS
from thzris.atmosphere import (
    AtmosphericConditions,
    RainCoefficients,
    fog_attenuation,
    fog_specific_coefficient,
    gaseous_attenuation,
    gaseous_components,
    path_attenuation,
    rain_attenuation,
    rain_coefficients,
    snow_attenuation,
)
from thzris.errors import CoverageError


def test_conditions_require_exactly_one_humidity():
    with pytest.raises(ValueError):
        AtmosphericConditions(293.15, 101.325)
    with pytest.raises(ValueError):
        AtmosphericConditions(293.15, 101.325, relative_humidity=0.4,
                              water_vapor_density_g_m3=7.0)
    with pytest.raises(ValueError):
        AtmosphericConditions(293.15, 101.325, relative_humidity=1.5)
    with pytest.raises(ValueError):
        AtmosphericConditions(-1.0, 101.325, relative_humidity=0.4)


def test_humidity_representations_are_interconvertible():
    rh = TABLE_CONDITIONS
    by_density = AtmosphericConditions(
        293.15, 101.325, water_vapor_density_g_m3=rh.vapor_density_g_m3
    )
    assert by_density.vapor_pressure_hpa == pytest.approx(rh.vapor_pressure_hpa, rel=1e-12)
    assert gaseous_attenuation(300e9, by_density) == pytest.approx(
        gaseous_attenuation(300e9, rh), rel=1e-9
    )


def test_saturation_pressure_matches_oracle():
    got = TABLE_CONDITIONS.vapor_pressure_hpa / 0.43
    ref = oracles.saturation_pressure_hpa(293.15, 1013.25)
    assert got == pytest.approx(ref, rel=1e-12)


def test_gas_at_300ghz_table_conditions_within_oracle_band():
    gamma = gaseous_attenuation(300e9, TABLE_CONDITIONS)
    ref_o, ref_w = oracles.gas_specific_attenuation(
        300.0, 293.15, 1013.25, TABLE_CONDITIONS.vapor_pressure_hpa
    )
    assert gamma == pytest.approx(ref_o + ref_w, rel=0.05)
    # absolute plausibility band for ~7.5 g/m^3 at room conditions
    assert 3.0 < gamma < 7.0


def test_dry_air_60ghz_oxygen_peak():
    dry = AtmosphericConditions(288.15, 101.325, water_vapor_density_g_m3=0.0)
    gamma_o, gamma_w = gaseous_components(60e9, dry)
    assert gamma_w == 0.0
    assert 14.0 <= gamma_o <= 16.0


def test_gas_oracle_sweep_20_points():
    freqs = [1, 10, 22.2, 60, 94, 118.7, 183, 220, 300, 340, 380, 448, 500,
             557, 620, 700, 752, 800, 916, 1000]
    assert len(freqs) >= 20
    e = TABLE_CONDITIONS.vapor_pressure_hpa
    for f_ghz in freqs:
        mine = gaseous_attenuation(f_ghz * 1e9, TABLE_CONDITIONS)
        ref_o, ref_w = oracles.gas_specific_attenuation(f_ghz, 293.15, 1013.25, e)
        assert mine == pytest.approx(ref_o + ref_w, rel=0.05), f"{f_ghz} GHz"


def test_gas_non_negative_and_continuous_across_line_center():
    # Sample densely through the 183.31 GHz water line.
    for k in range(41):
        f = (183.0 + 0.02 * k) * 1e9
        assert gaseous_attenuation(f, TABLE_CONDITIONS) >= 0.0
    left = gaseous_attenuation(183.31e9 - 1e6, TABLE_CONDITIONS)
    center = gaseous_attenuation(183.31e9, TABLE_CONDITIONS)
    right = gaseous_attenuation(183.31e9 + 1e6, TABLE_CONDITIONS)
    assert left == pytest.approx(center, rel=0.01)
    assert right == pytest.approx(center, rel=0.01)


def test_gas_coverage_limits():
    with pytest.raises(CoverageError):
        gaseous_attenuation(0.5e9, TABLE_CONDITIONS)
    with pytest.raises(CoverageError):
        gaseous_attenuation(1200e9, TABLE_CONDITIONS)


def test_rain_zero_rate_and_identity_coefficients():
    assert rain_attenuation(300e9, 0.0) == 0.0
    coeffs = RainCoefficients(k=1.0, alpha=1.0)
    assert rain_attenuation(300e9, 25.0, coeffs) == pytest.approx(25.0)


def test_rain_monotone_in_rate():
    rates = [0.5, 2.0, 5.0, 20.0, 60.0]
    vals = [rain_attenuation(100e9, r) for r in rates]
    assert vals == sorted(vals)
    assert all(v > 0 for v in vals)


def test_rain_table_anchor_values():
    # Published power-law coefficients at table frequencies.
    c10 = rain_coefficients(10e9, "h")
    assert c10.k == pytest.approx(0.01217, rel=1e-3)
    assert c10.alpha == pytest.approx(1.2571, rel=1e-3)
    c300 = rain_coefficients(300e9, "h")
    assert c300.k == pytest.approx(1.6286, rel=1e-3)
    assert c300.alpha == pytest.approx(0.6296, rel=1e-3)


def test_rain_coefficients_interpolate_and_cover():
    mid = rain_coefficients(11e9, "h")
    lo, hi = rain_coefficients(10e9, "h"), rain_coefficients(12e9, "h")
    assert min(lo.k, hi.k) <= mid.k <= max(lo.k, hi.k)
    with pytest.raises(CoverageError):
        rain_coefficients(0.5e9)


def test_fog_zero_density_and_linearity():
    assert fog_attenuation(300e9, 293.15, 0.0) == 0.0
    medium = fog_attenuation(300e9, 293.15, 0.05)
    dense = fog_attenuation(300e9, 293.15, 0.5)
    assert dense == pytest.approx(10.0 * medium, rel=1e-12)


def test_fog_kl_matches_oracle():
    mine = fog_specific_coefficient(300e9, 293.15)
    assert mine == pytest.approx(oracles.fog_kl(300.0, 293.15), rel=0.05)
    assert mine == pytest.approx(15.556052479747736, rel=1e-9)  # frozen oracle value


def test_fog_kl_oracle_sweep_20_points():
    points = [(f, t) for f in (50, 100, 200, 300, 500, 700, 900, 1000)
              for t in (273.15, 283.15, 293.15)]
    assert len(points) >= 20
    for f_ghz, t in points:
        mine = fog_specific_coefficient(f_ghz * 1e9, t)
        assert mine == pytest.approx(oracles.fog_kl(f_ghz, t), rel=0.05), (f_ghz, t)


def test_fog_temperature_coverage():
    with pytest.raises(CoverageError):
        fog_specific_coefficient(300e9, 150.0)


def test_snow_examples():
    assert snow_attenuation(1.0, 0.0) == 0.0
    assert snow_attenuation(1.0, 1.0) == pytest.approx(0.00349 + 0.00224, rel=1e-12)
    # strictly decreasing in wavelength
    assert snow_attenuation(0.5, 5.0) > snow_attenuation(1.0, 5.0) > snow_attenuation(3.0, 5.0)


def test_path_attenuation_scaling():
    assert path_attenuation(10.0, 0.0) == 0.0
    assert path_attenuation(10.0, 100.0) == pytest.approx(1.0)
    total = path_attenuation(4.2, 30.0) + path_attenuation(4.2, 70.0)
    assert total == pytest.approx(path_attenuation(4.2, 100.0), rel=1e-12)


@given(st.floats(1.5, 999.5), st.floats(0.0, 1.0))
def test_gas_non_negative_property(f_ghz, rh):
    cond = AtmosphericConditions(293.15, 101.325, relative_humidity=rh)
    assert gaseous_attenuation(f_ghz * 1e9, cond) >= 0.0
