import math

import numpy as np
import pytest

from biphoton.geometry import (
    ApparatusConfig,
    ConfigError,
    DetectorPosition,
    angle_to_position,
    apply_overrides,
    detector_distance,
    fringe_period_sin,
    fringe_spacing_at_detector,
    load_config,
    position_to_angle,
    save_config,
    wave_number,
)


def test_position_to_angle_on_axis():
    cfg = ApparatusConfig()
    assert position_to_angle(cfg, DetectorPosition(0.0, 2)) == 0.0


def test_position_to_angle_frozen_values():
    cfg = ApparatusConfig()
    # frozen independent evaluations of arctan(y/L)
    assert position_to_angle(cfg, DetectorPosition(-0.01, 2)) == pytest.approx(
        -0.006666567903868229, rel=1e-12
    )
    assert position_to_angle(cfg, DetectorPosition(-0.055, 1)) == pytest.approx(
        -0.04542327942157701, rel=1e-12
    )


def test_wave_number_values():
    assert wave_number(ApparatusConfig()) == pytest.approx(8950406.42048374, rel=1e-12)
    assert wave_number(ApparatusConfig(wavelength=1.0)) == pytest.approx(2 * math.pi, rel=1e-15)
    assert wave_number(ApparatusConfig(wavelength=351e-9)) == pytest.approx(
        17900812.84096748, rel=1e-12
    )


def test_round_trip_identity():
    # angle_to_position inverts position_to_angle for |y| < L
    cfg = ApparatusConfig()
    rng = np.random.default_rng(7)
    for which in (1, 2):
        L = detector_distance(cfg, which)
        for y in rng.uniform(-0.9 * L, 0.9 * L, size=200):
            theta = position_to_angle(cfg, DetectorPosition(y, which))
            assert angle_to_position(cfg, theta, which) == pytest.approx(y, rel=1e-12)


def test_angle_conversion_vectorized():
    cfg = ApparatusConfig()
    ys = np.linspace(-0.5, 0.5, 11)
    thetas = np.arctan(ys / cfg.detector2_distance_L2)
    assert np.allclose(angle_to_position(cfg, thetas, 2), ys, rtol=1e-12)


def test_fringe_helpers():
    cfg = ApparatusConfig()
    assert fringe_period_sin(cfg) == pytest.approx(7.02e-3, rel=1e-12)
    assert fringe_spacing_at_detector(cfg, 1) == pytest.approx(8.4942e-3, rel=1e-12)


def test_detector_index_validation():
    with pytest.raises(ConfigError):
        DetectorPosition(0.0, 3)
    with pytest.raises(ConfigError):
        detector_distance(ApparatusConfig(), 0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(wavelength=0.0),
        dict(slit_width_w=-1e-6),
        dict(slit_separation_s=5e-6),  # below slit width
        dict(incidence_angle_A=math.pi / 2),
        dict(detector1_distance_L1=0.0),
        dict(filter_fwhm=-1e-9),
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        ApparatusConfig(**kwargs)


def test_config_file_round_trip(tmp_path):
    cfg = ApparatusConfig(iris_diameter=6e-3, incidence_angle_A=0.01, incidence_angle_B=-0.01)
    path = tmp_path / "apparatus.json"
    save_config(cfg, path)
    assert load_config(path) == cfg


def test_config_file_degrees_and_unknown_key(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"incidence_angle_A_deg": 2.0, "incidence_angle_B_deg": -2.0}')
    cfg = load_config(path)
    assert cfg.incidence_angle_A == pytest.approx(math.radians(2.0), rel=1e-15)
    assert cfg.incidence_angle_B == pytest.approx(math.radians(-2.0), rel=1e-15)

    path.write_text('{"slit_widht_w": 1e-5}')
    with pytest.raises(ConfigError):
        load_config(path)


def test_overrides():
    cfg = apply_overrides(ApparatusConfig(), ["iris_diameter=6e-3", "incidence_angle_A_deg=1.5"])
    assert cfg.iris_diameter == 6e-3
    assert cfg.incidence_angle_A == pytest.approx(math.radians(1.5))
    with pytest.raises(ConfigError):
        apply_overrides(ApparatusConfig(), ["iris_diameter"])
    with pytest.raises(ConfigError):
        apply_overrides(ApparatusConfig(), ["iris_diameter=large"])
