"""Apparatus geometry: slit/detector layout and angle conversions.

All quantities are SI (meters, radians, seconds). Detector positions are
transverse offsets measured from the double-slit symmetry axis; the sign
convention is that of an observer behind the slits looking toward the
crystal, so negative offsets lie to their left.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np


class ConfigError(ValueError):
    """Invalid apparatus parameters or config file contents."""


# Angle-valued config fields may also be given in degrees via "<name>_deg".
_ANGLE_FIELDS = ("incidence_angle_A", "incidence_angle_B")


@dataclass(frozen=True)
class ApparatusConfig:
    """Slit, detector and spectral parameters of the setup.

    Defaults describe degenerate 702 nm photon pairs from a 351 nm pump
    sent through a double slit (10 um wide slits, 100 um center-to-center),
    each photon hitting its own slit at mirror-symmetric 2 degree incidence,
    with detectors at 1.21 m and 1.50 m behind the slits.
    """

    wavelength: float = 702e-9
    pump_wavelength: float = 351e-9  # informational only
    slit_width_w: float = 10e-6
    slit_separation_s: float = 100e-6  # center to center
    incidence_angle_A: float = math.radians(2.0)
    incidence_angle_B: float = -math.radians(2.0)
    detector1_distance_L1: float = 1.21
    detector2_distance_L2: float = 1.50
    iris_diameter: float = 2e-3
    filter_fwhm: float = 4e-9
    angular_dispersion: float = 1e-9  # d(wavelength)/d(angle), m/rad

    def __post_init__(self):
        positive = (
            "wavelength",
            "pump_wavelength",
            "slit_width_w",
            "slit_separation_s",
            "detector1_distance_L1",
            "detector2_distance_L2",
            "iris_diameter",
        )
        for name in positive:
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be strictly positive")
        if not self.slit_separation_s > self.slit_width_w:
            raise ConfigError("slit_separation_s must exceed slit_width_w")
        for name in _ANGLE_FIELDS:
            if not abs(getattr(self, name)) < math.pi / 2:
                raise ConfigError(f"|{name}| must be below pi/2")
        if self.filter_fwhm < 0.0:
            raise ConfigError("filter_fwhm must be non-negative")
        if self.angular_dispersion < 0.0:
            raise ConfigError("angular_dispersion must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DetectorPosition:
    """Transverse detector offset from the symmetry axis.

    which selects the detector arm: 1 (at L1) or 2 (at L2).
    """

    y: float
    which: int

    def __post_init__(self):
        if self.which not in (1, 2):
            raise ConfigError("detector index must be 1 or 2")


def detector_distance(cfg: ApparatusConfig, which: int) -> float:
    """Slit-to-detector distance of arm 1 or 2."""
    if which == 1:
        return cfg.detector1_distance_L1
    if which == 2:
        return cfg.detector2_distance_L2
    raise ConfigError("detector index must be 1 or 2")


def position_to_angle(cfg: ApparatusConfig, pos: DetectorPosition):
    """Diffraction angle seen from the slits for a detector offset.

    Exact arctan mapping; at the position ranges of this apparatus the
    small-angle error would be ~0.1% but costs nothing to avoid.
    """
    return np.arctan(np.asarray(pos.y) / detector_distance(cfg, pos.which))[()]


def angle_to_position(cfg: ApparatusConfig, theta, which: int):
    """Inverse of position_to_angle: transverse offset at detector plane."""
    return (detector_distance(cfg, which) * np.tan(np.asarray(theta)))[()]


def wave_number(cfg: ApparatusConfig) -> float:
    """Magnitude of the photon wave vector, 2*pi/wavelength."""
    return 2.0 * math.pi / cfg.wavelength


def fringe_period_sin(cfg: ApparatusConfig) -> float:
    """Coincidence fringe period measured in sin(theta): wavelength / s."""
    return cfg.wavelength / cfg.slit_separation_s


def fringe_spacing_at_detector(cfg: ApparatusConfig, which: int) -> float:
    """Small-angle spacing of adjacent coincidence maxima at a detector."""
    return detector_distance(cfg, which) * fringe_period_sin(cfg)


def _coerce_fields(data: dict) -> dict:
    """Normalize a raw key-value mapping into constructor kwargs.

    Accepts exactly the ApparatusConfig field names (SI units) plus
    degree-valued variants of the incidence angles ("<name>_deg").
    Degrees are converted here; everything downstream is radians.
    """
    known = {f.name for f in fields(ApparatusConfig)}
    kwargs = {}
    for key, value in data.items():
        if key in known:
            name = key
        elif key.endswith("_deg") and key[:-4] in _ANGLE_FIELDS:
            name = key[:-4]
            value = math.radians(float(value))
        else:
            raise ConfigError(f"unknown config key: {key!r}")
        if name in kwargs:
            raise ConfigError(f"config key {name!r} given twice")
        kwargs[name] = float(value)
    return kwargs


def load_config(path) -> ApparatusConfig:
    """Read an ApparatusConfig from a JSON key-value file.

    Missing keys fall back to the defaults; unknown keys are rejected.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return ApparatusConfig(**_coerce_fields(data))


def save_config(cfg: ApparatusConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def apply_overrides(cfg: ApparatusConfig, assignments) -> ApparatusConfig:
    """Apply "key=value" override strings on top of an existing config."""
    data = {}
    for item in assignments:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        try:
            data[key.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"override {item!r} has a non-numeric value") from exc
    return replace(cfg, **_coerce_fields(data))
