"""Fourth-order coincidence pattern of the two-photon double slit.

The coincidence rate for detectors at diffraction angles theta1, theta2 is

    C(theta1, theta2) = g1A^2 g2B^2 + g2A^2 g1B^2
                        + 2 g1A g2B g2A g1B cos[k s (sin theta1 - sin theta2)]

where g(theta, theta_inc) = sinc[(k w / 2)(sin theta - sin theta_inc)] is the
single-slit Fraunhofer envelope, w the slit width, s the slit separation and
theta_inc the incidence angle of the photon on its slit. giX is the envelope
for the photon that crossed slit X and is observed by detector i. C is the
squared modulus of the symmetrized two-photon amplitude, so it is
non-negative everywhere and carries arbitrary units.

Spectral smearing models the interferential filter in front of the
detectors: a Gaussian-weighted quadrature over the pair wavelength offset,
with the two photons offset anti-correlated (energy conservation from the
monochromatic pump) unless configured otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .geometry import ApparatusConfig, detector_distance, wave_number

FWHM_TO_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))

_trapz = getattr(np, "trapezoid", None) or np.trapz

_LAMBDA_MODES = ("anticorrelated", "correlated")


def _sinc(x):
    """sin(x)/x with the removable singularity handled analytically.

    A truncated series is used for |x| < 1e-4; the next omitted term is
    x^6/5040 ~ 2e-28 there, far below double precision.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)


def sinc_envelope(k: float, w: float, theta, theta_inc):
    """Single-slit diffraction envelope at angle theta for incidence theta_inc."""
    if not (k > 0.0 and w > 0.0):
        raise ValueError("wave number and slit width must be positive")
    x = 0.5 * k * w * (np.sin(theta) - np.sin(theta_inc))
    return _sinc(x)[()]


@dataclass(frozen=True)
class AmplitudeTerm:
    """Envelope factors and interference phase entering the pattern.

    g1A is the envelope of the photon from slit A seen by detector 1, and
    so on; phase_arg is k*s*(sin theta1 - sin theta2).
    """

    g1A: np.ndarray
    g2B: np.ndarray
    g2A: np.ndarray
    g1B: np.ndarray
    phase_arg: np.ndarray


def amplitude_terms(cfg: ApparatusConfig, theta1, theta2) -> AmplitudeTerm:
    k = wave_number(cfg)
    s1 = np.sin(np.asarray(theta1, dtype=float))
    s2 = np.sin(np.asarray(theta2, dtype=float))
    half_kw = 0.5 * k * cfg.slit_width_w
    sin_iA = math.sin(cfg.incidence_angle_A)
    sin_iB = math.sin(cfg.incidence_angle_B)
    return AmplitudeTerm(
        g1A=_sinc(half_kw * (s1 - sin_iA)),
        g2B=_sinc(half_kw * (s2 - sin_iB)),
        g2A=_sinc(half_kw * (s2 - sin_iA)),
        g1B=_sinc(half_kw * (s1 - sin_iB)),
        phase_arg=k * cfg.slit_separation_s * (s1 - s2),
    )


def _kernel(cfg: ApparatusConfig, theta1, theta2, k_a: float, k_b: float):
    """Coincidence value with per-photon wave numbers k_a (slit A) and k_b.

    With k_a == k_b this is exactly the standard pattern; distinct values
    arise only inside the spectral smearing quadrature. The two exchange
    terms then carry the mean wave number in the interference phase, which
    is what the symmetrized amplitude gives in the Fraunhofer limit.
    """
    s1 = np.sin(np.asarray(theta1, dtype=float))
    s2 = np.sin(np.asarray(theta2, dtype=float))
    sin_iA = math.sin(cfg.incidence_angle_A)
    sin_iB = math.sin(cfg.incidence_angle_B)
    half_a = 0.5 * k_a * cfg.slit_width_w
    half_b = 0.5 * k_b * cfg.slit_width_w
    t1 = _sinc(half_a * (s1 - sin_iA)) * _sinc(half_b * (s2 - sin_iB))
    t2 = _sinc(half_a * (s2 - sin_iA)) * _sinc(half_b * (s1 - sin_iB))
    phase = 0.5 * (k_a + k_b) * cfg.slit_separation_s * (s1 - s2)
    cos_phase = np.cos(phase)
    # Regrouped so each branch is a sum of non-negative terms; keeps the
    # |amplitude|^2 value non-negative at round-off near pattern zeros.
    cross = t1 * t2
    return np.where(
        cross >= 0.0,
        (t1 - t2) ** 2 + 2.0 * cross * (1.0 + cos_phase),
        (t1 + t2) ** 2 - 2.0 * cross * (1.0 - cos_phase),
    )


def coincidence_value(cfg: ApparatusConfig, theta1, theta2):
    """Coincidence pattern C(theta1, theta2), arbitrary units, >= 0."""
    k = wave_number(cfg)
    return _kernel(cfg, theta1, theta2, k, k)[()]


@dataclass(frozen=True)
class SmearingSpec:
    """Spectral smearing parameters.

    filter_fwhm is the interferential filter width; angular_dispersion is
    the phase-matching wavelength-vs-angle slope d(lambda)/d(theta) of the
    emission, which adds wavelength spread across the detector acceptance.
    lambda_mode sets how a pair wavelength offset is shared: opposite signs
    for the two photons ("anticorrelated", energy conservation) or equal
    signs ("correlated").
    """

    filter_fwhm: float = 4e-9
    angular_dispersion: float = 1e-9
    quadrature_points: int = 21
    lambda_mode: str = "anticorrelated"

    def __post_init__(self):
        if self.quadrature_points < 1:
            raise ValueError("quadrature_points must be >= 1")
        if self.filter_fwhm < 0.0:
            raise ValueError("filter_fwhm must be non-negative")
        if self.angular_dispersion < 0.0:
            raise ValueError("angular_dispersion must be non-negative")
        if self.lambda_mode not in _LAMBDA_MODES:
            raise ValueError(f"lambda_mode must be one of {_LAMBDA_MODES}")

    @classmethod
    def from_config(cls, cfg: ApparatusConfig, quadrature_points: int = 21,
                    lambda_mode: str = "anticorrelated") -> "SmearingSpec":
        return cls(
            filter_fwhm=cfg.filter_fwhm,
            angular_dispersion=cfg.angular_dispersion,
            quadrature_points=quadrature_points,
            lambda_mode=lambda_mode,
        )


def smeared_coincidence(cfg: ApparatusConfig, spec: SmearingSpec, theta1, theta2):
    """Coincidence pattern averaged over the filter passband.

    Gauss-Hermite quadrature over the pair wavelength offset with
    sigma = fwhm / (2 sqrt(2 ln 2)), widened by the angular-dispersion
    contribution over the scanned detector's iris acceptance. Each node
    evaluates the pattern with per-photon wave numbers. A zero filter
    width or a single quadrature node reduces exactly to the unsmeared
    pattern.
    """
    if spec.filter_fwhm == 0.0 or spec.quadrature_points == 1:
        return coincidence_value(cfg, theta1, theta2)

    sigma_filter = spec.filter_fwhm / FWHM_TO_SIGMA
    accept_half_angle = 0.5 * cfg.iris_diameter / cfg.detector1_distance_L1
    sigma = math.hypot(sigma_filter, spec.angular_dispersion * accept_half_angle)

    nodes, weights = np.polynomial.hermite.hermgauss(spec.quadrature_points)
    weights = weights / weights.sum()
    lam0 = cfg.wavelength
    sign_b = -1.0 if spec.lambda_mode == "anticorrelated" else 1.0

    offsets = math.sqrt(2.0) * sigma * nodes
    keep = np.abs(offsets) < lam0
    if weights[~keep].sum() > 1e-12:
        raise ValueError("filter width too large for the center wavelength")
    if not keep.all():
        # far tail nodes with negligible weight would need lambda <= 0
        offsets, weights = offsets[keep], weights[keep] / weights[keep].sum()

    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    total = np.zeros(np.broadcast(theta1, theta2).shape)
    for delta, wgt in zip(offsets, weights):
        k_a = 2.0 * math.pi / (lam0 + delta)
        k_b = 2.0 * math.pi / (lam0 + sign_b * delta)
        total = total + wgt * _kernel(cfg, theta1, theta2, k_a, k_b)
    return total[()]


def _coincidence(cfg: ApparatusConfig, theta1, theta2, spec: SmearingSpec | None):
    if spec is None:
        return coincidence_value(cfg, theta1, theta2)
    return smeared_coincidence(cfg, spec, theta1, theta2)


@dataclass
class CoincidencePattern:
    """C values on a grid of detector positions or angles.

    axis1 always refers to detector 1 and axis2 to detector 2; values has
    shape (len(axis1), len(axis2)). Rows in the CSV export are sorted by
    axis1 then axis2.
    """

    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray
    axis_kind: str
    config: ApparatusConfig
    smearing: SmearingSpec | None = None
    normalization: str = "peak"

    def rows(self):
        for i, a1 in enumerate(self.axis1):
            for j, a2 in enumerate(self.axis2):
                yield a1, a2, self.values[i, j]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("axis1,axis2,C\n")
            for a1, a2, c in self.rows():
                fh.write(f"{a1:.17g},{a2:.17g},{c:.17g}\n")

    def metadata(self) -> dict:
        return {
            "axis_kind": self.axis_kind,
            "normalization": self.normalization,
            "n_axis1": int(len(self.axis1)),
            "n_axis2": int(len(self.axis2)),
            "config": self.config.to_dict(),
            "smearing": asdict(self.smearing) if self.smearing is not None else None,
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.metadata(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _axis_values(axis) -> np.ndarray:
    start, stop, step = axis
    if step <= 0.0:
        raise ValueError("axis step must be positive")
    if stop < start:
        raise ValueError("axis range is empty")
    return np.arange(start, stop + 0.5 * step, step, dtype=float)


def pattern_grid(cfg: ApparatusConfig, axis1, axis2, spec: SmearingSpec | None = None,
                 axis_kind: str = "position", scale: float | None = None) -> CoincidencePattern:
    """Dense pattern evaluation over two (start, stop, step) axis ranges.

    axis_kind "position" interprets the axes as transverse detector offsets
    in meters (detector 1 on axis1, detector 2 on axis2); "angle" as
    diffraction angles in radians. Values are peak-normalized to 1.0 unless
    an explicit counts-per-unit-time scale is supplied.
    """
    a1 = _axis_values(axis1)
    a2 = _axis_values(axis2)
    if axis_kind == "position":
        th1 = np.arctan(a1 / detector_distance(cfg, 1))
        th2 = np.arctan(a2 / detector_distance(cfg, 2))
    elif axis_kind == "angle":
        th1, th2 = a1, a2
    else:
        raise ValueError("axis_kind must be 'position' or 'angle'")

    values = np.asarray(_coincidence(cfg, th1[:, None], th2[None, :], spec), dtype=float)
    values = values.reshape(len(a1), len(a2))
    if scale is None:
        peak = values.max()
        if peak > 0.0:
            values = values / peak
        normalization = "peak"
    else:
        values = values * scale
        normalization = f"scale={scale:.17g}"
    return CoincidencePattern(a1, a2, values, axis_kind, cfg, spec, normalization)


def coincidence_section(cfg: ApparatusConfig, fixed_y: float, mobile_axis,
                        fixed_which: int = 2, spec: SmearingSpec | None = None,
                        scale: float | None = None) -> CoincidencePattern:
    """1D section with one detector fixed and the other scanned.

    fixed_y is the fixed detector's transverse offset in meters; mobile_axis
    is the (start, stop, step) position range of the scanned detector.
    """
    if fixed_which == 2:
        return pattern_grid(cfg, mobile_axis, (fixed_y, fixed_y, 1.0), spec,
                            axis_kind="position", scale=scale)
    if fixed_which == 1:
        return pattern_grid(cfg, (fixed_y, fixed_y, 1.0), mobile_axis, spec,
                            axis_kind="position", scale=scale)
    raise ValueError("fixed_which must be 1 or 2")


def singles_marginal(cfg: ApparatusConfig, theta1, theta2_range,
                     spec: SmearingSpec | None = None, n_points: int = 201):
    """Coincidence pattern integrated over a detector-2 angular acceptance.

    Integrating over a full fringe period of sin(theta2) averages the
    interference term to ~0, which is how the singles stay fringe-free. A
    zero-width range returns the section at that angle unchanged.
    """
    lo, hi = theta2_range
    if hi < lo:
        raise ValueError("empty integration range")
    theta1 = np.asarray(theta1, dtype=float)
    if hi == lo:
        return _coincidence(cfg, theta1, lo, spec)
    th2 = np.linspace(lo, hi, n_points)
    vals = np.asarray(_coincidence(cfg, theta1[..., None], th2, spec))
    return _trapz(vals, th2, axis=-1)[()]
