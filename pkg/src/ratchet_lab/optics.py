"""Physical-units simulation of the mirror-bounce apparatus.

A laser field bounces between an etched phase mirror and the coated flat of a
cylindrical lens; each mirror encounter imprints the kick phase and a small
tap of the field is imaged at the lens focal plane. Geometry arithmetic maps
the mirror-lens distance to the effective Planck constant and back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .evolution import MomentumLadder
from .model import (
    EffectivePlanck,
    MirrorProfile,
    RatchetPotential,
    depth_from_phase,
    kick_phase_profile,
    phase_from_depth,
)

__all__ = [
    "OpticalGeometry",
    "BeamField",
    "FarFieldImage",
    "DeflectionRegion",
    "hbar_from_geometry",
    "distance_for_hbar",
    "lau_distance",
    "ratchet_mirror",
    "gaussian_beam",
    "plane_wave_beam",
    "apply_mirror",
    "propagate_fresnel",
    "far_field",
    "order_probabilities",
    "bounce_simulation",
    "row_order_probabilities",
    "row_order_ladder",
    "deflection_check",
    "render_ccd",
]


@dataclass(frozen=True)
class OpticalGeometry:
    """Wavelength, mirror period, mirror-lens gap, focal length, reflectivity."""

    wavelength_m: float = 532e-9
    period_m: float = 600e-6
    distance_m: float = 0.169172
    focal_m: float = 0.3
    reflectivity: float = 0.95

    def __post_init__(self) -> None:
        for name in ("wavelength_m", "period_m", "distance_m", "focal_m"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        if not 0.0 < self.reflectivity <= 1.0:
            raise ValueError(f"reflectivity must lie in (0, 1], got {self.reflectivity!r}")


def hbar_from_geometry(geom: OpticalGeometry) -> EffectivePlanck:
    """Effective Planck constant 2*pi*lambda*L/l^2 set by the bounce geometry."""
    return EffectivePlanck(2.0 * math.pi * geom.wavelength_m * geom.distance_m / geom.period_m**2)


def distance_for_hbar(hbar: EffectivePlanck, wavelength_m: float, period_m: float) -> float:
    """Mirror-lens gap realizing a target hbar_eff: L = hbar_eff*l^2/(2*pi*lambda)."""
    return hbar.hbar_eff / (2.0 * math.pi) * period_m**2 / wavelength_m


def lau_distance(a: int, b: int, wavelength_m: float, period_m: float) -> float:
    """Grating separation (a/b)*l^2/(2*lambda) for white-light fringe revival.

    Delegates to distance_for_hbar so the rational-resonance identity
    lau_distance(4r, s) == distance_for_hbar(4*pi*r/s) holds bitwise.
    """
    if a < 1 or b < 1:
        raise ValueError(f"a and b must be >= 1, got ({a}, {b})")
    return distance_for_hbar(EffectivePlanck((4.0 * math.pi) * a / (4 * b)), wavelength_m, period_m)


def ratchet_mirror(
    pot: RatchetPotential,
    hbar: EffectivePlanck,
    wavelength_m: float,
    period_m: float,
    samples_per_period: int = 1024,
    n_levels: int | str = "continuous",
) -> MirrorProfile:
    """Mirror profile whose reflection realizes one kick of strength K at hbar_eff.

    The kick phase is offset by a constant (a global phase on the beam) so the
    etch relief is one contiguous band starting at zero depth; quantization
    then spreads its levels over the physically used range.
    """
    xs = 2.0 * math.pi * np.arange(samples_per_period) / samples_per_period
    phase = kick_phase_profile(pot, hbar, xs)
    phase = phase - phase.min()
    profile = depth_from_phase(phase, wavelength_m, period_m)
    if n_levels == "continuous":
        return profile
    from .model import quantize_profile

    return quantize_profile(profile.depth_samples, int(n_levels), period_m)


@dataclass(frozen=True, eq=False)
class BeamField:
    """Sampled complex field over a periodic window, x from -window/2 to window/2."""

    samples: np.ndarray
    dx: float
    window_m: float
    power: float
    wavelength_m: float

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("field needs a 1-d sample vector")
        if not (math.isfinite(self.dx) and self.dx > 0):
            raise ValueError(f"dx must be positive, got {self.dx!r}")
        if abs(samples.size * self.dx - self.window_m) > 1e-9 * self.window_m:
            raise ValueError("window_m must equal n_samples * dx")
        if not (math.isfinite(self.wavelength_m) and self.wavelength_m > 0):
            raise ValueError(f"wavelength_m must be positive, got {self.wavelength_m!r}")

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.samples.size) - self.samples.size // 2) * self.dx

    def measured_power(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.dx)


def _make_field(amplitudes: np.ndarray, period_m: float, window_periods: int,
                samples_per_period: int, wavelength_m: float, power: float) -> BeamField:
    if window_periods < 8:
        raise ValueError(f"window must span >= 8 mirror periods, got {window_periods}")
    if samples_per_period < 64:
        raise ValueError(f"need >= 64 samples per period, got {samples_per_period}")
    dx = period_m / samples_per_period
    window = window_periods * period_m
    raw = float(np.sum(np.abs(amplitudes) ** 2) * dx)
    amplitudes = amplitudes * math.sqrt(power / raw)
    return BeamField(samples=amplitudes, dx=dx, window_m=window, power=power,
                     wavelength_m=wavelength_m)


def gaussian_beam(period_m: float, window_periods: int, samples_per_period: int,
                  width_m: float, wavelength_m: float, power: float = 1.0,
                  center_m: float = 0.0) -> BeamField:
    """Gaussian beam of 1/e^2 intensity half-width width_m, centered on the window."""
    n = window_periods * samples_per_period
    x = (np.arange(n) - n // 2) * (period_m / samples_per_period)
    amp = np.exp(-((x - center_m) ** 2) / width_m**2).astype(complex)
    return _make_field(amp, period_m, window_periods, samples_per_period, wavelength_m, power)


def plane_wave_beam(period_m: float, window_periods: int, samples_per_period: int,
                    wavelength_m: float, power: float = 1.0) -> BeamField:
    n = window_periods * samples_per_period
    return _make_field(np.ones(n, dtype=complex), period_m, window_periods,
                       samples_per_period, wavelength_m, power)


def window_periods_of(field: BeamField, period_m: float) -> int:
    """Number of mirror periods spanned; raises if not commensurate."""
    ratio = field.window_m / period_m
    periods = round(ratio)
    if periods < 1 or abs(ratio - periods) > 1e-9:
        raise ValueError(f"window {field.window_m!r} m is not an integer number of periods {period_m!r} m")
    return periods


def apply_mirror(field: BeamField, mirror: MirrorProfile, wavelength_m: float | None = None) -> BeamField:
    """Reflect off the etched mirror: multiply by exp(i*4*pi*d(x)/lambda).

    The staircase profile is resampled onto the field grid by nearest-sample
    lookup. Power is unchanged (unimodular factor).
    """
    lam = field.wavelength_m if wavelength_m is None else wavelength_m
    window_periods_of(field, mirror.period_m)
    n_mirror = mirror.depth_samples.size
    step = mirror.period_m / n_mirror
    idx = np.mod(np.rint(field.x / step).astype(int), n_mirror)
    phase = phase_from_depth(mirror, lam)[idx]
    return BeamField(samples=field.samples * np.exp(1j * phase), dx=field.dx,
                     window_m=field.window_m, power=field.power, wavelength_m=field.wavelength_m)


def propagate_fresnel(field: BeamField, distance: float) -> BeamField:
    """Paraxial angular-spectrum step over `distance` on the periodic window.

    Spatial frequency f_x picks up exp(-i*pi*lambda*z*f_x^2); the constant
    piston phase is dropped. Power is conserved.
    """
    if distance < 0:
        raise ValueError(f"distance must be >= 0, got {distance!r}")
    if distance == 0.0:
        return field
    fx = np.fft.fftfreq(field.samples.size, d=field.dx)
    kernel = np.exp(-1j * math.pi * field.wavelength_m * distance * fx * fx)
    samples = np.fft.ifft(np.fft.fft(field.samples) * kernel)
    return BeamField(samples=samples, dx=field.dx, window_m=field.window_m,
                     power=field.power, wavelength_m=field.wavelength_m)


def far_field(field: BeamField, focal_m: float) -> tuple[np.ndarray, float]:
    """Focal-plane intensity profile and its pixel pitch.

    The lens maps spatial frequency f_x to the focal-plane coordinate
    X = lambda*focal*f_x, so grating orders land at spacing lambda*focal/l.
    Returns (intensity, pixel_pitch_m) with the zero order at index n//2.
    """
    if focal_m <= 0:
        raise ValueError(f"focal_m must be positive, got {focal_m!r}")
    spectrum = np.fft.fftshift(np.fft.fft(field.samples))
    intensity = np.abs(spectrum) ** 2
    pitch = field.wavelength_m * focal_m / field.window_m
    return intensity, pitch


def _bin_orders(intensity_shifted: np.ndarray, window_periods: int,
                max_order: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    n = intensity_shifted.size
    fine = np.arange(n) - n // 2
    orders = np.rint(fine / window_periods).astype(int)
    n_hi = orders.max()
    n_lo = orders.min()
    sums = np.zeros(n_hi - n_lo + 1)
    np.add.at(sums, orders - n_lo, intensity_shifted)
    all_orders = np.arange(n_lo, n_hi + 1)
    if max_order is not None:
        keep = np.abs(all_orders) <= max_order
        all_orders, sums = all_orders[keep], sums[keep]
    total = sums.sum()
    return all_orders, sums / total


def order_probabilities(field: BeamField, period_m: float,
                        max_order: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Far-field probability per grating order (fine bins summed to nearest order)."""
    intensity, _ = far_field(field, 1.0)
    return _bin_orders(intensity, window_periods_of(field, period_m), max_order)


@dataclass(frozen=True, eq=False)
class FarFieldImage:
    """Per-kick far-field intensity rows tapped at the lens focal plane."""

    rows: np.ndarray
    pixel_pitch_m: float
    metadata: dict = field(default_factory=dict)

    @property
    def n_kicks(self) -> int:
        return self.rows.shape[0]


def bounce_simulation(geom: OpticalGeometry, mirror: MirrorProfile, beam: BeamField,
                      n_kicks: int, loss_accounting: bool = False) -> FarFieldImage:
    """Bounce the beam n_kicks times, tapping the far field after each mirror hit.

    Each cycle is: mirror reflection, focal-plane tap, then the kick-to-kick
    flight. The flight distance is calibrated so one flight reproduces the
    kinetic ladder phase exp(-i*hbar_eff*q^2/2) of the matched quantum run,
    with hbar_eff read from the geometry. Rows are normalized to unit sum by
    default; with loss_accounting the k-th row integrates to
    reflectivity^k * 0.05 * input power.
    """
    if n_kicks < 1:
        raise ValueError(f"n_kicks must be >= 1, got {n_kicks}")
    hbar = hbar_from_geometry(geom)
    flight = distance_for_hbar(hbar, geom.wavelength_m, geom.period_m)
    rows = []
    pitch = None
    for k in range(1, n_kicks + 1):
        beam = apply_mirror(beam, mirror)
        intensity, pitch = far_field(beam, geom.focal_m)
        if loss_accounting:
            scale = geom.reflectivity**k * 0.05 * beam.power / intensity.sum()
        else:
            scale = 1.0 / intensity.sum()
        rows.append(intensity * scale)
        beam = propagate_fresnel(beam, flight)
    meta = {
        "normalization": "loss" if loss_accounting else "per_row",
        "window_periods": window_periods_of(beam, geom.period_m),
        "hbar_eff": hbar.hbar_eff,
        "order_spacing_m": geom.wavelength_m * geom.focal_m / geom.period_m,
    }
    return FarFieldImage(rows=np.stack(rows), pixel_pitch_m=pitch, metadata=meta)


def row_order_probabilities(image: FarFieldImage, kick: int,
                            max_order: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Order distribution of row `kick` (1-based, matching kick count)."""
    return _bin_orders(image.rows[kick - 1], image.metadata["window_periods"], max_order)


def row_order_ladder(image: FarFieldImage, kick: int, max_order: int | None = None) -> MomentumLadder:
    orders, probs = row_order_probabilities(image, kick, max_order)
    return MomentumLadder(beta=0.0, orders=orders, probabilities=probs / probs.sum(),
                          hbar=EffectivePlanck(image.metadata["hbar_eff"]), grid_periods=1)


@dataclass(frozen=True)
class DeflectionRegion:
    """One constant-gradient stretch of the mirror and its probe result."""

    x_start_m: float
    x_end_m: float
    grad_phase: float  # rad per meter
    predicted_shift_m: float
    measured_shift_m: float


def deflection_check(mirror: MirrorProfile, wavelength_m: float, focal_m: float,
                     min_region_samples: int = 64) -> list[DeflectionRegion]:
    """Probe each constant-gradient region and compare the far-field centroid
    shift against (lambda*focal/(2*pi)) * dphi/dx.

    Regions are maximal runs of constant slope in the unwrapped reflection
    phase. A narrow Gaussian probe (1/e^2 half-width one sixth of the region)
    is centered on each; raises if no region is wide enough to host a probe
    with 4x clearance.
    """
    n = mirror.depth_samples.size
    step = mirror.period_m / n
    phase = np.unwrap(phase_from_depth(mirror, wavelength_m))
    slopes = np.diff(phase) / step
    scale = np.max(np.abs(slopes)) + 1.0 / mirror.period_m
    regions: list[tuple[int, int]] = []
    start = 0
    for i in range(1, slopes.size):
        if abs(slopes[i] - slopes[start]) > 1e-6 * scale:
            regions.append((start, i))
            start = i
    regions.append((start, slopes.size))
    x = np.arange(n) * step
    results = []
    for lo, hi in regions:
        if hi - lo < min_region_samples:
            continue
        length = (hi - lo) * step
        width = length / 6.0
        if length < 4.0 * width:  # pragma: no cover - 6x construction satisfies this
            continue
        center = (x[lo] + x[hi - 1]) / 2.0
        probe = np.exp(-((x - center) ** 2) / width**2) * np.exp(1j * phase[: n])
        spectrum = np.fft.fftshift(np.fft.fft(probe))
        intensity = np.abs(spectrum) ** 2
        fx = np.fft.fftshift(np.fft.fftfreq(n, d=step))
        pos = wavelength_m * focal_m * fx
        centroid = float(np.sum(pos * intensity) / np.sum(intensity))
        grad = float(slopes[lo])
        predicted = wavelength_m * focal_m / (2.0 * math.pi) * grad
        results.append(DeflectionRegion(
            x_start_m=float(x[lo]), x_end_m=float(x[hi - 1]) + step,
            grad_phase=grad, predicted_shift_m=predicted, measured_shift_m=centroid,
        ))
    if not results:
        raise ValueError(f"no constant-gradient region with >= {min_region_samples} samples")
    return results


def render_ccd(image: FarFieldImage, gamma: float = 1.0) -> np.ndarray:
    """8-bit grayscale raster, one row per kick, per-row max mapped to 255."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    out = np.zeros(image.rows.shape, dtype=np.uint8)
    for i, row in enumerate(image.rows):
        peak = row.max()
        if peak > 0:
            out[i] = np.rint(255.0 * (row / peak) ** gamma).astype(np.uint8)
    return out
