"""Momentum statistics and regression fits for per-kick spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evolution import MomentumLadder

__all__ = [
    "StepStats",
    "FitResult",
    "mean_momentum",
    "mean_square_momentum",
    "participation_ratio",
    "stats_from_ladder",
    "polynomial_fit",
    "distribution_distance",
]


@dataclass(frozen=True)
class StepStats:
    """First two ladder moments and participation ratio after one kick."""

    kick: int
    mean_p: float
    mean_p2: float
    participation: float

    def __post_init__(self) -> None:
        if self.mean_p**2 > self.mean_p2 * (1.0 + 1e-9) + 1e-12:
            raise ValueError(f"mean_p^2={self.mean_p**2!r} exceeds mean_p2={self.mean_p2!r}")
        if self.participation < 1.0 - 1e-9:
            raise ValueError(f"participation must be >= 1, got {self.participation!r}")


@dataclass(frozen=True)
class FitResult:
    """Least-squares polynomial fit, coefficients low order first."""

    coefficients: tuple[float, ...]
    r_squared: float
    residual_rms: float

    def __post_init__(self) -> None:
        if not -1e-12 <= self.r_squared <= 1.0 + 1e-12:
            raise ValueError(f"r_squared must lie in [0, 1], got {self.r_squared!r}")


def mean_momentum(ladder: MomentumLadder) -> float:
    """Ladder-order mean sum((n/periods + beta) * P(n))."""
    return float(np.sum(ladder.ladder_values * ladder.probabilities))


def mean_square_momentum(ladder: MomentumLadder) -> float:
    """Ladder-order second moment sum((n/periods + beta)^2 * P(n))."""
    return float(np.sum(ladder.ladder_values**2 * ladder.probabilities))


def participation_ratio(ladder: MomentumLadder) -> float:
    """Inverse collision probability 1/sum(P^2): ~number of occupied rungs."""
    return float(1.0 / np.sum(ladder.probabilities**2))


def stats_from_ladder(kick: int, ladder: MomentumLadder) -> StepStats:
    return StepStats(
        kick=kick,
        mean_p=mean_momentum(ladder),
        mean_p2=mean_square_momentum(ladder),
        participation=participation_ratio(ladder),
    )


def polynomial_fit(xs, ys, degree: int) -> FitResult:
    """Degree-1 or degree-2 least squares via normal equations.

    The abscissa is centered and scaled before solving, then coefficients are
    mapped back to the original variable.
    """
    if degree not in (1, 2):
        raise ValueError(f"degree must be 1 or 2, got {degree}")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d with matching length")
    if x.size < degree + 2:
        raise ValueError(f"need at least {degree + 2} points for degree {degree}, got {x.size}")
    center = float(x.mean())
    scale = float(np.max(np.abs(x - center)))
    if scale == 0.0:
        raise ValueError("degenerate abscissa: all x values are equal")
    t = (x - center) / scale
    v = np.vander(t, degree + 1, increasing=True)
    coeff_t = np.linalg.solve(v.T @ v, v.T @ y)
    # Expand p(t) with t = (x - c)/s back into powers of x.
    c, s = center, scale
    if degree == 1:
        a0, a1 = coeff_t
        coeffs = (a0 - a1 * c / s, a1 / s)
    else:
        a0, a1, a2 = coeff_t
        coeffs = (
            a0 - a1 * c / s + a2 * c * c / (s * s),
            a1 / s - 2.0 * a2 * c / (s * s),
            a2 / (s * s),
        )
    fitted = v @ coeff_t
    residuals = y - fitted
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        r_squared = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return FitResult(
        coefficients=tuple(float(cf) for cf in coeffs),
        r_squared=r_squared,
        residual_rms=math.sqrt(ss_res / x.size),
    )


def distribution_distance(p_orders, p_probs, q_orders, q_probs) -> float:
    """Total variation distance between two order distributions."""
    acc: dict[int, float] = {}
    for n, p in zip(np.asarray(p_orders, dtype=int), np.asarray(p_probs, dtype=float)):
        acc[int(n)] = acc.get(int(n), 0.0) + p
    for n, q in zip(np.asarray(q_orders, dtype=int), np.asarray(q_probs, dtype=float)):
        acc[int(n)] = acc.get(int(n), 0.0) - q
    return 0.5 * sum(abs(v) for v in acc.values())
