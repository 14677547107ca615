"""Split-operator propagation of the kicked wave on a periodic grid.

One flashing period is a position-space phase kick followed by a
momentum-space free flight. The state stores the periodic part
u(x) = psi(x) * exp(-i*beta*x), so the quasimomentum beta enters the free
flight as an exact diagonal parameter instead of a grid offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .model import EffectivePlanck, RatchetPotential, kick_phase_profile

__all__ = [
    "NumericalFailure",
    "SpatialGrid",
    "WaveState",
    "MomentumLadder",
    "KickedRunParams",
    "plane_wave",
    "state_from_orders",
    "kick_step",
    "free_step",
    "momentum_spectrum",
    "evolve",
    "ladder_record",
    "beta_ensemble_spectra",
]

NORM_TOL = 1e-8  # norm drift beyond this signals an implementation bug


class NumericalFailure(RuntimeError):
    """Norm drift or basis-truncation breach during propagation."""


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid over `periods` potential periods of length 2*pi."""

    periods: int = 1
    points_per_period: int = 256

    def __post_init__(self) -> None:
        if self.periods < 1:
            raise ValueError(f"periods must be >= 1, got {self.periods}")
        if self.points_per_period < 2 or self.points_per_period % 2:
            raise ValueError(f"points_per_period must be a positive even integer, got {self.points_per_period}")
        if self.n < 32:
            raise ValueError(f"grid needs >= 32 points, got {self.n}")

    @property
    def n(self) -> int:
        return self.periods * self.points_per_period

    @property
    def dx(self) -> float:
        return 2.0 * math.pi / self.points_per_period

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @property
    def mode_numbers(self) -> np.ndarray:
        """FFT-ordered integer mode indices m; mode m has wavenumber m/periods."""
        return np.rint(np.fft.fftfreq(self.n) * self.n).astype(int)


def _norm(amplitudes: np.ndarray, grid: SpatialGrid) -> float:
    return float(np.sum(np.abs(amplitudes) ** 2) * grid.dx)


@dataclass(frozen=True, eq=False)
class WaveState:
    """Periodic part of the wavefunction plus quasimomentum and kick count."""

    grid: SpatialGrid
    amplitudes: np.ndarray
    beta: float = 0.0
    kick_count: int = 0

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (self.grid.n,):
            raise ValueError(f"amplitudes shape {amps.shape} does not match grid size {self.grid.n}")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        if self.kick_count < 0:
            raise ValueError(f"kick_count must be >= 0, got {self.kick_count}")
        drift = abs(self.norm - 1.0)
        if drift > NORM_TOL:
            raise NumericalFailure(f"state norm off unity by {drift:.3e}")

    @property
    def norm(self) -> float:
        return _norm(self.amplitudes, self.grid)


@dataclass(frozen=True, eq=False)
class MomentumLadder:
    """Probabilities over the discrete momentum ladder q_n = orders/periods + beta."""

    beta: float
    orders: np.ndarray
    probabilities: np.ndarray
    hbar: EffectivePlanck | None = None
    grid_periods: int = 1

    def __post_init__(self) -> None:
        orders = np.asarray(self.orders, dtype=int)
        probs = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "probabilities", probs)
        if orders.shape != probs.shape:
            raise ValueError("orders and probabilities must have matching shapes")
        if np.any(probs < -1e-12):
            raise ValueError("probabilities must be non-negative")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"probabilities must sum to 1, got {total!r}")

    @property
    def ladder_values(self) -> np.ndarray:
        """Momentum in potential-order units, q_n = n/periods + beta."""
        return self.orders / self.grid_periods + self.beta

    @property
    def physical_momenta(self) -> np.ndarray:
        if self.hbar is None:
            raise ValueError("ladder carries no effective Planck constant")
        return self.hbar.hbar_eff * self.ladder_values


@dataclass(frozen=True)
class KickedRunParams:
    """Potential, effective Planck constant, and kick count for one run."""

    potential: RatchetPotential
    hbar: EffectivePlanck
    n_kicks: int

    def __post_init__(self) -> None:
        if self.n_kicks < 1:
            raise ValueError(f"n_kicks must be >= 1, got {self.n_kicks}")


def plane_wave(grid: SpatialGrid, beta: float = 0.0, order: int = 0) -> WaveState:
    """Normalized plane wave on ladder rung `order` at quasimomentum beta."""
    amp = 1.0 / math.sqrt(2.0 * math.pi * grid.periods)
    u = amp * np.exp(1j * (order / grid.periods) * grid.x)
    return WaveState(grid=grid, amplitudes=u, beta=beta)


def state_from_orders(grid: SpatialGrid, order_amps: dict[int, complex], beta: float = 0.0) -> WaveState:
    """Normalized superposition of ladder rungs, e.g. {0: 1, 1: 1} for two rungs."""
    if not order_amps:
        raise ValueError("need at least one ladder amplitude")
    u = np.zeros(grid.n, dtype=complex)
    for order, amp in order_amps.items():
        u += amp * np.exp(1j * (order / grid.periods) * grid.x)
    u /= math.sqrt(_norm(u, grid))
    return WaveState(grid=grid, amplitudes=u, beta=beta)


def kick_step(state: WaveState, pot: RatchetPotential, hbar: EffectivePlanck) -> WaveState:
    """Multiply by the flash factor exp(-i*K*v(x)/hbar_eff); norm preserved."""
    phase = kick_phase_profile(pot, hbar, state.grid.x)
    return replace(state, amplitudes=state.amplitudes * np.exp(1j * phase))


def free_step(state: WaveState, hbar: EffectivePlanck) -> WaveState:
    """One unit of free flight: ladder value q picks up exp(-i*hbar_eff*q^2/2).

    The phase is accumulated in units of pi and reduced mod 2 before the
    complex exponential, so rational multiples of pi (the resonant cases)
    evaluate to exact unimodular factors.
    """
    grid = state.grid
    q = state.grid.mode_numbers / grid.periods + state.beta
    half_turns = np.mod((hbar.hbar_eff / math.pi) * 0.5 * q * q, 2.0)
    spectrum = np.fft.fft(state.amplitudes)
    spectrum *= np.exp(-1j * math.pi * half_turns)
    return replace(state, amplitudes=np.fft.ifft(spectrum))


def momentum_spectrum(state: WaveState, hbar: EffectivePlanck | None = None) -> MomentumLadder:
    """Ladder probabilities |c_n|^2 from the discrete Fourier coefficients."""
    spectrum = np.fft.fft(state.amplitudes)
    probs = np.abs(spectrum) ** 2
    probs /= probs.sum()
    orders = np.fft.fftshift(state.grid.mode_numbers)
    return MomentumLadder(
        beta=state.beta,
        orders=orders,
        probabilities=np.fft.fftshift(probs),
        hbar=hbar,
        grid_periods=state.grid.periods,
    )


def evolve(
    state: WaveState,
    params: KickedRunParams,
    record: Callable[[int, MomentumLadder], None] | None = None,
) -> WaveState:
    """Apply n_kicks flashing periods (kick then free flight).

    After each kick the momentum spectrum is handed to `record(kick, ladder)`,
    matching a far-field tap right after each mirror encounter; the free
    flight that completes the period does not change the spectrum. Aborts
    with NumericalFailure if the norm drifts beyond 1e-8.
    """
    for k in range(1, params.n_kicks + 1):
        state = kick_step(state, params.potential, params.hbar)
        drift = abs(state.norm - 1.0)
        if drift > NORM_TOL:
            raise NumericalFailure(f"norm drifted by {drift:.3e} at kick {state.kick_count + 1}")
        if record is not None:
            record(state.kick_count + 1, momentum_spectrum(state, params.hbar))
        state = free_step(state, params.hbar)
        state = replace(state, kick_count=state.kick_count + 1)
    return state


def ladder_record(kick: int, ladder: MomentumLadder) -> dict:
    """One NDJSON-ready record of a per-kick spectrum."""
    return {
        "kick": int(kick),
        "beta": float(ladder.beta),
        "hbar": None if ladder.hbar is None else float(ladder.hbar.hbar_eff),
        "orders": [int(n) for n in ladder.orders],
        "prob": [float(p) for p in ladder.probabilities],
    }


def beta_ensemble_spectra(
    pot: RatchetPotential,
    hbar: EffectivePlanck,
    grid: SpatialGrid,
    n_kicks: int,
    n_beta: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-kick ladder probabilities averaged over a uniform beta grid on [0, 1).

    Returns (orders, probs) with probs of shape (n_kicks, len(orders)).
    """
    if n_beta < 1:
        raise ValueError(f"n_beta must be >= 1, got {n_beta}")
    orders = np.fft.fftshift(grid.mode_numbers)
    acc = np.zeros((n_kicks, grid.n))
    params = KickedRunParams(potential=pot, hbar=hbar, n_kicks=n_kicks)
    for i in range(n_beta):
        beta = i / n_beta
        rows: list[np.ndarray] = []
        evolve(plane_wave(grid, beta=beta), params, lambda k, lad: rows.append(lad.probabilities))
        acc += np.stack(rows)
    return orders, acc / n_beta
