"""Scenario drivers wiring the engines and observables into figure-style runs.

Every driver writes deterministic CSV/PGM artifacts into an output directory
and returns its in-memory results for programmatic use. Scan points are
independent and evaluated on a small thread pool capped by the
RATCHET_LAB_THREADS environment variable (0 or unset: one worker per CPU);
records are sorted before writing so concurrency never changes bytes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import observables as obs
from .config import RunConfig, serialize_config
from .evolution import (
    EffectivePlanck,
    KickedRunParams,
    MomentumLadder,
    evolve,
    plane_wave,
)
from .fileio import write_csv, write_pgm
from .model import RatchetPotential
from .optics import (
    FarFieldImage,
    bounce_simulation,
    distance_for_hbar,
    gaussian_beam,
    hbar_from_geometry,
    ratchet_mirror,
    render_ccd,
    row_order_ladder,
)

__all__ = [
    "ScanSpec",
    "ScanPoint",
    "quantum_kick_ladders",
    "optical_kick_ladders",
    "bounce_image",
    "crop_image",
    "ladder_csv_rows",
    "run_fig2",
    "run_fig3",
    "run_fig4",
    "compare_engines",
    "run_figs",
    "write_manifest",
]

FIG2_HBARS = ((0.5, "a"), (0.35, "b"))  # hbar_eff in units of pi, panel label


def _max_workers() -> int:
    raw = os.environ.get("RATCHET_LAB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class ScanSpec:
    """Grid of effective Planck constants and the kick counts to sample."""

    hbar_values: tuple[float, ...]
    kicks_at: tuple[int, ...]
    potential: RatchetPotential
    beta: float = 0.0
    mode: str = "fixed-k"
    kick_phase_anchor: float | None = None  # K/hbar_eff held fixed in fixed-kick-phase mode

    def __post_init__(self) -> None:
        values = self.hbar_values
        if not values or any(v <= 0 for v in values):
            raise ValueError("hbar_values must be positive")
        if any(b >= a for a, b in zip(values[1:], values)):
            raise ValueError("hbar_values must be strictly increasing")
        if not self.kicks_at or any(k < 1 for k in self.kicks_at):
            raise ValueError("kicks_at must be positive kick counts")

    @classmethod
    def from_config(cls, cfg: RunConfig, mode: str | None = None) -> "ScanSpec":
        n = int(round((cfg.scan_hbar_max - cfg.scan_hbar_min) / cfg.scan_hbar_step)) + 1
        values = tuple(cfg.scan_hbar_min + i * cfg.scan_hbar_step for i in range(n))
        values = tuple(v for v in values if v <= cfg.scan_hbar_max * (1 + 1e-12))
        return cls(
            hbar_values=values,
            kicks_at=cfg.scan_kicks_at,
            potential=cfg.potential(),
            beta=cfg.beta,
            mode=cfg.scan_mode if mode is None else mode,
            kick_phase_anchor=cfg.K / cfg.hbar,
        )


def quantum_kick_ladders(cfg: RunConfig, hbar_eff: float, n_kicks: int) -> list[MomentumLadder]:
    """Per-kick spectra of the split-step engine from the standard plane wave."""
    ladders: list[MomentumLadder] = []
    params = KickedRunParams(potential=cfg.potential(), hbar=EffectivePlanck(hbar_eff), n_kicks=n_kicks)
    evolve(plane_wave(cfg.grid(), beta=cfg.beta), params, lambda _k, lad: ladders.append(lad))
    return ladders


def bounce_image(cfg: RunConfig, hbar_eff: float, n_kicks: int,
                 n_levels: int | str | None = None) -> FarFieldImage:
    """Beam-bounce run at the distance realizing hbar_eff, standard Gaussian beam."""
    hbar = EffectivePlanck(hbar_eff)
    distance = distance_for_hbar(hbar, cfg.wavelength, cfg.period)
    geom = cfg.geometry(distance=distance)
    mirror = ratchet_mirror(cfg.potential(), hbar_from_geometry(geom), cfg.wavelength,
                            cfg.period, samples_per_period=cfg.beam_points_per_period,
                            n_levels=cfg.n_levels if n_levels is None else n_levels)
    beam = gaussian_beam(cfg.period, cfg.beam_periods, cfg.beam_points_per_period,
                         cfg.beam_width, cfg.wavelength)
    return bounce_simulation(geom, mirror, beam, n_kicks,
                             loss_accounting=cfg.normalization == "loss")


def optical_kick_ladders(cfg: RunConfig, hbar_eff: float, n_kicks: int,
                         n_levels: int | str | None = None) -> list[MomentumLadder]:
    """Per-kick order distributions of the beam-bounce engine."""
    image = bounce_image(cfg, hbar_eff, n_kicks, n_levels)
    return [row_order_ladder(image, k) for k in range(1, n_kicks + 1)]


def _quantum_ccd(ladders: list[MomentumLadder], cfg: RunConfig) -> FarFieldImage:
    """Pseudo-CCD image from quantum spectra: one pixel per order."""
    cut = cfg.max_order
    rows = []
    for lad in ladders:
        keep = np.abs(lad.orders) <= cut
        rows.append(lad.probabilities[keep])
    pitch = cfg.wavelength * cfg.focal / cfg.period
    meta = {"normalization": "per_row", "window_periods": 1, "engine": "quantum",
            "order_spacing_m": pitch}
    return FarFieldImage(rows=np.stack(rows), pixel_pitch_m=pitch, metadata=meta)


def ladder_csv_rows(ladders: list[MomentumLadder], max_order: int):
    for k, lad in enumerate(ladders, start=1):
        keep = np.abs(lad.orders) <= max_order
        for n, p in zip(lad.orders[keep], lad.probabilities[keep]):
            yield (k, int(n), float(p))


def crop_image(image: FarFieldImage, max_order: int) -> FarFieldImage:
    w = image.metadata["window_periods"]
    n = image.rows.shape[1]
    center = n // 2
    lo = max(0, center - max_order * w)
    hi = min(n, center + max_order * w + 1)
    return FarFieldImage(rows=image.rows[:, lo:hi], pixel_pitch_m=image.pixel_pitch_m,
                         metadata=image.metadata)


def run_fig2(cfg: RunConfig, out_dir: str | Path) -> dict:
    """Per-kick far-field panels at hbar_eff = 0.5*pi and 0.35*pi.

    Writes fig2_{a,b}.pgm and fig2_{a,b}.csv from the quantum engine and
    fig2_{a,b}_optical.{pgm,csv} from the beam engine when it is enabled.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results: dict = {}
    comments = ["columns kick,order,probability", f"n_kicks={cfg.n_kicks}"]
    for hpi, label in FIG2_HBARS:
        hbar_eff = hpi * math.pi
        panel: dict = {"hbar_eff": hbar_eff}
        if cfg.engine in ("quantum", "both"):
            ladders = quantum_kick_ladders(cfg, hbar_eff, cfg.n_kicks)
            panel["quantum"] = ladders
            write_csv(out / f"fig2_{label}.csv", ["kick", "order", "probability"],
                      ladder_csv_rows(ladders, cfg.max_order),
                      comments=[f"engine=quantum hbar={hbar_eff!r}"] + comments)
            write_pgm(out / f"fig2_{label}.pgm", render_ccd(_quantum_ccd(ladders, cfg), cfg.gamma))
        if cfg.engine in ("optical", "both"):
            image = bounce_image(cfg, hbar_eff, cfg.n_kicks)
            ladders = [row_order_ladder(image, k) for k in range(1, cfg.n_kicks + 1)]
            panel["optical"] = ladders
            suffix = "_optical" if cfg.engine == "both" else ""
            write_csv(out / f"fig2_{label}{suffix}.csv", ["kick", "order", "probability"],
                      ladder_csv_rows(ladders, cfg.max_order),
                      comments=[f"engine=optical hbar={hbar_eff!r}"] + comments)
            write_pgm(out / f"fig2_{label}{suffix}.pgm",
                      render_ccd(crop_image(image, cfg.max_order), cfg.gamma))
        results[label] = panel
    return results


def run_fig3(cfg: RunConfig, out_dir: str | Path) -> dict:
    """Per-kick moment series and fits at the resonant and off-resonant settings.

    Writes fig3_stats_{res,offres}.csv, fig3_fits.csv, and the kick-n_kicks
    distributions fig3_dist22_{res,offres}.csv.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_comments = [ln for ln in serialize_config(cfg).splitlines() if not ln.startswith("#")]
    results: dict = {}
    fit_rows = []
    for hpi, tag in ((0.5, "res"), (0.35, "offres")):
        hbar_eff = hpi * math.pi
        ladders = quantum_kick_ladders(cfg, hbar_eff, cfg.n_kicks)
        stats = [obs.stats_from_ladder(k, lad) for k, lad in enumerate(ladders, start=1)]
        write_csv(out / f"fig3_stats_{tag}.csv",
                  ["kick", "mean_p", "mean_p2", "participation"],
                  [(s.kick, s.mean_p, s.mean_p2, s.participation) for s in stats],
                  comments=[f"hbar={hbar_eff!r}"] + manifest_comments)
        kicks = [s.kick for s in stats]
        p_fit = obs.polynomial_fit(kicks[1:], [s.mean_p for s in stats[1:]], 1)
        p2_fit = obs.polynomial_fit(kicks, [s.mean_p2 for s in stats], 2)
        for name, fit in ((f"{tag}_mean_p_linear", p_fit), (f"{tag}_mean_p2_quadratic", p2_fit)):
            coeffs = list(fit.coefficients) + [0.0] * (3 - len(fit.coefficients))
            fit_rows.append((name, len(fit.coefficients) - 1, *coeffs, fit.r_squared, fit.residual_rms))
        final = ladders[-1]
        keep = np.abs(final.orders) <= cfg.max_order
        write_csv(out / f"fig3_dist22_{tag}.csv", ["order", "probability"],
                  zip(final.orders[keep], final.probabilities[keep]),
                  comments=[f"hbar={hbar_eff!r} kick={cfg.n_kicks}"])
        results[tag] = {"hbar_eff": hbar_eff, "ladders": ladders, "stats": stats,
                        "p_fit": p_fit, "p2_fit": p2_fit}
    write_csv(out / "fig3_fits.csv",
              ["series", "degree", "c0", "c1", "c2", "r_squared", "residual_rms"],
              fit_rows, comments=["mean_p fitted over kicks 2..n, mean_p2 over 1..n"])
    return results


@dataclass(frozen=True)
class ScanPoint:
    mode: str
    hbar_eff: float
    kicks: int
    abs_mean_p: float
    is_local_max: bool = False


def _scan_one(spec: ScanSpec, cfg: RunConfig, hbar_eff: float, mode: str) -> list[tuple]:
    if mode == "fixed-kick-phase":
        anchor = spec.kick_phase_anchor if spec.kick_phase_anchor is not None else 1.0
        pot = RatchetPotential(K=anchor * hbar_eff, alpha=spec.potential.alpha, phi=spec.potential.phi)
    else:
        pot = spec.potential
    grid = cfg.grid()
    params = KickedRunParams(potential=pot, hbar=EffectivePlanck(hbar_eff),
                             n_kicks=max(spec.kicks_at))
    wanted = set(spec.kicks_at)
    captured: dict[int, float] = {}

    def sink(kick: int, ladder: MomentumLadder) -> None:
        if kick in wanted:
            captured[kick] = abs(obs.mean_momentum(ladder))

    evolve(plane_wave(grid, beta=spec.beta), params, sink)
    return [(mode, hbar_eff, k, captured[k]) for k in sorted(wanted)]


def run_fig4(cfg: RunConfig, out_dir: str | Path) -> list[ScanPoint]:
    """|mean momentum| scan over the hbar_eff grid at the configured kick counts.

    fixed-k mode holds the kick strength K constant across the scan;
    fixed-kick-phase holds K/hbar_eff constant (a fixed etched mirror);
    mode `both` emits both. Local maxima are flagged per (mode, kicks) series.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = ScanSpec.from_config(cfg)
    modes = ("fixed-k", "fixed-kick-phase") if spec.mode == "both" else (spec.mode,)
    jobs = [(mode, h) for mode in modes for h in spec.hbar_values]
    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        rows_nested = list(pool.map(lambda mh: _scan_one(spec, cfg, mh[1], mh[0]), jobs))
    rows = sorted(row for batch in rows_nested for row in batch)
    # flag local maxima (plateau-tolerant) within each (mode, kicks) series
    points: list[ScanPoint] = []
    for mode in modes:
        for kicks in sorted(set(spec.kicks_at)):
            series = [r for r in rows if r[0] == mode and r[2] == kicks]
            values = [r[3] for r in series]
            for i, row in enumerate(series):
                left = values[i - 1] if i > 0 else -math.inf
                right = values[i + 1] if i + 1 < len(values) else -math.inf
                points.append(ScanPoint(mode=row[0], hbar_eff=row[1], kicks=row[2],
                                        abs_mean_p=row[3],
                                        is_local_max=values[i] >= left and values[i] >= right))
    points.sort(key=lambda p: (p.mode, p.hbar_eff, p.kicks))
    write_csv(out / "fig4_scan.csv", ["mode", "hbar", "kicks", "mean_p_final", "is_local_max"],
              [(p.mode, p.hbar_eff, p.kicks, p.abs_mean_p, int(p.is_local_max)) for p in points],
              comments=["mean_p_final is |<p>| at the stated kick count",
                        f"K={cfg.K!r} alpha={cfg.alpha!r} phi={cfg.phi!r} beta={cfg.beta!r}"])
    return points


QUANTIZATION_SWEEP = (2, 4, 8, 16, 32, 64)


def compare_engines(cfg: RunConfig, out_dir: str | Path) -> dict:
    """Quantum-ladder vs beam-bounce distributions, plus mirror quantization study.

    Rows of compare_engines.csv:
      quantum_vs_optical      per-kick L_inf and TV, ideal continuous mirror
      quantized_vs_continuous per-kick TV of the 16-level mirror bounce
      quantization_sweep      final-kick TV for n_levels in {2,4,8,16,32,64}
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_kicks = cfg.n_kicks
    quantum = quantum_kick_ladders(cfg, cfg.hbar, n_kicks)
    optical = optical_kick_ladders(cfg, cfg.hbar, n_kicks, n_levels="continuous")
    rows = []
    per_kick_linf = []
    per_kick_tv = []
    for k in range(1, n_kicks + 1):
        q, o = quantum[k - 1], optical[k - 1]
        qp = dict(zip(q.orders.tolist(), q.probabilities.tolist()))
        op = dict(zip(o.orders.tolist(), o.probabilities.tolist()))
        support = set(qp) | set(op)
        linf = max(abs(qp.get(n, 0.0) - op.get(n, 0.0)) for n in support)
        tv = obs.distribution_distance(q.orders, q.probabilities, o.orders, o.probabilities)
        per_kick_linf.append(linf)
        per_kick_tv.append(tv)
        rows.append(("quantum_vs_optical", k, "continuous", linf, tv))
    sixteen = optical_kick_ladders(cfg, cfg.hbar, n_kicks, n_levels=16)
    for k in range(1, n_kicks + 1):
        tv = obs.distribution_distance(sixteen[k - 1].orders, sixteen[k - 1].probabilities,
                                       optical[k - 1].orders, optical[k - 1].probabilities)
        rows.append(("quantized_vs_continuous", k, 16, "", tv))
    sweep_tv: dict[int, float] = {}
    for n_levels in QUANTIZATION_SWEEP:
        quant = optical_kick_ladders(cfg, cfg.hbar, n_kicks, n_levels=n_levels)
        tv = obs.distribution_distance(quant[-1].orders, quant[-1].probabilities,
                                       optical[-1].orders, optical[-1].probabilities)
        sweep_tv[n_levels] = tv
        rows.append(("quantization_sweep", n_kicks, n_levels, "", tv))
    write_csv(out / "compare_engines.csv", ["comparison", "kick", "n_levels", "l_inf", "tv"],
              rows, comments=[f"hbar={cfg.hbar!r} n_kicks={n_kicks}",
                              f"beam_width={cfg.beam_width!r} beam_periods={cfg.beam_periods}"])
    return {"per_kick_linf": per_kick_linf, "per_kick_tv": per_kick_tv, "sweep_tv": sweep_tv}


def write_manifest(cfg: RunConfig, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "run_manifest").write_text(serialize_config(cfg), encoding="utf-8")


def run_figs(cfg: RunConfig, out_dir: str | Path) -> dict:
    """End-to-end figure pipeline: fig2 + fig3 + fig4 artifacts plus manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(cfg, out)
    return {
        "fig2": run_fig2(cfg, out),
        "fig3": run_fig3(cfg, out),
        "fig4": run_fig4(cfg, out),
    }
