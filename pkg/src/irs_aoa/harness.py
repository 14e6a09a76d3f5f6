"""Scenario generation, Monte Carlo error-probability runs and report files.

Every trial draws its scenario from ``SeedSequence([seed, trial])`` and its
schedule/noise for a given block layout from
``SeedSequence([seed, trial, L, Q])``, so results do not depend on how trials
are distributed over workers and all methods see the same snapshots.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .channel import ChannelRealization, PathLossModel, path_loss
from .estimator import estimate_aoas, make_grid
from .geometry import ArrayGeometry, Position2D, aoa_from_positions, distance
from .synthesis import make_schedule, observe, snr_to_noise_power

log = logging.getLogger(__name__)

METHODS = ("music", "capon")
REPORT_COLUMNS = ("method", "L", "Q", "snr_db", "trials", "errors", "error_probability")
MAX_REDRAWS = 1000


@dataclass
class ScenarioConfig:
    """Everything that defines an experiment. Defaults follow the reference layout.

    ``snr_db`` may be ``inf`` for noiseless runs. ``pinned_aoas`` replaces the
    random user draw with fixed angles. ``axis`` is +1 when both arrays point
    along +x and -1 when they point along -x.
    """

    bs_pos: tuple = (0.0, 0.0)
    irs_pos: tuple = (50.0, -50.0)
    user_center: tuple = (20.0, -20.0)
    user_radius: float = 30.0
    K: int = 3
    I: int = 128
    M: int = 8
    irs_spacing: float = 0.5
    bs_spacing: float = 0.5
    L: int = 6
    Q: int = 4
    snr_db: float = 10.0
    path_loss: str = "unit"
    wavelength: float = 0.1
    grid_step: float = 0.1
    refine_levels: int = 2
    loading: float | None = None
    seed: int = 0
    trials: int = 1000
    error_threshold_deg: float = 1.0
    min_separation_deg: float = 2.0
    axis: int = 1
    antenna: int = 0
    pinned_aoas: tuple | None = None

    def __post_init__(self):
        for name in ("bs_pos", "irs_pos", "user_center"):
            setattr(self, name, Position2D(*map(float, getattr(self, name))))
        if self.pinned_aoas is not None:
            self.pinned_aoas = tuple(float(a) for a in self.pinned_aoas)
            self.K = len(self.pinned_aoas)
        self.snr_db = float(self.snr_db)
        if not self.user_radius > 0:
            raise ValueError("user_radius must be > 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.error_threshold_deg > 0:
            raise ValueError("error_threshold_deg must be > 0")
        if self.K < 1 or self.I < 1 or self.M < 1 or self.L < 1 or self.Q < 1:
            raise ValueError("K, I, M, L, Q must all be >= 1")
        if not 0 <= self.antenna < self.M:
            raise ValueError(f"antenna index {self.antenna} out of range for M={self.M}")

    @property
    def irs_geom(self) -> ArrayGeometry:
        return ArrayGeometry(self.I, self.irs_spacing)

    @property
    def bs_geom(self) -> ArrayGeometry:
        return ArrayGeometry(self.M, self.bs_spacing)

    @property
    def grid(self) -> np.ndarray:
        return make_grid(self.grid_step)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        if math.isinf(d["snr_db"]):
            d["snr_db"] = "inf"
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        path = Path(path)
        try:
            return cls.from_dict(json.loads(path.read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config {path}: {exc}") from exc


def uniform_disk_point(center, radius, rng) -> Position2D:
    r = radius * math.sqrt(rng.uniform())
    a = rng.uniform(0.0, 2.0 * math.pi)
    return Position2D(center[0] + r * math.cos(a), center[1] + r * math.sin(a))


def draw_scenario(cfg: ScenarioConfig, rng: np.random.Generator):
    """One channel realization with users area-uniform in the disk.

    A user whose angle falls within ``min_separation_deg`` of an already
    placed user is redrawn, at most ``MAX_REDRAWS`` times in total.
    Returns ``(realization, true_aoas)``.
    """
    model = PathLossModel(cfg.path_loss, cfg.wavelength)
    if cfg.pinned_aoas is not None:
        thetas = np.array(cfg.pinned_aoas)
        betas = np.array([path_loss(model, distance(cfg.irs_pos, cfg.user_center), rng)
                          for _ in thetas])
    else:
        thetas, betas, redraws = [], [], 0
        while len(thetas) < cfg.K:
            pos = uniform_disk_point(cfg.user_center, cfg.user_radius, rng)
            th = aoa_from_positions(cfg.irs_pos, pos, cfg.axis)
            if any(abs(th - t) < cfg.min_separation_deg for t in thetas):
                redraws += 1
                if redraws > MAX_REDRAWS:
                    raise RuntimeError(
                        f"could not place {cfg.K} users {cfg.min_separation_deg} deg apart "
                        f"after {MAX_REDRAWS} redraws"
                    )
                continue
            thetas.append(th)
            betas.append(path_loss(model, distance(cfg.irs_pos, pos), rng))
        thetas, betas = np.array(thetas), np.array(betas)
    real = ChannelRealization(
        thetas=thetas,
        betas=betas,
        gamma=aoa_from_positions(cfg.irs_pos, cfg.bs_pos, cfg.axis),
        varphi=aoa_from_positions(cfg.bs_pos, cfg.irs_pos, cfg.axis),
        delta=path_loss(model, distance(cfg.irs_pos, cfg.bs_pos), rng),
        irs_geom=cfg.irs_geom,
        bs_geom=cfg.bs_geom,
        min_separation_deg=cfg.min_separation_deg if cfg.pinned_aoas is None else 0.0,
    )
    return real, real.thetas


def match_estimates(truth, estimates):
    """Pair estimates with true angles minimising the total absolute error.

    Returns ``(errors, assignment)``, both aligned with ``truth``. Unmatched
    truths get error ``inf`` and assignment ``-1``.
    """
    truth = np.asarray(truth, dtype=float)
    est = np.asarray(estimates, dtype=float)
    if est.size > truth.size:
        raise ValueError("more estimates than true angles")
    errors = np.full(truth.size, np.inf)
    assignment = np.full(truth.size, -1, dtype=int)
    if est.size:
        rows, cols = linear_sum_assignment(np.abs(truth[:, None] - est[None, :]))
        errors[rows] = np.abs(truth[rows] - est[cols])
        assignment[rows] = cols
    return errors, assignment


@dataclass
class TrialOutcome:
    trial: int
    method: str
    L: int
    Q: int
    true_aoas: np.ndarray
    estimated_aoas: np.ndarray
    errors: np.ndarray
    error_event: bool
    failure: str | None = None


def is_error_event(errors, threshold) -> bool:
    return bool(np.any(~(np.asarray(errors) < threshold)))


def _trial_rngs(seed, trial, L=None, Q=None):
    key = [int(seed), int(trial)] if L is None else [int(seed), int(trial), int(L), int(Q)]
    return np.random.default_rng(np.random.SeedSequence(key))


def run_trial(cfg: ScenarioConfig, trial: int, methods, cells) -> list[TrialOutcome]:
    """All (method, L, Q) outcomes for one scenario draw."""
    real, truth = draw_scenario(cfg, _trial_rngs(cfg.seed, trial))
    out = []
    for L, Q in cells:
        rng = _trial_rngs(cfg.seed, trial, L, Q)
        obs = None
        try:
            sched = make_schedule(cfg.K, L, Q, cfg.I, rng)
            sigma2 = snr_to_noise_power(cfg.snr_db, real, sched)
            obs = observe(real, sched, sigma2, rng, antenna=cfg.antenna)
        except ValueError as exc:
            setup_error = str(exc)
        for method in methods:
            failure = None
            if obs is None:
                failure, est = setup_error, np.zeros(0)
            else:
                try:
                    res = estimate_aoas(obs, cfg.K, method, cfg.grid, cfg.refine_levels, cfg.loading)
                    est = res.estimates
                except (ValueError, np.linalg.LinAlgError) as exc:
                    failure, est = str(exc), np.zeros(0)
            if failure:
                log.warning("trial %d %s L=%d Q=%d failed: %s", trial, method, L, Q, failure)
            errors, _ = match_estimates(truth, est)
            out.append(TrialOutcome(
                trial, method, L, Q, truth, est, errors,
                is_error_event(errors, cfg.error_threshold_deg), failure,
            ))
    return out


def _run_chunk(args):
    cfg, trials, methods, cells = args
    return [o for t in trials for o in run_trial(cfg, t, methods, cells)]


@dataclass
class ExperimentReport:
    method: str
    L: int
    Q: int
    snr_db: float
    trials: int
    errors: int
    config: dict = field(repr=False)
    outcomes: list = field(default_factory=list, repr=False)
    wall_clock_s: float = 0.0

    @property
    def error_probability(self) -> float:
        return self.errors / self.trials

    def row(self) -> dict:
        return {
            "method": self.method, "L": self.L, "Q": self.Q, "snr_db": repr(float(self.snr_db)),
            "trials": self.trials, "errors": self.errors,
            "error_probability": repr(self.error_probability),
        }


def run_montecarlo(
    cfg: ScenarioConfig,
    methods=("music",),
    sweep=None,
    workers: int = 1,
    keep_outcomes: bool = True,
) -> list[ExperimentReport]:
    """Error probability per (method, L, Q) cell over ``cfg.trials`` paired trials.

    ``sweep`` is a list of ``(L, Q)`` pairs, default ``[(cfg.L, cfg.Q)]``.
    Reports come back ordered by sweep cell, then method.
    """
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    cells = [(int(L), int(Q)) for L, Q in (sweep or [(cfg.L, cfg.Q)])]
    t0 = time.perf_counter()
    trial_ids = list(range(cfg.trials))
    if workers <= 1:
        outcomes = _run_chunk((cfg, trial_ids, methods, cells))
    else:
        chunks = [trial_ids[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_chunk, [(cfg, c, methods, cells) for c in chunks])
            outcomes = [o for part in parts for o in part]
    outcomes.sort(key=lambda o: o.trial)
    elapsed = time.perf_counter() - t0
    reports = []
    for L, Q in cells:
        for m in methods:
            cell = [o for o in outcomes if o.method == m and o.L == L and o.Q == Q]
            reports.append(ExperimentReport(
                method=m, L=L, Q=Q, snr_db=cfg.snr_db, trials=cfg.trials,
                errors=sum(o.error_event for o in cell), config=cfg.to_dict(),
                outcomes=cell if keep_outcomes else [], wall_clock_s=elapsed,
            ))
    return reports


def calibrate_snr(
    cfg: ScenarioConfig,
    target: float = 0.004,
    method: str = "music",
    L: int = 6,
    Q: int = 4,
    lo: float = 0.0,
    hi: float = 50.0,
    iterations: int = 10,
    workers: int = 1,
):
    """Smallest SNR (to bisection precision) where ``method`` at (L, Q) meets ``target``.

    Trials use common random numbers across SNR values, so the error count is
    close to monotone in SNR. Returns ``(snr_db, error_probability)``.
    """
    def errprob(snr):
        rep = run_montecarlo(cfg.replace(snr_db=snr), (method,), [(L, Q)], workers, keep_outcomes=False)
        return rep[0].error_probability

    p_hi = errprob(hi)
    if p_hi > target:
        raise RuntimeError(f"target {target} not reached even at {hi} dB (got {p_hi})")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        p = errprob(mid)
        if p <= target:
            hi, p_hi = mid, p
        else:
            lo = mid
    return hi, p_hi


def emit_report(reports, out_dir, cfg: ScenarioConfig | None = None, extra: dict | None = None):
    """Write ``report.csv`` and ``manifest.json`` into ``out_dir``.

    The CSV holds only deterministic quantities; timing and environment go to
    the manifest.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / "report.csv"
        with csv_path.open("w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=REPORT_COLUMNS, lineterminator="\n")
            w.writeheader()
            for r in reports:
                w.writerow(r.row())
        manifest = {
            "config": cfg.to_dict() if cfg is not None else (reports[0].config if reports else None),
            "seed": cfg.seed if cfg is not None else None,
            "cells": [dict(r.row(), wall_clock_s=r.wall_clock_s) for r in reports],
            "versions": {"python": platform.python_version(), "numpy": np.__version__,
                         "scipy": __import__("scipy").__version__},
            "created_unix": time.time(),
        }
        if extra:
            manifest.update(extra)
        manifest_path = out_dir / "manifest.json"
        manifest_path.write_text(json.dumps(manifest, indent=2))
    except OSError as exc:
        raise OSError(f"cannot write report to {out_dir}: {exc}") from exc
    return csv_path, manifest_path


def read_report(path) -> list[dict]:
    with Path(path).open(newline="") as f:
        return list(csv.DictReader(f))


@dataclass
class SpectrumRun:
    truth: np.ndarray
    result: object
    grid: np.ndarray
    normalized: np.ndarray
    snr_db: float


def run_spectrum(cfg: ScenarioConfig, out_dir=None, method: str = "music") -> SpectrumRun:
    """Single scenario (trial 0 of ``cfg.seed``) with the normalized spectrum.

    Writes ``spectrum.csv`` (angle_deg, normalized_power) and ``peaks.csv``
    when ``out_dir`` is given.
    """
    real, truth = draw_scenario(cfg, _trial_rngs(cfg.seed, 0))
    rng = _trial_rngs(cfg.seed, 0, cfg.L, cfg.Q)
    sched = make_schedule(cfg.K, cfg.L, cfg.Q, cfg.I, rng)
    obs = observe(real, sched, snr_to_noise_power(cfg.snr_db, real, sched), rng, cfg.antenna)
    res = estimate_aoas(obs, cfg.K, method, cfg.grid, cfg.refine_levels, cfg.loading)
    run = SpectrumRun(truth, res, res.spectrum.grid, res.spectrum.normalized, cfg.snr_db)
    if out_dir is not None:
        write_spectrum(run, out_dir)
    return run


def write_spectrum(run: SpectrumRun, out_dir):
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with (out_dir / "spectrum.csv").open("w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(("angle_deg", "normalized_power"))
            for a, p in zip(run.grid, run.normalized):
                w.writerow((f"{a:.4f}", repr(float(p))))
        errors, assignment = match_estimates(run.truth, run.result.estimates)
        with (out_dir / "peaks.csv").open("w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(("rank", "angle_deg", "value", "matched_truth_deg", "abs_error_deg"))
            inv = {int(j): i for i, j in enumerate(assignment) if j >= 0}
            for r, (a, v) in enumerate(run.result.spectrum.peaks):
                i = inv.get(r)
                t = f"{run.truth[i]:.4f}" if i is not None else ""
                e = f"{errors[i]:.4f}" if i is not None else ""
                w.writerow((r, f"{a:.4f}", repr(float(v)), t, e))
    except OSError as exc:
        raise OSError(f"cannot write spectrum to {out_dir}: {exc}") from exc
    return out_dir / "spectrum.csv"


def read_spectrum(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]
