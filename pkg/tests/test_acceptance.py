"""Exit criteria. Each test prints one ``ACCEPTANCE <n> PASS|FAIL`` line."""

import hashlib
import math
import time

import numpy as np
import pytest

from conftest import assert_hermitian_psd
from irs_aoa.channel import ChannelRealization
from irs_aoa.cli import main as cli_main
from irs_aoa.estimator import VirtualManifold, condition_diagnostics, numerical_rank, sample_covariance, virtual_steering
from irs_aoa.geometry import ArrayGeometry, steering_vector
from irs_aoa.harness import ScenarioConfig, calibrate_snr, match_estimates, read_spectrum, run_montecarlo, run_spectrum
from irs_aoa.synthesis import generate_irs_patterns, make_schedule, synthesize_bs_signal

FIG3_AOAS = (72.9078, 34.0409, 19.3314)


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
        return ok
    return _report


def test_1_noiseless_oracle_recovery(report):
    t0 = time.perf_counter()
    cfg = ScenarioConfig(K=3, I=32, M=4, L=6, Q=4, snr_db=math.inf, trials=100, seed=0)
    rep = run_montecarlo(cfg, ("music",))[0]
    worst = max(float(np.max(o.errors)) for o in rep.outcomes)
    elapsed = time.perf_counter() - t0
    ok = rep.errors == 0 and worst <= 0.01 and elapsed < 60
    report(1, ok, f"error events {rep.errors}/100, worst error {worst:.5f} deg, {elapsed:.1f} s")
    assert ok


def test_2_pinned_three_user_spectrum(report, tmp_path):
    t0 = time.perf_counter()
    cfg = ScenarioConfig(pinned_aoas=FIG3_AOAS, I=128, L=6, Q=4, snr_db=10.0)
    run = run_spectrum(cfg, tmp_path)
    errors, _ = match_estimates(run.truth, run.result.estimates)
    angles, p = read_spectrum(tmp_path / "spectrum.csv")
    elapsed = time.perf_counter() - t0
    exported = angles.size == run.grid.size and p.max() == 1.0 and p.min() >= 0
    ok = bool(np.all(errors <= 0.5)) and exported and elapsed < 10
    report(2, ok, f"estimates {np.round(run.result.estimates, 4).tolist()} errors "
                  f"{np.round(errors, 4).tolist()} at {cfg.snr_db} dB, {elapsed:.1f} s")
    assert ok


def test_3_error_probability_trend(report):
    t0 = time.perf_counter()
    base = ScenarioConfig(L=6, Q=4, trials=2000)
    snr, p_cal = calibrate_snr(base.replace(seed=1000), 0.004, "music", 6, 4, lo=10.0, hi=50.0, iterations=8)
    cfg = base.replace(snr_db=snr, seed=0)
    music4, capon4, _, capon12 = run_montecarlo(
        cfg, ("music", "capon"), [(6, 4), (6, 12)], keep_outcomes=False
    )
    pm, pc4, pc12 = music4.error_probability, capon4.error_probability, capon12.error_probability
    elapsed = time.perf_counter() - t0
    within3 = min(pm, pc12) > 0 and max(pm, pc12) <= 3 * min(pm, pc12)
    ok = pm <= 0.01 and pc4 > pm and within3 and elapsed < 900
    report(3, ok, f"calibrated SNR {snr:.2f} dB (calibration p={p_cal:.4f}); music L6Q4 {pm:.4f}, "
                  f"capon L6Q4 {pc4:.4f}, capon L6Q12 {pc12:.4f}; {elapsed:.0f} s")
    assert ok


def test_4_spatial_degeneracy(report):
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        K = int(rng.integers(1, 5))
        I, M = int(rng.integers(2, 65)), int(rng.integers(2, 9))
        real = ChannelRealization(
            thetas=np.sort(rng.choice(np.arange(1.0, 179.0, 2.0), K, replace=False)),
            betas=np.exp(1j * rng.uniform(0, 6.3, K)) * rng.uniform(0.1, 2, K),
            gamma=rng.uniform(0, 180), varphi=rng.uniform(0, 180),
            delta=complex(*rng.standard_normal(2)),
            irs_geom=ArrayGeometry(I, rng.uniform(0.1, 0.5)), bs_geom=ArrayGeometry(M, rng.uniform(0.1, 0.5)),
        )
        sched = make_schedule(K, K + 1 + int(rng.integers(0, 4)), int(rng.integers(1, 6)), I, rng)
        y = synthesize_bs_signal(real, sched, 0.0)
        c = steering_vector(real.bs_geom, real.varphi)
        for m in range(1, M):
            pred = c[m] / c[0] * y[:, 0]
            worst = max(worst, float(np.max(np.abs(y[:, m] - pred) / np.abs(y[:, m]))))
    ok = worst < 1e-10
    report(4, ok, f"worst relative deviation from antenna ratio {worst:.2e} over 100 configurations")
    assert ok


def test_5_rank_conditions(report):
    full = 0
    collapsed = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        thetas = rng.choice(np.arange(0.5, 179.5, 0.5), 3, replace=False)
        gamma = rng.uniform(0, 180)
        m = VirtualManifold(gamma, generate_irs_patterns(128, 6, rng), ArrayGeometry(128))
        full += numerical_rank(virtual_steering(m, thetas)) == 3
        same = VirtualManifold(gamma, np.tile(generate_irs_patterns(128, 1, rng), (6, 1)), ArrayGeometry(128))
        diag = condition_diagnostics(same, thetas)
        collapsed += numerical_rank(virtual_steering(same, thetas)) == 1 and diag.rank == 1 and not diag.ok
    ok = full == 100 and collapsed == 100
    report(5, ok, f"rank K with random patterns {full}/100; identical patterns collapse+flag {collapsed}/100")
    assert ok


def test_6_covariance_statistics(report, rng):
    sigma2, L, Q = 0.37, 6, 10_000
    worst = 0.0
    for _ in range(5):
        Y = np.sqrt(sigma2 / 2) * (rng.standard_normal((Q, L)) + 1j * rng.standard_normal((Q, L)))
        S = sample_covariance(Y)
        assert_hermitian_psd(S)
        w = np.linalg.eigvalsh(S)
        worst = max(worst, float(np.max(np.abs(w - sigma2)) / sigma2))
    ok = worst < 0.2
    report(6, ok, f"worst eigenvalue deviation {100 * worst:.2f}% of noise power (limit 20%)")
    assert ok


def test_7_determinism(report, tmp_path):
    args = ["montecarlo", "--I", "64", "--trials", "40", "--snr-db", "18", "--seed", "42",
            "--methods", "music,capon", "--sweep", "L=6,Q=4", "--sweep", "L=6,Q=12"]
    digests = []
    for run, workers in enumerate((1, 1, 2)):
        out = tmp_path / f"run{run}"
        assert cli_main(args + ["--workers", str(workers), "--out", str(out)]) == 0
        digests.append(hashlib.sha256((out / "report.csv").read_bytes()).hexdigest())
    ok = len(set(digests)) == 1
    report(7, ok, f"report.csv sha256 {digests[0][:16]}... identical across 2 runs and worker counts 1/2: {ok}")
    assert ok
