"""MUSIC vs Capon error probability on paired trials.

The SNR is first calibrated so MUSIC with L=6, Q=4 reaches 0.4 % error
probability; both methods then run on identical snapshots for Q=4 and Q=12.
Pass ``--trials 5000`` for a full-scale run (a few minutes).
"""

import argparse

from irs_aoa import ScenarioConfig, calibrate_snr, emit_report, run_montecarlo

parser = argparse.ArgumentParser()
parser.add_argument("--trials", type=int, default=500)
parser.add_argument("--workers", type=int, default=1)
args = parser.parse_args()

cfg = ScenarioConfig(trials=args.trials, seed=0)
snr, p = calibrate_snr(cfg.replace(seed=1000), 0.004, lo=10.0, hi=50.0, iterations=8, workers=args.workers)
print(f"calibrated SNR: {snr:.2f} dB (error probability {p:.4f} on the calibration trials)")

reports = run_montecarlo(cfg.replace(snr_db=snr), ("music", "capon"), [(6, 4), (6, 8), (6, 12)],
                         workers=args.workers, keep_outcomes=False)
for r in reports:
    print(f"{r.method:6s} L={r.L} Q={r.Q:2d}  {r.errors:4d}/{r.trials}  p={r.error_probability:.4f}")
csv_path, _ = emit_report(reports, "out/error_probability", cfg.replace(snr_db=snr))
print("wrote", csv_path)
