"""Normalized MUSIC spectrum for three users at fixed angles.

Runs the single-scenario pipeline at two SNRs and writes the normalized
spectrum (angle, P / max P) next to this script. A plot is drawn when
matplotlib is installed.
"""

from pathlib import Path

from irs_aoa import ScenarioConfig, match_estimates, run_spectrum

AOAS = (72.9078, 34.0409, 19.3314)
out = Path(__file__).with_name("out")

runs = {}
for snr in (10.0, 30.0):
    cfg = ScenarioConfig(pinned_aoas=AOAS, I=128, L=6, Q=4, snr_db=snr, seed=0)
    run = run_spectrum(cfg, out / f"spectrum_{snr:g}dB")
    errors, _ = match_estimates(run.truth, run.result.estimates)
    runs[snr] = run
    print(f"{snr:4.0f} dB  estimates {sorted(run.result.estimates.round(3).tolist())}  max error {errors.max():.3f} deg")

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for snr, run in runs.items():
        ax.semilogy(run.grid, run.normalized, label=f"{snr:g} dB")
    for a in AOAS:
        ax.axvline(a, color="k", lw=0.6, ls="--")
    ax.set_xlabel("angle (deg)")
    ax.set_ylabel("normalized spectrum")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "spectrum.png", dpi=120)
    print("wrote", out / "spectrum.png")
