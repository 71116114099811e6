"""Flicker laser noise from the state-space generator.

A trace, its Allan deviation (flat at sigma_LN), and its power spectral
density (slope -1) — the generator's two defining properties — plus the
white differential-spectroscopy noise for contrast.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from clockdm.noise import NoiseConfig, build_mandelbrot, ds_effective_noise, generate_noise
from clockdm.stability import averaged_periodogram, overlapping_allan_deviation

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

sigma_ln = 1e-16
config = NoiseConfig(sigma_ln=sigma_ln)
dt = 0.01
rng = np.random.default_rng(3)

traces = []
for _ in range(10):
    model = build_mandelbrot(config, dt)
    traces.append(sigma_ln * generate_noise(model, 1 << 17, rng))

fig, axes = plt.subplots(1, 3, figsize=(11, 3.6))
t = np.arange(1 << 14) * dt
axes[0].plot(t, traces[0][: 1 << 14], lw=0.4)
axes[0].set_xlabel("time (s)")
axes[0].set_ylabel("fractional frequency")
axes[0].set_title("flicker trace")

taus = np.geomspace(0.05, 200.0, 16)
devs = np.array([overlapping_allan_deviation(tr, dt, taus)[1] for tr in traces])
tau_used = overlapping_allan_deviation(traces[0], dt, taus)[0]
white = ds_effective_noise(1000, 1.0, rng, n_intervals=200_000)
tau_w, dev_w = overlapping_allan_deviation(white, 1.0, taus[taus >= 1.0])
axes[1].loglog(tau_used, devs.mean(axis=0), "o-", ms=3, label="flicker laser noise")
axes[1].loglog(tau_w, dev_w, "s-", ms=3, label="DS lattice QPN (white)")
axes[1].axhline(sigma_ln, color="k", lw=0.6, ls=":")
axes[1].set_xlabel("averaging time (s)")
axes[1].set_ylabel("Allan deviation")
axes[1].legend(fontsize=7)

f, psd = averaged_periodogram(traces, dt)
axes[2].loglog(f, psd, lw=0.5)
ref = psd[np.searchsorted(f, 0.1)] * (0.1 / f)
axes[2].loglog(f, ref, "k:", lw=0.8, label="1/f")
axes[2].set_xlabel("frequency (Hz)")
axes[2].set_ylabel("PSD")
axes[2].legend(fontsize=7)
fig.tight_layout()
fig.savefig(OUT / "laser_noise.png", dpi=150)
print(f"wrote {OUT}/laser_noise.png")
