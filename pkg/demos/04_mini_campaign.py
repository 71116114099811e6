"""A miniature end-to-end campaign.

Runs a small BBDD scan (reduced measurement count so it finishes in a
few minutes), shows one measured spectrum with its fitted lineshape
model, and converts the bounds into d_e exclusion points.
"""

import time
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from clockdm.analysis import analysis_grid, expected_lineshape, fit_amplitude
from clockdm.campaign import CampaignConfig, run_campaign, to_exclusion
from clockdm.engine import simulate_measurement, laser_noise_dt
from clockdm.noise import NoiseConfig

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

# one measured spectrum and its fit
f_dm = 5.0
config = CampaignConfig(
    scheme="bbdd", f_dm_grid=(f_dm,), t_m=2000.0, t_p=0.25,
    n_measurements=24, sigma_ln=1e-16, analysis_points=400, seed=4,
)
params = config.dm_parameters(f_dm)
grid = analysis_grid(params, config.t_m, n_points=400)
f_c = expected_lineshape(grid, params, config.t_m)
rng = np.random.default_rng
spectrum = simulate_measurement(
    "bbdd", config.t_m, config.t_p, grid,
    rng_seq=rng(10), rng_qpn=rng(11), rng_ln=rng(12), f_pi=20.0,
    noise=NoiseConfig(sigma_ln=1e-16), ln_dt=laser_noise_dt(f_dm, config.t_p),
)
fit = fit_amplitude(spectrum, f_c, config.t_m, config.t_p)
fig, ax = plt.subplots(figsize=(7, 4))
ax.plot(grid, spectrum.phi_m, lw=0.6, label=r"measured $\phi_M(f)$ (noise only)")
ax.plot(grid, np.sqrt(fit.p1**2 * f_c**2 + fit.p2**2), "r-",
        label=rf"fit: $p_1$={fit.p1:.1f}, $p_2$={fit.p2:.1f}")
ax.set_xlabel("analysis frequency (Hz)")
ax.set_ylabel(r"$\phi_M$ (rad)")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(OUT / "measured_spectrum.png", dpi=150)

# small scan and its exclusion conversion
t0 = time.time()
scan = CampaignConfig(
    scheme="bbdd", f_dm_grid=(1.0, 3.0, 10.0, 30.0), t_m=2000.0, t_p=0.25,
    n_measurements=24, sigma_ln=1e-16, analysis_points=300, seed=5, workers=2,
)
import warnings

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    results = run_campaign(scan)
print(f"scan finished in {time.time() - t0:.0f} s")
points = [to_exclusion(r) for r in results]

fig, axes = plt.subplots(1, 2, figsize=(9, 3.8))
axes[0].loglog([r.f_dm for r in results], [r.bound_95 for r in results], "o-")
axes[0].set_xlabel(r"$f_{DM}$ (Hz)")
axes[0].set_ylabel("95% detectable amplitude")
axes[1].loglog([p.m_phi_ev for p in points], [p.d_e for p in points], "s-")
axes[1].set_xlabel(r"$m_\phi$ (eV)")
axes[1].set_ylabel(r"$d_e$ bound")
fig.suptitle("miniature BBDD scan (desk scale, 24 measurements/point)", fontsize=9)
fig.tight_layout()
fig.savefig(OUT / "mini_campaign.png", dpi=150)
print(f"wrote {OUT}/measured_spectrum.png and mini_campaign.png")
for r, p in zip(results, points):
    print(f"  f_DM = {r.f_dm:6.1f} Hz   bound = {r.bound_95:.3e}   d_e < {p.d_e:.3e}")
