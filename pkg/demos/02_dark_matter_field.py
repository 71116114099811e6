"""Stochastic dark-matter field realizations.

Shows the one-sided lineshape, checks a synthesized ensemble against the
target spectral density, and contrasts per-probe amplitude/phase drift
in the coherent (T_m << tau_c) and decohered (T_m ~ tau_c) regimes.

The coherence is scaled down from the physical 1e6 oscillation periods
so the line is resolvable in seconds of runtime.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from clockdm.dmfield import DmParameters, lineshape, synthesize_realization, target_psd

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

params = DmParameters(f_dm=10.0, coherence_periods=200.0)
rng = np.random.default_rng(2)

# lineshape: zero below threshold, asymmetric exponential tail above
u = np.linspace(-1.0, 12.0, 1200)
omega = params.omega_dm + u / params.tau_c
fig, ax = plt.subplots(figsize=(7, 3.5))
ax.plot(u, lineshape(omega, params) / params.tau_c)
ax.set_xlabel(r"$(\omega - 2\pi f_{DM})\,\tau_c$")
ax.set_ylabel(r"$F(\omega)/\tau_c$")
ax.set_title("one-sided Doppler-broadened lineshape")
fig.tight_layout()
fig.savefig(OUT / "lineshape.png", dpi=150)

# ensemble periodogram vs the target PSD
accum = None
for _ in range(200):
    r = synthesize_realization(params, t_m=10.0, t_p=1.0, rng=rng)
    _, nu = r.time_series()
    spec = np.abs(np.fft.rfft(nu)) ** 2
    accum = spec if accum is None else accum + spec
accum /= 200
freqs = np.fft.rfftfreq(r.n_f, d=r.dt)
target = np.zeros_like(accum)
target[r.bins] = target_psd(params, r.n_f, r.bins)
band = slice(r.bins[0] - 20, r.bins[-1] + 20)
fig, ax = plt.subplots(figsize=(7, 4))
ax.semilogy(freqs[band], accum[band], lw=0.7, label="ensemble periodogram (200)")
ax.semilogy(freqs[band], target[band], "--", label="target PSD")
ax.set_xlabel("frequency (Hz)")
ax.set_ylabel(r"$\langle|\tilde\phi_p|^2\rangle$")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "field_psd.png", dpi=150)

# probe-local amplitude and phase in two coherence regimes
fig, axes = plt.subplots(2, 2, figsize=(8, 5), sharex="col")
for col, t_m in enumerate((0.05 * params.tau_c, 2.0 * params.tau_c)):
    r = synthesize_realization(params, t_m=t_m, t_p=t_m / 100.0, rng=rng)
    axes[0, col].plot(r.probe_centers / params.tau_c, r.nu_s / params.phi0)
    axes[1, col].plot(r.probe_centers / params.tau_c, np.unwrap(r.theta))
    axes[0, col].set_title(f"T_m = {t_m / params.tau_c:g} tau_c", fontsize=9)
    axes[1, col].set_xlabel(r"$t_j/\tau_c$")
axes[0, 0].set_ylabel(r"$\nu_{S,j}/\Phi_0$")
axes[1, 0].set_ylabel(r"$\theta_j$ (rad)")
fig.tight_layout()
fig.savefig(OUT / "coherence_regimes.png", dpi=150)
print(f"wrote {OUT}/lineshape.png, field_psd.png, coherence_regimes.png")
