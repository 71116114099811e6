"""Sensitivity functions of the three interrogation protocols.

Draws g(t) for a Ramsey, an NBDD and a BBDD probe, then scans the
response power g_I^2 + g_Q^2 against oscillation frequency to show the
narrowband lock-in peak at f_pi/2 and the flat broadband response.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from clockdm.sequences import (
    build_bbdd,
    build_nbdd,
    build_ramsey,
    complex_response,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

rng = np.random.default_rng(1)
t_p = 1.0
probes = {
    "Ramsey (DS)": build_ramsey(0.5, t_p),
    "NBDD, f_pi = 4 Hz": build_nbdd(0.5, t_p, 4.0),
    "BBDD, f_pi = 20 Hz": build_bbdd(0.5, t_p, 20.0, rng),
}

fig, axes = plt.subplots(len(probes), 1, figsize=(7, 5), sharex=True)
t = np.linspace(0.0, t_p, 2001)
for ax, (label, seq) in zip(axes, probes.items()):
    ax.step(t, seq.sensitivity(t), where="post", lw=1.2)
    ax.set_ylim(-1.4, 1.4)
    ax.set_ylabel("g(t)")
    ax.set_title(label, fontsize=9, loc="left")
axes[-1].set_xlabel("time within probe (s)")
fig.tight_layout()
fig.savefig(OUT / "sensitivity_functions.png", dpi=150)

# response power vs frequency, averaged over random NBDD/BBDD draws
f = np.geomspace(0.05, 50.0, 400)
fig, ax = plt.subplots(figsize=(7, 4))
ramsey = np.abs(complex_response(build_ramsey(0.5, t_p), f)) ** 2
ax.loglog(f, ramsey, label="Ramsey")
for label, builder in [
    ("NBDD (f_pi in [2, 5] Hz)", lambda r: build_nbdd(0.5, t_p, r.uniform(2.0, 5.0))),
    ("BBDD (f_pi = 20 Hz)", lambda r: build_bbdd(0.5, 0.25, 20.0, r)),
]:
    power = np.zeros_like(f)
    for _ in range(200):
        power += np.abs(complex_response(builder(rng), f)) ** 2
    ax.loglog(f, power / 200, label=label)
ax.set_xlabel("oscillation frequency (Hz)")
ax.set_ylabel(r"$\langle g_I^2 + g_Q^2 \rangle$ (s$^2$)")
ax.set_ylim(1e-8, 3.0)
ax.legend(fontsize=8)
ax.set_title("Ramsey notches at k/T_p; NBDD lock-in near f_pi/2; BBDD broadband")
fig.tight_layout()
fig.savefig(OUT / "response_power.png", dpi=150)
print(f"wrote {OUT}/sensitivity_functions.png and response_power.png")
