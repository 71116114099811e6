"""Physical constants and natural-unit conversions.

Every unit conversion used by the package lives here so the conventions
are auditable in one place.  The simulation itself works in SI seconds
and Hz; natural (GeV-based) units appear only when converting a
sensitivity bound into a dark-matter coupling constant.
"""

import math

# CODATA-style SI values
SPEED_OF_LIGHT = 299_792_458.0            # m/s
PLANCK_H_EV = 4.135_667_696e-15           # eV s
HBAR_C_GEV_CM = 1.973_269_804e-14         # GeV cm

# Clock transition (thorium-229 isomer, 148.8 nm) and the strontium
# lattice reference used by differential spectroscopy.
CLOCK_WAVELENGTH_M = 148.8e-9
CLOCK_FREQUENCY_HZ = SPEED_OF_LIGHT / CLOCK_WAVELENGTH_M   # ~2.015e15 Hz
SR_LATTICE_FREQUENCY_HZ = 429e12

# Dark matter environment
LOCAL_DM_DENSITY_GEV_CM3 = 0.4
PLANCK_MASS_GEV = 1.220_890e19
SCALAR_PHOTON_KAPPA = math.sqrt(4.0 * math.pi) / PLANCK_MASS_GEV  # GeV^-1

# Nuclear-clock sensitivity coefficient to fine-structure-constant variation
DEFAULT_DELTA_K = 1.0e4


def mass_ev_from_frequency(f_dm_hz):
    """Scalar particle mass (eV) at Compton frequency ``f_dm_hz``."""
    return PLANCK_H_EV * f_dm_hz


def frequency_from_mass_ev(mass_ev):
    """Compton frequency (Hz) of a scalar of mass ``mass_ev`` (eV)."""
    return mass_ev / PLANCK_H_EV


def dm_density_gev4(rho_gev_cm3):
    """Convert an energy density from GeV/cm^3 to GeV^4."""
    return rho_gev_cm3 * HBAR_C_GEV_CM**3


def field_amplitude_gev(f_dm_hz, rho_gev_cm3=LOCAL_DM_DENSITY_GEV_CM3):
    """Effective scalar field amplitude sqrt(2 rho)/m_phi in GeV.

    This is the oscillation amplitude of the galactic field for a particle
    whose Compton frequency is ``f_dm_hz``, at local density ``rho``.
    """
    m_phi_gev = mass_ev_from_frequency(f_dm_hz) * 1e-9
    return math.sqrt(2.0 * dm_density_gev4(rho_gev_cm3)) / m_phi_gev


def coupling_from_fractional_amplitude(fractional_amplitude, f_dm_hz,
                                       delta_k=DEFAULT_DELTA_K,
                                       rho_gev_cm3=LOCAL_DM_DENSITY_GEV_CM3,
                                       overdensity=1.0):
    """Scalar-photon coupling d_e reachable at a given fractional amplitude.

    ``fractional_amplitude`` is the dimensionless detectable amplitude of
    the clock-frequency oscillation (delta nu / nu_0).  The chain is
    delta nu/nu_0 = delta_k * d_e * kappa * Phi_0, inverted for d_e.
    """
    phi0 = field_amplitude_gev(f_dm_hz, rho_gev_cm3 * overdensity)
    return fractional_amplitude / (delta_k * SCALAR_PHOTON_KAPPA * phi0)
