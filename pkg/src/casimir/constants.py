"""Physical constants and unit conversions.

Internal unit system: energies in eV (frequencies are given as hbar*omega,
so "frequency in eV" means the photon energy), lengths in nm, temperatures
in K.  CODATA 2018 exact values where applicable.
"""

import math

HBAR_C_EV_NM: float = 197.3269804  # eV nm
KB_EV_PER_K: float = 8.617333262e-5  # eV / K
EV_J: float = 1.602176634e-19  # J per eV (exact)

# 1 eV/nm^3 in Pa and 1 eV/nm^2 in J/m^2.
EV_PER_NM3_TO_PA: float = EV_J / 1e-27
EV_PER_NM2_TO_J_PER_M2: float = EV_J / 1e-18


def matsubara_frequency(temperature_k: float, index: int) -> float:
    """Thermal photon energy 2*pi*k_B*T*l in eV for Matsubara index l."""
    if index < 0:
        raise ValueError(f"Matsubara index must be >= 0, got {index}")
    return 2.0 * math.pi * KB_EV_PER_K * temperature_k * index
