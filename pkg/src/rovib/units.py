"""Unit conventions used throughout the package.

Spectroscopic quantities are wavenumbers in cm^-1.  Dynamics run in
picoseconds, pulse-level quantities in femtoseconds.  Phases are always
formed as 2*pi*c*nu*t with the conversion constants below, which keeps
every intermediate number at a comfortable floating-point scale (no
Joule-scale energies anywhere).
"""

import math

#: speed of light in cm per picosecond
C_CM_PER_PS = 0.0299792458

#: speed of light in cm per femtosecond
C_CM_PER_FS = C_CM_PER_PS * 1e-3

#: second radiation constant hc/k in cm*K (for Boltzmann factors on cm^-1 energies)
HC_OVER_K_CM_K = 1.4387769

TWO_PI = 2.0 * math.pi

#: Gaussian intensity-profile time-bandwidth product (FWHM * FWHM)
GAUSSIAN_TBP = 2.0 * math.log(2.0) / math.pi


def angular_per_fs(nu_cm1):
    """Convert a wavenumber (cm^-1) to angular frequency in rad/fs."""
    return TWO_PI * C_CM_PER_FS * nu_cm1


def fwhm_to_sigma(fwhm):
    """Standard deviation of a Gaussian with the given full width at half maximum."""
    return fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
