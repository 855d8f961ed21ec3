"""Ro-vibrational coherence and CARS-trace modeling for thermal diatomics.

Submodules mirror the physical pipeline:

- molmodel:   term values, transition wavenumbers, characteristic times
- ensemble:   thermal rotational populations with spin alternation
- pulses:     chirped Gaussian pulses, two-photon spectra, Husimi maps
- excitation: O/Q/S line tables and branch amplitude weighting
- dynamics:   the phased line sum rho01(t) and sampled traces
- analysis:   revival detection, fraction matching, dephasing time
- fitting:    parameter retrieval from traces
- pipeline:   run configuration gluing everything together
- cli:        command-line front end
"""

from .molmodel import (
    SpectroscopicConstants,
    characteristic_times,
    load_constants,
    rotational_constants,
    rotational_term,
    transition_wavenumber,
    vibrational_term,
)
from .ensemble import ThermalEnsemble, build_ensemble, thermal_J_spread
from .pulses import Pulse, TwoPhotonSpectrum, husimi_map, spectral_amplitude, two_photon_spectrum
from .excitation import (
    LineTable,
    PolarizabilityDerivatives,
    RamanLine,
    assign_amplitudes,
    branching_ratio,
    enumerate_lines,
)
from .dynamics import CoherenceTrace, DecayModel, coherence_at, signal_trace
from .analysis import classify_fractions, dephasing_time, detect_extrema, revival_report
from .fitting import FitProblem, FitResult, fit, profile_parameter
from .pipeline import ForwardModel, RunConfig

__version__ = "0.1.0"
