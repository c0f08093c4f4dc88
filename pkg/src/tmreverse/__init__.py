"""Blind time reversal of optical pulse envelopes by pumped frequency conversion.

The package simulates the local-time coupled-mode equations of a
short-pump conversion collision, cross-checks them against the
closed-form beam-splitter solution and the first-order spectral theory,
models the quantum temporal-mode layer, and computes phase-matching and
dispersion designs for real media.
"""

from .analytic import (ConversionCoeffs, PumpPulse, ThreeWaveParams,
                       apply_io_map, check_reversal_conditions,
                       conversion_coeffs, pump_area)
from .envelope import (ComplexEnvelope, SpectralAmplitude, TimeGrid,
                       duration_rms, envelope_reverse, fidelity,
                       inverse_spectral_transform, overlap, parity_decompose,
                       rescale_time, spectral_transform, width_1e)
from .perturbative import (TransferSetup, delta_limit_check, first_order_output,
                           mirror_overlap, phase_matching_function,
                           phase_mismatch)
from .quantum import (SorterOutput, TwoModeState, beam_splitter_coherent,
                      beam_splitter_fock, hom_coincidence, parity_sorter)
from .solver import (Scenario, SimulationGrid, SimulationResult,
                     convergence_study, photon_flux, simulate)

__version__ = "0.1.0"
