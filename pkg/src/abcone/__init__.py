"""Spin-1/2 Aharonov-Bohm problem on a cone: bound states, scattering and the oscillator case."""
from .bound import (BoundState, ExtensionParam, Method, Provenance, RadialWavefunction,
                    bound_wavefunction, energy_bg, energy_ks, energy_ks_oracle, extension_param)
from .channel import (ChannelParams, EffectiveChannel, Scenario, bound_existence, classify,
                      coupling_ratio, effective_channel, effective_momentum, is_modified,
                      modified_channels)
from .errors import (AbconeError, BracketError, ConvergenceError, DomainError, NoBoundState, PoleAtK,
                     PoleError, SingularCoupling)
from .oscillator import (Branch, HoLevel, HoParams, extension_param_ho, ho_limit_spectrum,
                         ho_wavefunction, lambda_ratio, solve_ho_bg, solve_ho_ks, spectral_lhs)
from .scatter import (AmplitudeRequest, AmplitudeResult, ScatterRecord, ab_phase, amplitude,
                      diff_cross_section, mu, phase_shift, physical_extension_map, s_element,
                      s_pole_energies, scatter_record)
from .specfun import (LogGammaValue, SeriesControl, bessel_k, gamma_ratio_sym, kummer_m,
                      ln_gamma_signed, tricomi_u)

__version__ = "0.1.0"
