"""
Temporal steering of a qubit dephased by a transverse-field XY spin chain.

Modules: ``chain`` (closed-form decoherence factor and its approximations),
``oracle`` (brute-force reference at small L), ``channel`` (qubit dephasing and
measurement), ``steering`` (measurement sets and S_N), ``weight`` and ``sdp``
(steering weight by semidefinite programming), ``power`` (time-averaged weight
and sweeps), ``config`` and ``cli`` (scenario files and CSV output).
"""

__version__ = "0.1.0"

from .chain import ChainParams, decoherence_factor, decoherence_trace
from .channel import apply_dephasing, measure
from .power import PowerConfig, gamma_time_map, lambda_sweep, ts_weight_power
from .steering import build_measurements, s2_analytic, s3_analytic, ts_parameter_numeric
from .weight import build_assemblage, ts_weight

__all__ = [
    "__version__",
    "ChainParams",
    "decoherence_factor",
    "decoherence_trace",
    "apply_dephasing",
    "measure",
    "build_measurements",
    "ts_parameter_numeric",
    "s2_analytic",
    "s3_analytic",
    "build_assemblage",
    "ts_weight",
    "PowerConfig",
    "ts_weight_power",
    "lambda_sweep",
    "gamma_time_map",
]
