"""Adaptive fractional-order sliding mode control of a simulated ultrasonic motor.

Submodules:

- :mod:`afosmc.fraccalc`: Grünwald-Letnikov operators and short-memory windows
- :mod:`afosmc.plant`: motor dynamics and RK4 integration
- :mod:`afosmc.control`: AFOSMC, critic compensator and DOB baselines
- :mod:`afosmc.harness`: references, closed-loop runs and metrics
- :mod:`afosmc.config`, :mod:`afosmc.cli`: JSON configuration and command line
"""

from .control import (HIGH_GAIN_AFOSMC, AfosmcController, AfosmcParams, BaselineParams,
                      Compensator, CompensatorParams)
from .fraccalc import (HistoryWindow, frac_integral, frac_operator, gamma, gl_coeffs,
                       gl_derivative, memory_length_for_accuracy, short_memory_error_bound)
from .harness import (Metrics, Reference, Scenario, Trace, compare_cases, compute_metrics,
                      run_scenario)
from .plant import PlantParams, PlantState, default_uncertainty

__version__ = "0.1.0"

__all__ = [
    "HIGH_GAIN_AFOSMC", "AfosmcController", "AfosmcParams", "BaselineParams", "Compensator",
    "CompensatorParams", "HistoryWindow", "frac_integral", "frac_operator", "gamma",
    "gl_coeffs", "gl_derivative", "memory_length_for_accuracy", "short_memory_error_bound",
    "Metrics", "Reference", "Scenario", "Trace", "compare_cases", "compute_metrics",
    "run_scenario", "PlantParams", "PlantState", "default_uncertainty",
]
