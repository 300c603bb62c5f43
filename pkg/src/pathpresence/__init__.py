"""Feedback-compensation which-way simulation for a two-path interferometer.

Submodules
----------
qcore       state-vector mechanics on path (x) spin
analytic    closed-form weak values, optimal compensation and averages
simkit      seeded Monte Carlo detector counts
estimator   fringe fitting, compensation optimization, presence scans
acceptance  exit criteria shared by the tests and ``pathpresence verify``
"""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402,F401
    DivergentWeakValueError,
    averaged_sigma_x,
    compensation_solution,
    effective_port_probability,
    ozawa_error,
    port_probability,
    presence_table,
    weak_value,
)
from .qcore import BeamConfig, CompositeState  # noqa: E402,F401
