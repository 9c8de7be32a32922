"""Coherent attitude layers in globally coupled populations.

Closed-form Brillouin response of coherence layers, seeded ensemble
simulation, quasi-Newton fitting of (m, beta), layer stratification,
and correlation/PCA summaries.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CoherenceError,
    DomainError,
    NonIdentifiableError,
    NumericalError,
    ParameterError,
    ParseError,
    ValidationError,
)
from .model import (  # noqa: E402
    LayerParams,
    LevelDistribution,
    brillouin,
    differential_susceptibility,
    exact_charge_variance,
    expected_charge,
    level_distribution,
    susceptibility,
)
