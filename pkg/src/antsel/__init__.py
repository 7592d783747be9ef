"""Transmit-antenna subset selection for MIMO-OFDM by genetic search."""

from .capacity import (
    AntennaSubset,
    CapacityEstimate,
    Snr,
    ergodic_capacity,
    realization_capacity,
    select_columns,
    subcarrier_capacity,
)
from .channel import (
    ChannelConfig,
    ChannelRealization,
    RealizationBatch,
    TapSet,
    frequency_response,
    generate_batch,
    generate_taps,
)
from .errors import BudgetError, ConfigurationError, DimensionError, NumericError
from .ga import Chromosome, GaConfig, MutationStrategy, PartnerMode, RunTrace, run
from .oracle import OracleResult, exhaustive_search

__version__ = "0.1.0"
