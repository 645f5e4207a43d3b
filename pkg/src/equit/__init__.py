"""Maximal information coefficient, comparator dependence measures and
equitability benchmarks."""

__version__ = "0.1.0"

from .core import (binary_entropy, entropy, linfoot_squared, mutual_information,
                   pearson_squared, r_squared_vs_function)
from .estimators import KraskovParams, distance_correlation, kraskov_mi, mi_linfoot_score
from .mic import (AxisPartition, CharacteristicMatrix, MicParams, MicVariant,
                  characteristic_matrix, exact_max_grid_info, mic, mic_exhaustive_low_rows,
                  mic_variant)

__all__ = [
    "AxisPartition", "CharacteristicMatrix", "KraskovParams", "MicParams", "MicVariant",
    "binary_entropy", "characteristic_matrix", "distance_correlation", "entropy",
    "exact_max_grid_info", "kraskov_mi", "linfoot_squared", "mi_linfoot_score", "mic",
    "mic_exhaustive_low_rows", "mic_variant", "mutual_information", "pearson_squared",
    "r_squared_vs_function",
]
