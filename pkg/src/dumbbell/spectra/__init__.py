"""Spectral bookkeeping for dumbbells and the epsilon-sweep drivers."""
from .bookkeeping import (CHANNEL, OMEGA, DecompositionReport, DecompositionRow, MergedSpectrum,
                          ModeTag, clusters, decompose, find_divider, localize, localize_columns,
                          merge, projection_deficiency, region_mass_matrices, union_spectrum)
from .sweep import (DEFAULT_EPSILONS, PARTS, ConvergenceTable, SweepConfig, SweepRow, Thresholds,
                    dirichlet_point, dumbbell_point, epsilon_sweep, strictly_decreasing)

__all__ = [
    "CHANNEL", "OMEGA", "DEFAULT_EPSILONS", "PARTS", "ConvergenceTable", "DecompositionReport",
    "DecompositionRow", "MergedSpectrum", "ModeTag", "SweepConfig", "SweepRow", "Thresholds",
    "clusters", "decompose", "dirichlet_point", "dumbbell_point", "epsilon_sweep",
    "find_divider", "localize", "localize_columns", "merge", "projection_deficiency",
    "region_mass_matrices", "strictly_decreasing", "union_spectrum",
]
