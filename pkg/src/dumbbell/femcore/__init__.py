"""C1 finite elements: BFS rectangles, cubic Hermite intervals, assembly and
the averaging / extension operators of the channel."""
from .assembly import (ALL_BOUNDARY, CHANNEL_ENDS, DiscreteField, DofMap, SparseSym,
                       apply_clamped_constraints, assemble, constant_vector, energy,
                       rayleigh_quotients)
from .elements import bfs_element_matrices, element_matrices, hermite1d_element
from .forms import ChannelEpsForm, Limit1DForm, Mass, PlateForm, WeightedMass, bending_density
from .transfer import HermiteFunction1D, average_M, extend_E

__all__ = [
    "ALL_BOUNDARY", "CHANNEL_ENDS", "ChannelEpsForm", "DiscreteField", "DofMap",
    "HermiteFunction1D", "Limit1DForm", "Mass", "PlateForm", "SparseSym", "WeightedMass",
    "apply_clamped_constraints", "assemble", "average_M", "bending_density", "bfs_element_matrices",
    "constant_vector", "element_matrices", "energy", "extend_E", "hermite1d_element",
    "rayleigh_quotients",
]
