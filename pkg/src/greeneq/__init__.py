"""Weighted Green energy problems on compact sets: discrete solvers, greedy sequences and checks."""
from .errors import GreenEqError
from .field import ExternalField, FieldPiece, field_eval, field_min
from .geometry import Arc, CompactSet, Segment
from .kernel import GreenDomain, assemble_kernel_matrix, green_eval, green_truncated, kernel_split_h
from .measure import (PartitionedSet, PiecewiseDensity, WeightedConfiguration, build_interval_partition,
                      discrete_energy, discretize_upper_constrained, green_potential, log_potential,
                      weakstar_discrepancy)

__version__ = "0.1.0"
