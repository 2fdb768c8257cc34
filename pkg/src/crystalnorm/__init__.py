"""Crystallization and lattice energies for interactions measured by an arbitrary planar norm."""

from .lattice_sums import (LJResult, SumResult, ToleranceUnreachable, epstein_zeta, lj_energy,
                           lj_from_lattice, lj_reduced)
from .lattices import (A2, L1, Z2, DomainPoint, Lattice, ReducedLattice, canonical, canonical_lp,
                       domain_point_of, lattice_from_domain_point, linear_map_between,
                       parse_lattice, reduce, vectors_in_ball)
from .norms import (Composed, LinearMap2, PNorm, equivalence_constants, kissing_number,
                    norm_eval, norm_for_lattice, parse_norm)
from .optimizer import (EpsteinZeta, LJReduced, Objective, PhaseRow, contour_grid,
                        global_minimize, locate_transition, nelder_mead, scan_p)
from .patches import (Configuration, UnitGraph, build_hex_patch, build_minimizer, build_oct_patch,
                      bpd_energy_on_Z2, min_distance_graph, predicted_min_energy, sticky_energy)

__version__ = "0.1.0"
