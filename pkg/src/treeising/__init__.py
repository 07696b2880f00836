"""Tree-structured Ising models under mean parameterisation.

The model is a tree, a Bernoulli mean per vertex and a Pearson correlation
per edge. From it the package computes exact joint probabilities, the joint
pgf, the pmf of the sum of the components and expected allocations (by
Fourier inversion), direct samples, conversions to exponential-family
parameters and a Poisson-marginal approximation.
"""

__version__ = "0.1.0"

from .distribution import LARGE_N_FFT, AllocationVector, expected_allocations, sum_pmf
from .errors import TreeIsingError
from .model import MeanParamIsing, brute_force_allocations, brute_force_sum_pmf, validate
from .pgf import BACKEND, joint_pgf, ogfea_pgf, sum_pgf
from .pmf import Pmf, stop_loss, tv_distance
from .poisson import MpmrfModel, build_approx, check_convex_order, mpmrf_sum_pmf, tv_bound
from .sampling import RngStream, mc_confidence_intervals, monte_carlo_sum_pmf, sample_ising
from .tree import TreeTopology, binary_tree, build_tree, chain, path, random_tree, root_at, tree_from_labels

__all__ = [
    "AllocationVector",
    "BACKEND",
    "LARGE_N_FFT",
    "MeanParamIsing",
    "MpmrfModel",
    "Pmf",
    "RngStream",
    "TreeIsingError",
    "TreeTopology",
    "binary_tree",
    "brute_force_allocations",
    "brute_force_sum_pmf",
    "build_approx",
    "build_tree",
    "chain",
    "random_tree",
    "check_convex_order",
    "expected_allocations",
    "joint_pgf",
    "mc_confidence_intervals",
    "monte_carlo_sum_pmf",
    "mpmrf_sum_pmf",
    "ogfea_pgf",
    "path",
    "root_at",
    "sample_ising",
    "stop_loss",
    "sum_pgf",
    "sum_pmf",
    "tree_from_labels",
    "tv_bound",
    "tv_distance",
    "validate",
]
