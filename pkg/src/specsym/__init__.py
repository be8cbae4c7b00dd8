"""Exact finite model of spectral decompositions of trace-zero elements.

The package builds, on a commutative finite measure space, the constructions
that write a trace-zero self-adjoint element as a sum of three commuting
spectrally symmetric elements, and checks every step in exact arithmetic.
"""

__version__ = "0.1.0"

from .cellspace import (
    CellSpace, SpaceError, VersionMismatch, carve, common_space, from_masses,
    join, new_space, refine, split_coord, split_mass,
)
from .element import (
    Element, PreconditionError, complement, dimension, from_atoms, identity,
    moment, orthogonal, pos_neg_parts, projection, quasitrace, support,
)
from .spectra import (
    SpectralDistribution, distribution, equivalent, is_spectrally_symmetric,
    quantile, quantile_moment,
)
from .scales import Scale, StepFunction, make_scale, riemann_integral, spectral_scale
from .folding import (
    Folding, Superprojection, folding_sum, gamma_folding, local_folding,
    mediator, small_packing, validate_folding,
)
from .decompose import (
    Decomposition, VerificationError, fold_as_symmetric, stabilize_decompose,
    three_symmetric, verify_decomposition,
)
