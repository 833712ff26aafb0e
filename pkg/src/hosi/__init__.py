"""hosi: higher-order sensitivity indices for black boxes on the unit cube.

Classical variance-based subset importance extends in two directions
implemented here: moment indices of order p (pick-freeze products of p
function values sharing a subset's coordinates) and spectral indices
(p-th power sums of Fourier or base-b Walsh coefficients, estimated
through cyclic-difference multilinear integrals).  Exact coefficient
oracles, closed forms for product/rectangle/additive test families, and
an exhaustive grid oracle back every estimator; the ``hosi`` CLI drives
estimation, oracle comparison and subset-lattice transforms.
"""

from . import backend
from .core import (
    BlackBoxFunction,
    CallableFunction,
    EvaluationError,
    MomentDescriptor,
    VarSubset,
    as_point,
    complement,
    enumerate_subsets,
    glue,
)
from .fourier import (
    SpectralEstimate,
    TrigPolynomial,
    dirichlet_kernel,
    dirichlet_polynomial,
    estimate_spectral_index,
    estimate_spectral_index_reduced,
    estimate_weighted_spectral,
    exact_multilinear,
    exact_weighted_spectral,
    multilinear_product,
    spectral_index_exact,
    spectral_moment,
)
from .functions import (
    AdditiveFunction,
    AdditiveFunctionSpec,
    CosineFactor,
    GFunctionFactor,
    IndicatorFactor,
    LinearFactor,
    ProductFunction,
    ProductFunctionSpec,
    TableFactor,
    UnsupportedOracle,
    gfunction_spec,
    rectangle_spec,
)
from .mobius import IncompleteLatticeError, SubsetMap, moebius_transform, moebius_with_errors, zeta_transform
from .moment import (
    ComplementarityReport,
    IndexEstimate,
    check_complementarity,
    estimate_moment_index_centered,
    estimate_moment_index_difference,
    estimate_total_effect,
)
from .oracles import (
    AdditiveP3Report,
    GridFunction,
    IndexPair,
    additive_indices,
    grid_anova_components,
    grid_fourier_index,
    grid_fourier_sigma,
    grid_indices,
    grid_moment_index,
    grid_pickfreeze_index,
    grid_total_effect_index,
    grid_variance,
    grid_walsh_index,
    grid_walsh_sigma,
    product_moment_indices,
    product_spectral_indices,
    rectangle_indices,
    resolve_additive_p3_discrepancy,
)
from .sampling import (
    PickFreezeDesign,
    SampleStream,
    SpectralDesign,
    build_block_design,
    build_pickfreeze,
    build_spectral_design,
    korobov_generator,
    lattice_point,
    uniform_point,
)
from .walsh import (
    DigitVector,
    WalshFunction,
    WalshIndex,
    digit_add,
    digit_neg,
    digit_sub,
    estimate_walsh_index,
    exact_multilinear_walsh,
    multilinear_product_walsh,
    neg_index,
    walsh_coefficients_grid,
    walsh_dirichlet,
    walsh_eval,
    walsh_index_exact,
    walsh_spectral_moment,
)

__version__ = "0.1.0"
