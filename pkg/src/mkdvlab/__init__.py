"""Spectral laboratory for almost-critical dispersive estimates.

Layers: grids and transforms (:mod:`mkdvlab.grid`), dual-Lebesgue and
restriction norms (:mod:`mkdvlab.norms`), closed products of free flows
(:mod:`mkdvlab.airy_products`), multilinear operators and region masks
(:mod:`mkdvlab.multilinear`), reproducible test families
(:mod:`mkdvlab.families`), the estimate probe harness
(:mod:`mkdvlab.estimates`), the Picard solver (:mod:`mkdvlab.solver`),
and the CLI runner (:mod:`mkdvlab.cli`).
"""

from .grid import (
    Grid,
    GridError,
    MultiplierSpec,
    RangeError,
    SpectralField,
    airy_flow_2d,
    airy_propagate,
    apply_multiplier,
    halfspec_to_spacetime,
)
from .norms import (
    FLParams,
    MixedParams,
    XsbParams,
    conjugate_exponent,
    fl_norm,
    lifespan_exponent,
    mixed_fl_norm,
    scaling_sigma,
    spacetime_lp_norm,
    sr_threshold,
    xsb_norm,
    xsb_norm_centered,
)
from .multilinear import (
    TrilinearMask,
    adjoint_defect,
    i_minus,
    i_plus,
    region_mask,
    trilinear_apply,
    trilinear_naive,
)
from .families import FamilyMember, TestFamily, materialize_all
from .estimates import (
    ESTIMATE_IDS,
    EstimateReport,
    EstimateSpec,
    HypothesisError,
    ProbePlan,
    default_plan,
    default_spec,
    probe,
    resonance_product,
    resonant_integral,
    resonant_slope,
    sigma_gain_check,
    t2c_exponents,
    validate_lemma3_params,
    validate_spec,
)
from .solver import (
    SolverConfig,
    SolverState,
    conservation_check,
    duhamel_step,
    flowmap_lipschitz_probe,
    lifespan_experiment,
    march,
    picard_solve,
    soliton_profile,
    solver_grid,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
