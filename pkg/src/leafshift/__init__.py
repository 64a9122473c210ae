"""Thermodynamic formalism on topological Markov shifts.

Pressure and recurrence, transfer-operator eigendata, past reduction of
two-sided potentials, leaf measures and the equilibrium states they
assemble, plus a linear toral automorphism with a Markov partition.
"""

from .errors import (
    BadAnchor,
    BaseMismatch,
    DuplicateSymbol,
    InadmissibleWord,
    InputError,
    LeafShiftError,
    NoConvergence,
    NotIrreducible,
    PartitionInvalid,
    SegmentMismatch,
    StemMismatch,
    StrandedSymbol,
    TooManyCylinders,
    TrivialSymbol,
    UnknownSymbol,
    WordMismatch,
)
from .kernels import BACKEND
from .leaf import (
    CylinderMeasureTable,
    LeafFamily,
    LeafMeasure,
    Stem,
    assemble_equilibrium,
    entropy_pressure_identity,
    gibbs_bound_check,
    holonomy_ratio_check,
    leaf_cylinder_mass,
    leaf_measure,
    pushforward_invariance_residual,
)
from .ledrappier import ConformalFamily, build_conformal_family, density_bounds
from .potentials import (
    HolderData,
    LocallyConstantPotential,
    SinaiReduction,
    birkhoff_sum_backward,
    birkhoff_sum_forward,
    sinai_reduce,
    variation,
)
from .ruelle import (
    ComponentModel,
    RecodedModel,
    SpectralData,
    apply_ruelle,
    build_component_model,
    log_harmonic_regularity,
    normalized_potential,
    perron_data,
    recode_depth_one,
)
from .shift_core import (
    ComponentDecomposition,
    ShiftGraph,
    Word,
    build_graph,
    component_period,
    enumerate_cycles,
    is_admissible,
    maximal_irreducible_components,
)
from .thermo import (
    PressureEstimate,
    RecurrenceReport,
    classify_recurrence,
    gurevich_pressure,
    partition_function,
    periodic_point_sum,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BadAnchor",
    "BaseMismatch",
    "ComponentDecomposition",
    "ComponentModel",
    "ConformalFamily",
    "CylinderMeasureTable",
    "DuplicateSymbol",
    "HolderData",
    "InadmissibleWord",
    "InputError",
    "LeafFamily",
    "LeafMeasure",
    "LeafShiftError",
    "LocallyConstantPotential",
    "NoConvergence",
    "NotIrreducible",
    "PartitionInvalid",
    "PressureEstimate",
    "RecodedModel",
    "RecurrenceReport",
    "SegmentMismatch",
    "ShiftGraph",
    "SinaiReduction",
    "SpectralData",
    "Stem",
    "StemMismatch",
    "StrandedSymbol",
    "TooManyCylinders",
    "TrivialSymbol",
    "UnknownSymbol",
    "Word",
    "WordMismatch",
    "apply_ruelle",
    "assemble_equilibrium",
    "birkhoff_sum_backward",
    "birkhoff_sum_forward",
    "build_component_model",
    "build_conformal_family",
    "build_graph",
    "classify_recurrence",
    "component_period",
    "density_bounds",
    "entropy_pressure_identity",
    "enumerate_cycles",
    "gibbs_bound_check",
    "gurevich_pressure",
    "holonomy_ratio_check",
    "is_admissible",
    "leaf_cylinder_mass",
    "leaf_measure",
    "log_harmonic_regularity",
    "maximal_irreducible_components",
    "normalized_potential",
    "partition_function",
    "periodic_point_sum",
    "perron_data",
    "pushforward_invariance_residual",
    "recode_depth_one",
    "sinai_reduce",
    "variation",
]
