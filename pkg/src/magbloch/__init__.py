"""magbloch: magnetic Schroedinger operators on periodic weighted graphs.

Flux quantizability, holonomy classification of U(1) connections, and the
finite Bloch decomposition of periodic operators into twisted fibers, all at
exact desk scale.  See README.md for the sign-convention table.
"""

from .complexes import (
    Complex2,
    CoveringData,
    SupercellMap,
    SupercellSpec,
    ValidationReport,
    boundary_matrices,
    build_supercell,
    validate,
)
from .homology import (
    Character,
    CharacterGroup,
    HomologySummary,
    SmithDecomposition,
    character_group,
    evaluate_character,
    homology,
    smith_normal_form,
)
from .bundle import (
    FlatCocycle,
    NotQuantizableError,
    QuantizabilityCertificate,
    curvature,
    difference_class,
    flat_cocycle,
    gauge_transform,
    holonomy,
    is_quantizable,
    synthesize_connection,
    twist,
    zero_connection,
)
from .operators import (
    MagneticOperator,
    NumericError,
    Spectrum,
    assemble_fiber,
    assemble_quotient,
    assemble_supercell,
    spectrum,
    translate,
    translation_matrix,
)
from .bloch import (
    BandData,
    BlochBasis,
    ButterflyRow,
    MagneticSupercell,
    band_csv,
    bloch_matrix,
    bloch_transform,
    butterfly,
    butterfly_csv,
    butterfly_svg,
    character_relations_check,
    decomposition_check,
    magnetic_supercell,
    momentum_character,
    multiplier_action,
    spectrum_union,
    verify_block_diagonalization,
)
from .model_io import Model, ModelError, load_model, loads_model

__version__ = "0.1.0"

__all__ = [
    "Complex2",
    "CoveringData",
    "SupercellMap",
    "SupercellSpec",
    "ValidationReport",
    "boundary_matrices",
    "build_supercell",
    "validate",
    "Character",
    "CharacterGroup",
    "HomologySummary",
    "SmithDecomposition",
    "character_group",
    "evaluate_character",
    "homology",
    "smith_normal_form",
    "FlatCocycle",
    "NotQuantizableError",
    "QuantizabilityCertificate",
    "curvature",
    "difference_class",
    "flat_cocycle",
    "gauge_transform",
    "holonomy",
    "is_quantizable",
    "synthesize_connection",
    "twist",
    "zero_connection",
    "MagneticOperator",
    "NumericError",
    "Spectrum",
    "assemble_fiber",
    "assemble_quotient",
    "assemble_supercell",
    "spectrum",
    "translate",
    "translation_matrix",
    "BandData",
    "BlochBasis",
    "ButterflyRow",
    "MagneticSupercell",
    "band_csv",
    "bloch_matrix",
    "bloch_transform",
    "butterfly",
    "butterfly_csv",
    "butterfly_svg",
    "character_relations_check",
    "decomposition_check",
    "magnetic_supercell",
    "momentum_character",
    "multiplier_action",
    "spectrum_union",
    "verify_block_diagonalization",
    "Model",
    "ModelError",
    "load_model",
    "loads_model",
]
