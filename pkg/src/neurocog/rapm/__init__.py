"""Text RAPM: compositional constraint-based matrix generation and validation."""

from .attributes import (
    AttributeSpec,
    IncompatibleAttributesError,
    UnsatisfiableError,
    check_compatibility,
    propagate_constraints,
    sample_attribute_pair,
)
from .constraints import CellConstraints, cell_satisfies
from .generator import (
    CellGenerationError,
    RapmItem,
    SeedRejected,
    ValidationReport,
    attach_options,
    generalized_hamming,
    generate_cell,
    generate_distractors,
    generate_item,
    generate_items,
    generate_matrix,
    read_items,
    validate_item,
    write_items,
)

__all__ = [
    "AttributeSpec", "IncompatibleAttributesError", "UnsatisfiableError", "check_compatibility",
    "propagate_constraints", "sample_attribute_pair", "CellConstraints", "cell_satisfies",
    "CellGenerationError", "RapmItem", "SeedRejected", "ValidationReport", "attach_options",
    "generalized_hamming", "generate_cell", "generate_distractors", "generate_item", "generate_items",
    "generate_matrix", "read_items", "validate_item", "write_items",
]
