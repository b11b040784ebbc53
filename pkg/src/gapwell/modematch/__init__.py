"""Mode-matching eigensolvers for window-coupled waveguides."""

from .classic import secular_lambda_min, secular_matrix_half, secular_matrix_layer
from .field import (assemble_multiwindow, field_on_grid, matching_residual,
                    reconstruct_field, value_mismatch)
from .modes import (ModeBasis, Wavenumber, overlap_asym, overlap_sym, wavenumber)
from .solver import (BoundStateResult, SolverOptions, find_ground_state_half,
                     find_ground_state_layer, find_ground_state_strip)

__all__ = [
    "assemble_multiwindow", "field_on_grid", "matching_residual", "reconstruct_field",
    "value_mismatch", "BoundStateResult", "ModeBasis", "SolverOptions", "Wavenumber",
    "find_ground_state_half", "find_ground_state_layer", "find_ground_state_strip",
    "overlap_asym", "overlap_sym", "secular_lambda_min", "secular_matrix_half",
    "secular_matrix_layer", "wavenumber",
]
