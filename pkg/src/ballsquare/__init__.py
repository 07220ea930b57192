"""Ball-average square functions on periodic grids."""
from .errors import (BallSquareError, ConvergenceError, FieldFormatError, ParameterError,
                     RangeViolation)
from .field import Field, GridSpec, lp_norm, read_field, translate, write_field
from .kernels import KernelSpec
from .squarefn import ScaleGrid, default_scale_grid, e_tilde, scale_grid, square_function, u_alpha

__version__ = "0.1.0"

__all__ = [
    "BallSquareError", "ConvergenceError", "FieldFormatError", "ParameterError",
    "RangeViolation", "Field", "GridSpec", "lp_norm", "read_field", "translate", "write_field",
    "KernelSpec", "ScaleGrid", "default_scale_grid", "e_tilde", "scale_grid",
    "square_function", "u_alpha",
]
