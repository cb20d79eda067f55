"""Constrained minimizers of fractional Schrodinger energies on a periodic box."""

__version__ = "0.1.0"

from .errors import FracminError  # noqa: E402
from .grid import Field, Grid, Profile  # noqa: E402
from .nonlinearity import NonlinearitySpec  # noqa: E402

__all__ = ["Field", "FracminError", "Grid", "NonlinearitySpec", "Profile", "__version__"]
