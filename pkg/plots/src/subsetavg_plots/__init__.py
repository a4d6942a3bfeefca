"""Figure scripts for the subsetavg experiment CSV outputs.

Consumes only the documented CSV schemas; no shared code with the
producing package.
"""

from .figures import TRUE_VALUE_DEFAULT, nscaling_figure, sweep_figure
from .tables import (AVERAGE_COLUMNS, CANDIDATE_COLUMNS, SchemaError,
                     read_averages, read_candidates, read_table)

__version__ = "0.1.0"

__all__ = [
    "AVERAGE_COLUMNS",
    "CANDIDATE_COLUMNS",
    "SchemaError",
    "TRUE_VALUE_DEFAULT",
    "nscaling_figure",
    "read_averages",
    "read_candidates",
    "read_table",
    "sweep_figure",
    "__version__",
]
