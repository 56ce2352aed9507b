"""Figure generation for the exit-time experiment outputs.

Reads the experiment CLI's CSV/JSON files and renders the survival,
mean-scaling, barrier-scaling, mechanism, and tube-deviation figures. The
simulation package is not imported: every plotted number comes from the
files, so the figures document exactly what a run produced.
"""

__version__ = "1.0.0"

from .figures import (
    FigureInfo,
    Refusal,
    plot_deviation,
    plot_kramers,
    plot_mean_scaling,
    plot_mechanism,
    plot_survival,
)
from .schemas import (
    DEVIATION_COLUMNS,
    RECORD_COLUMNS,
    SWEEP_COLUMNS,
    DeviationTable,
    Records,
    SchemaError,
    SweepTable,
    manifest_hash,
    read_deviation,
    read_records,
    read_summary,
    read_sweep,
)

__all__ = [
    "FigureInfo",
    "Refusal",
    "plot_deviation",
    "plot_kramers",
    "plot_mean_scaling",
    "plot_mechanism",
    "plot_survival",
    "DEVIATION_COLUMNS",
    "RECORD_COLUMNS",
    "SWEEP_COLUMNS",
    "DeviationTable",
    "Records",
    "SchemaError",
    "SweepTable",
    "manifest_hash",
    "read_deviation",
    "read_records",
    "read_summary",
    "read_sweep",
]
