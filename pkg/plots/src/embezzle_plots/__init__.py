from .render import (
    DEFAULT_COLORS,
    DEFAULT_MARKERS,
    PlotDataError,
    PlotSpec,
    Series,
    load_fits,
    load_series,
    render,
)

__all__ = [
    "DEFAULT_COLORS",
    "DEFAULT_MARKERS",
    "PlotDataError",
    "PlotSpec",
    "Series",
    "load_fits",
    "load_series",
    "render",
]
