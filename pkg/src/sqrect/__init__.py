"""Square-rectangle exchange piecewise isometry toolkit."""

__version__ = "0.1.0"
