"""lfforge: a dialog-driven modeling workbench for a Lingua Franca subset."""

__version__ = "0.1.0"
