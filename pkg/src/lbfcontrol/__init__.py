"""Full-pose geometric control for laterally bounded force multirotors."""

__version__ = "0.1.0"
