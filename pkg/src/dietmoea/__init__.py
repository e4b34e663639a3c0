"""Multi-objective weekly diet planning with decision-space diversity selection."""

__version__ = "0.1.0"
