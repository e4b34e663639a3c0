"""Exception types raised across the package."""


class DietMOEAError(Exception):
    """Base class for all package errors."""


class ParameterError(DietMOEAError, ValueError):
    """An argument is outside its valid range."""


class ParseError(DietMOEAError, ValueError):
    """A data file row could not be parsed."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class CategoryError(DietMOEAError, ValueError):
    """A food row names a category that is not recognised."""


class EmptyDatasetError(DietMOEAError, ValueError):
    """A dataset file contains no data rows."""


class MappingError(DietMOEAError, ValueError):
    """Dataset categories are missing from a category-to-group mapping."""

    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__("unmapped categories: " + ", ".join(repr(c) for c in self.missing))


class InconsistencyError(DietMOEAError, ValueError):
    """Cross references between foods, requirements and penalties do not line up."""


class DimensionError(DietMOEAError, ValueError):
    """Array shapes do not match."""


class StateError(DietMOEAError, RuntimeError):
    """A required derived field (e.g. raw fitness) has not been computed."""


class RepairError(DietMOEAError, RuntimeError):
    """The repair operator could not reach feasibility."""
