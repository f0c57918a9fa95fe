"""Exception types shared across the package.

Every error raised on a contract violation derives from HazardLensError so
callers (notably the pipeline) can distinguish domain failures from bugs.
"""


class HazardLensError(Exception):
    """Base class for all domain errors."""


# -- dataset ingestion / labeling ---------------------------------------

class MissingColumn(HazardLensError):
    """A required column is absent from a CSV file."""


class NonNumericCell(HazardLensError):
    """A cell could not be parsed as a finite real number."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class DuplicateTract(HazardLensError):
    """The same tract_id appears more than once in a file."""


class EmptyVector(HazardLensError):
    """An operation received an empty vector."""


class NonFiniteValue(HazardLensError):
    """A value is NaN or infinite where a finite real is required."""


class HazardAbsent(HazardLensError):
    """The requested hazard has no data for this county."""


class DegenerateLabels(HazardLensError):
    """Binarization produced a single class; the pair cannot be modeled."""


class SchemaMismatch(HazardLensError):
    """County feature schemas cannot be reconciled."""

    def __init__(self, message, county=None, column=None):
        super().__init__(message)
        self.county = county
        self.column = column


# -- tree / ensemble ------------------------------------------------------

class EmptyDistribution(HazardLensError):
    """A class distribution with zero total count."""


class EmptySubset(HazardLensError):
    """Tree growth was asked to fit zero samples."""


class DimensionMismatch(HazardLensError):
    """Feature vector width does not match the model."""


# -- model selection ------------------------------------------------------

class ClassTooSmall(HazardLensError):
    """A class has too few members to split."""


class TooFewSamples(HazardLensError):
    """Not enough rows for the requested fold count."""


# -- metrics ---------------------------------------------------------------

class LengthMismatch(HazardLensError):
    """Label and prediction vectors differ in length."""


class NoPositives(HazardLensError):
    """F-score is undefined: no positive truth and no positive predictions."""


class NoEntries(HazardLensError):
    """A metric aggregation has no present entries."""


# -- importance -------------------------------------------------------------

class AllZeroImportance(HazardLensError):
    """No split contributed importance, so normalization is impossible."""


# -- synthetic generation / pipeline ----------------------------------------

class InvalidSpec(HazardLensError):
    """A synthetic scenario specification is inconsistent."""


class InvalidConfig(HazardLensError):
    """A run configuration failed validation."""


class EmptyMatrix(HazardLensError):
    """A transfer matrix with no cells cannot be rendered."""
