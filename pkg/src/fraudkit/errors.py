"""Exception hierarchy shared by all fraudkit modules."""


class FraudkitError(Exception):
    """Base class for all errors raised by fraudkit."""


# --- tabular ---------------------------------------------------------------

class MissingColumn(FraudkitError):
    pass


class ParseError(FraudkitError):
    pass


class NonBinaryLabel(FraudkitError):
    pass


class EmptyDataset(FraudkitError):
    pass


class DegenerateClass(FraudkitError):
    pass


# --- cleanse ---------------------------------------------------------------

class EmptyInput(FraudkitError):
    pass


class UnknownFeature(FraudkitError):
    pass


class EmptyClassSubset(FraudkitError):
    pass


# --- resample / baselines --------------------------------------------------

class KTooLarge(FraudkitError):
    pass


class SingleClass(FraudkitError):
    pass


class DimensionMismatch(FraudkitError):
    pass


# --- metrics ---------------------------------------------------------------

class LengthMismatch(FraudkitError):
    pass


# --- gbdt / cli ------------------------------------------------------------

class FormatError(FraudkitError):
    pass


class SchemaMismatch(FraudkitError):
    pass


class ConfigError(FraudkitError):
    pass


class StageError(FraudkitError):
    """Wraps a module error with the name of the pipeline stage that failed."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class NoConvergenceWarning(UserWarning):
    """Sigma calibration missed its perplexity target; the run continues."""
