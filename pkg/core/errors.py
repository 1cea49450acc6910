"""Exception hierarchy shared by the library and the CLI."""


class FlyhashError(Exception):
    """Base class for all errors raised by flyhash."""


class ConfigurationError(FlyhashError, ValueError):
    """Invalid hyperparameter or option combination."""


class EmptyCorpusError(FlyhashError):
    """The corpus produced no tokens or no w-grams."""


class IdOutOfRangeError(FlyhashError, IndexError):
    """A word, unit or input index lies outside the valid range."""


class OutOfVocabularyError(FlyhashError, KeyError):
    """A query word is not in the model vocabulary."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class DegenerateUnitError(FlyhashError):
    """A winning unit has an all-zero weight row."""


class DivergenceError(FlyhashError):
    """Training produced non-finite or exploding weights."""

    def __init__(self, message: str, unit: int):
        super().__init__(message)
        self.unit = unit


class EvaluationError(FlyhashError):
    """An evaluation could not produce a metric."""


class InputEncodingError(FlyhashError, ValueError):
    """A text input file is not valid UTF-8."""


# === Model / cache file errors ===


class ModelFormatError(FlyhashError):
    """A binary model or sample-cache file could not be decoded."""


class BadMagicError(ModelFormatError):
    pass


class VersionMismatchError(ModelFormatError):
    pass


class TruncatedFileError(ModelFormatError):
    pass


class DimensionMismatchError(ModelFormatError):
    pass


class ChecksumError(ModelFormatError):
    pass
