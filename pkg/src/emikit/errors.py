"""Exception hierarchy shared across the pipeline stages."""


class EmikitError(Exception):
    """Base class for all toolkit errors."""


class DataError(EmikitError):
    """Malformed or missing input data (bad rows, unknown columns, bad file formats)."""


class NumericalError(EmikitError):
    """Degenerate numerical situation: singular design, zero variance, non-finite values."""


class ModelFormatError(DataError):
    """Base for embedding-model file parse errors."""


class ModelHeaderError(ModelFormatError):
    """Header line is not 'V d' with positive integers."""


class ModelDimensionError(ModelFormatError):
    """A vector row does not match the header dimensionality."""


class DuplicateWordError(ModelFormatError):
    """The same word appears twice in a model file."""


class TruncatedModelError(ModelFormatError):
    """Fewer vector rows than the header promises."""
