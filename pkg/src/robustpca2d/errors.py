"""Exception hierarchy shared by every module in the package."""


class RobustPCAError(Exception):
    """Base class for all errors raised by robustpca2d."""


class DimensionMismatch(RobustPCAError, ValueError):
    pass


class RankDeficient(RobustPCAError, ValueError):
    pass


class NotSymmetric(RobustPCAError, ValueError):
    pass


class NotOrthonormal(RobustPCAError, ValueError):
    pass


class NoConvergence(RobustPCAError, RuntimeError):
    pass


class EmptyInput(RobustPCAError, ValueError):
    pass


class RankTooLow(RobustPCAError, ValueError):
    pass


class DegenerateData(RobustPCAError, ValueError):
    pass


class TooLarge(RobustPCAError, ValueError):
    pass


class DatasetError(RobustPCAError):
    """Anything that goes wrong while reading or splitting a dataset."""


class MalformedHeader(DatasetError, ValueError):
    pass


class InconsistentDimensions(DatasetError, ValueError):
    pass


class EmptyDirectory(DatasetError, FileNotFoundError):
    pass


class InsufficientImagesForSubject(DatasetError, ValueError):
    pass


class MeanMismatch(RobustPCAError, ValueError):
    pass


class EmptyTrainSet(RobustPCAError, ValueError):
    pass


class LengthMismatch(RobustPCAError, ValueError):
    pass


class ConfigError(RobustPCAError, ValueError):
    """Invalid benchmark configuration; message names the section/field/line."""
