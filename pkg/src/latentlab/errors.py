"""Exception taxonomy shared by all latentlab modules."""


class LatentLabError(Exception):
    """Base class for every error raised by this package."""


class MalformedScanError(LatentLabError):
    """Scan file length is not a multiple of the 16-byte point record."""


class LabelMismatchError(LatentLabError):
    """Label file does not carry exactly one entry per scan point."""


class LabelOverflowError(LatentLabError):
    """Semantic or instance id does not fit in 16 bits."""


class MissingCalibrationError(LatentLabError):
    """Required calibration key absent from the calibration file."""


class CalibrationParseError(LatentLabError):
    """Calibration file contains a non-numeric or short row."""


class InvalidRatioError(LatentLabError):
    """Split ratio outside (0, 1]."""


class MissingPseudoError(LatentLabError):
    """An unlabeled frame has no pseudo-label file."""


class InvalidPointError(LatentLabError):
    """Point cloud contains non-finite coordinates."""


class UnlabeledInputError(LatentLabError):
    """Operation requires per-point labels that are missing."""


class NotEnoughFramesError(LatentLabError):
    """Pairing requires at least two frames."""


class InvalidIndexError(LatentLabError):
    """Voxel index outside the grid."""


class ShapeError(LatentLabError):
    """Array arguments have inconsistent shapes."""


class InvalidClassError(LatentLabError):
    """Class id outside [0, num_classes)."""


class InvalidAnchorError(LatentLabError):
    """Heatmap anchor lies outside the image."""


class TensorFormatError(LatentLabError):
    """LLT1 tensor file is malformed."""
