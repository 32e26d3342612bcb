"""
CovHuSeg Toolkit - Exceptions

All toolkit-specific failures derive from CovHuSegError so batch drivers can
catch them per file without swallowing programming errors.
"""


class CovHuSegError(Exception):
    """Base class for toolkit errors"""


class MaskFormatError(CovHuSegError, ValueError):
    """A mask or image file is missing, corrupt or in an unsupported layout"""

    def __init__(self, path, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: {reason}")


class DimensionMismatchError(CovHuSegError, ValueError):
    """Two masks that must be compared pixel-wise have different shapes"""


class GeometryError(CovHuSegError, ValueError):
    """Invalid geometric input (empty point set, vertex outside raster, bad id)"""


class ManifestError(CovHuSegError):
    """Dataset directory or manifest file cannot be used"""


class SynthesisError(CovHuSegError):
    """Synthetic components could not be placed after the retry budget"""


class ImprovementViolation(CovHuSegError, AssertionError):
    """A trial produced a lower Dice with CovHuSeg than without it"""
