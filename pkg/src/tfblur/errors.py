class TfblurError(Exception):
    """Base class for all tfblur errors."""


class FormatError(TfblurError):
    """File contents are malformed or unreadable."""


class UnsupportedError(TfblurError):
    """Input is valid but outside the supported subset."""


class NotAFrameError(TfblurError):
    """Window/lattice pair does not form a frame (frame diagonal has a zero)."""


class ConfigError(TfblurError):
    """Invalid, unknown, or inconsistent pipeline configuration."""
