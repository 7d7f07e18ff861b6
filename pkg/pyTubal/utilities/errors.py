"""
Error types raised throughout ``pyTubal``.

Notes
-----

Every error carries a human readable ``message`` and derives from :py:class:`PyTubalError`. Each class also
derives from the closest builtin exception so that callers which only know about ``ValueError`` or ``OSError``
still catch the right things.

The format errors of :py:mod:`cube_io` deliberately do **not** inherit from one another or from
:py:class:`CubeIOError`; a corrupt header and an unreadable file are different failure classes.
"""


class PyTubalError(Exception):
    """
    Collective error type for all ``pyTubal`` failures.
    """

    def __init__(self, message: str = None):
        self.message = message
        super().__init__(self.message)


# ============================================================= #
# Algebra and solver errors                                     #
# ============================================================= #
class DimMismatch(PyTubalError, ValueError):
    """Raised when two cubes are not conformable for an operation."""


class NonFiniteCube(PyTubalError, ValueError):
    """Raised when a cube would contain NaN or Inf entries."""


class SymmetryViolation(PyTubalError, ArithmeticError):
    """Raised when an inverse DFT leaves a non-negligible imaginary residue."""


class SingularSlice(PyTubalError, ArithmeticError):
    """
    Raised when a Fourier-domain frontal slice is numerically singular.

    Parameters
    ----------
    slice_index: int
        The (0-based) Fourier slice which failed.
    cond: float
        The condition estimate of that slice.
    """

    def __init__(self, slice_index: int, cond: float, message: str = None):
        self.slice_index = slice_index
        self.cond = cond

        if message is None:
            message = f"Fourier slice {slice_index} is numerically singular (cond = {cond:.3e})."
        super().__init__(message)


class SingularGram(SingularSlice):
    """Raised when the t-BRP Gram tensor cannot be inverted at the requested rank."""


class RankOutOfRange(PyTubalError, ValueError):
    """Raised when a requested tubal rank is outside ``1 <= r <= min(n1, n2)``."""


class RestartLimitExceeded(PyTubalError, RuntimeError):
    """Raised when the t-BRP rank check keeps shrinking the rank past the restart budget."""


class ZeroInput(PyTubalError, ValueError):
    """Raised when the solver is handed an all-zero cube."""


class SpecExceedsDims(PyTubalError, ValueError):
    """Raised when a noise specification does not fit the cube it is applied to."""


class TooSmall(PyTubalError, ValueError):
    """Raised when a band is smaller than the SSIM window."""


class AllPixelsDegenerate(PyTubalError, ValueError):
    """Raised when every pixel spectrum has zero norm in a spectral-angle computation."""


class ConfigurationError(PyTubalError, ValueError):
    """Raised when a parameter file or command line value cannot be interpreted."""


# ============================================================= #
# I/O errors                                                    #
# ============================================================= #
class CubeIOError(PyTubalError, OSError):
    """Raised when the operating system fails to read or write a file."""


class CubeFormatError(PyTubalError, ValueError):
    """Base class for malformed cube files. Not raised directly."""


class BadMagic(CubeFormatError):
    """The file does not start with the ``HSC1`` magic bytes."""


class TruncatedFile(CubeFormatError):
    """The payload is shorter (or longer) than the header promises."""


class BadDtype(CubeFormatError):
    """The header (or a caller) names an unsupported sample type."""


class SizeMismatch(CubeFormatError):
    """A raw file's length does not match the declared dimensions and sample type."""


class BadLayout(CubeFormatError):
    """A raw file layout other than ``bsq``, ``bip`` or ``bil`` was requested."""
