"""Exception types shared across the package."""


class VistaError(Exception):
    """Base class for package-specific errors."""


class DimensionError(VistaError):
    """Qubit count or matrix dimension outside the dense-representation guard."""


class DomainError(VistaError):
    """Parameter value outside its mathematical domain."""


class ConfigError(VistaError):
    """Invalid, inconsistent, or unknown run configuration."""


class NumericsError(VistaError):
    """A numerical consistency check failed (imaginary residue, integrator drift, ...)."""


class UnsupportedModelError(VistaError):
    """No supported closed form or overlap expression for the requested combination."""


class CalibrationError(VistaError):
    """Calibration input unusable (non-monotone estimator sweep)."""


class NoPeakError(VistaError):
    """Spectrum had no usable non-DC peak."""
