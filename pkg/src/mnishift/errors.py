"""Exception types shared across the package."""


class MnishiftError(Exception):
    """Base class for all package errors."""


class ParameterOutOfRange(MnishiftError):
    """An ensemble or algorithm parameter violates its declared range."""


class DimensionOverflow(MnishiftError):
    """A requested ambient dimension exceeds the configured cap."""


class IndexOutOfRange(MnishiftError):
    """An index falls outside [0, d)."""


class DimensionMismatch(MnishiftError):
    """Objects built against different ambient dimensions were combined."""


class ZeroCoefficient(MnishiftError):
    """A sparse signal coefficient is zero (support would be ill-defined)."""


class IndexNotInSupport(MnishiftError):
    """A per-support query was made for an index outside the support."""


class NoiseOutOfRange(MnishiftError):
    """Classification label noise must satisfy 0 <= nu < 0.5."""


class DegenerateLabel(MnishiftError):
    """A regression label is numerically zero; the multiplicative noise ratio is undefined."""


class NoisyLabels(MnishiftError):
    """An operation requiring noiseless classification labels got a noisy dataset."""


class SingularGram(MnishiftError):
    """Gram matrix factorization failed even after the jitter retry."""


class EmptySupport(MnishiftError):
    """A support-restricted operation received an empty support."""


class DenseSignal(MnishiftError):
    """Survival/contamination require a proper (sparse) support."""


class DecompositionViolation(MnishiftError):
    """The exact risk decomposition identity failed beyond tolerance (solver problem)."""


class BoundaryRegime(MnishiftError):
    """Spiked parameters sit exactly on the q = 1 - r boundary, which has no closed form."""


class UnsupportedRegime(MnishiftError):
    """No closed-form prediction covers this parameter combination."""


class UnknownPreset(MnishiftError):
    """Requested preset name is not defined."""


class ConfigError(MnishiftError):
    """Experiment configuration is invalid."""
