"""Exception types raised by the simulator."""


class ShgcatError(Exception):
    """Base class for all package errors."""


class NumericalError(ShgcatError):
    """A numerical routine could not produce a trustworthy answer."""


class NoConvergence(NumericalError):
    """An iterative eigensolver hit its iteration cap."""


class DegenerateGap(NumericalError):
    """Perturbation theory requested across a gap that is too small."""


class NotSymmetric(ShgcatError, ValueError):
    """A matrix expected to be real symmetric is not."""


class SectorMismatch(ShgcatError, ValueError):
    """A propagator does not cover the sectors of the state it acts on."""


class ConfigError(ShgcatError, ValueError):
    """Invalid scenario configuration."""
