"""Exception and warning types shared across the package."""


class FibredFlowerError(Exception):
    """Base class; ``code`` is a module-qualified identifier used by the CLI."""

    code = "fibred_flower.error"


class ResonanceError(FibredFlowerError, ValueError):
    """A small divisor vanishes exactly (rational rotation number or n = 0)."""

    code = "rotation.resonance"


class PreconditionError(FibredFlowerError, ValueError):
    code = "precondition"


class TruncationExhausted(FibredFlowerError):
    """The requested order lies beyond the jet truncation."""

    code = "reduction.truncation_exhausted"


class CohomologyObstruction(FibredFlowerError):
    """A cohomological equation admits no continuous solution."""

    code = "cohomology.obstruction"


class CertificationError(FibredFlowerError):
    """A numerical certificate could not be established within budget."""

    code = "petals.certification"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class DynamicsError(FibredFlowerError, FloatingPointError):
    code = "dynamics.nan"


class SpecError(FibredFlowerError, ValueError):
    """Map-spec validation failure carrying every violation found."""

    code = "cli.spec"

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class IllConditionedWarning(UserWarning):
    """A small divisor fell below the configured floor."""
