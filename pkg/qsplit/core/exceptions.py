"""
Error hierarchy for qsplit
Each error carries the CLI exit code and the name of the violated invariant
"""


class QSplitError(Exception):
    """Base class for all qsplit errors"""
    exit_code = 3

    def __init__(self, message: str = '', invariant: str = None):
        super().__init__(message)
        self.invariant = invariant or type(self).__name__

    def __str__(self):
        base = super().__str__()
        return f"[{self.invariant}] {base}" if base else self.invariant


class ConfigError(QSplitError):
    exit_code = 2


class NumericalPreconditionError(QSplitError):
    exit_code = 3


class ValidationFailure(QSplitError):
    exit_code = 1


# Configuration / potential validation
class NonPositiveA(ConfigError):
    pass


class GapError(ConfigError):
    pass


class NonPositiveMass(ConfigError):
    pass


class ScenarioError(ConfigError):
    pass


# Numerical preconditions
class DeltaNotPointwise(NumericalPreconditionError):
    pass


class NonPositiveK(NumericalPreconditionError):
    pass


class StepTooLarge(NumericalPreconditionError):
    pass


class FullTransmission(NumericalPreconditionError):
    pass


class AsymmetricPotential(NumericalPreconditionError):
    pass


class SpectrumLeaksNegativeK(NumericalPreconditionError):
    pass


class GridTooCoarse(NumericalPreconditionError):
    pass


class ZeroNorm(NumericalPreconditionError):
    pass


class ZeroWeight(NumericalPreconditionError):
    pass


class NoRoot(NumericalPreconditionError):
    pass


class WindowTooShort(NumericalPreconditionError):
    pass


class CFLAccuracyViolation(NumericalPreconditionError):
    pass


class BoundaryLeak(NumericalPreconditionError):
    pass


class ParityMismatch(NumericalPreconditionError):
    pass
