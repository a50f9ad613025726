class ErgoCertError(Exception):
    pass


class InvalidSymbol(ErgoCertError):
    pass


class EmptyLabel(ErgoCertError):
    pass


class DimensionTooLarge(ErgoCertError):
    pass


class NotHermitian(ErgoCertError):
    pass


class NotPowerOfTwoDimension(ErgoCertError):
    pass


class DimensionMismatch(ErgoCertError):
    pass


class ConvergenceFailure(ErgoCertError):
    pass


class InvalidState(ErgoCertError):
    pass


class DegenerateExtremalLevels(ErgoCertError):
    pass


class MissingHamiltonian(ErgoCertError):
    pass


class NotUnitary(ErgoCertError):
    pass


class NotADistribution(ErgoCertError):
    pass


class LengthMismatch(ErgoCertError):
    pass


class InvalidSpectrum(ErgoCertError):
    pass


class OutsideBlochBall(ErgoCertError):
    pass


class InfeasibleSet(ErgoCertError):
    """
    The constraint set admits no density matrix.

    :param advice: Smallest uniform epsilon inflation that restores
        feasibility, None if it was not computed.
    """

    def __init__(self, message="", advice=None):
        ErgoCertError.__init__(self, message)
        self.advice = advice


class SolverFailure(ErgoCertError):
    pass


class NonNestedConstraints(ErgoCertError):
    pass


class EmptyGrid(ErgoCertError):
    pass


class InvalidDelta(ErgoCertError):
    pass


class ZeroShots(ErgoCertError):
    pass


class InvalidRecord(ErgoCertError):
    pass


class ParseError(ErgoCertError):
    def __init__(self, message="", line=0):
        ErgoCertError.__init__(self, "line {}: {}".format(line, message))
        self.line = line


class EmptyInput(ErgoCertError):
    pass


class ConfigurationError(ErgoCertError):
    pass


class InconsistentRecordWarning(Warning):
    "Warned when a shot record estimate is off the +/-1 outcome lattice."
    pass


class EmptyExperimentWarning(Warning):
    "Warned when a coverage experiment is asked for zero repetitions."
    pass


class SolverAccuracyWarning(Warning):
    "Warned when a solver result is used although it did not converge."
    pass
