class ValidationError(ValueError):
    """Input data is malformed.  ``errors`` lists every problem found."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class MathematicalRefusal(Exception):
    """Well-formed input on which the requested computation is undefined."""


class NotPseudoEffectiveError(MathematicalRefusal):
    pass


class InconsistentSurfaceDataError(MathematicalRefusal):
    pass


class IncompleteCurveDataError(MathematicalRefusal):
    pass


class NotContractibleError(MathematicalRefusal):
    pass


class PreconditionError(MathematicalRefusal):
    pass


class AccumulationLocusError(MathematicalRefusal):
    pass


class NoPathError(MathematicalRefusal):
    pass
