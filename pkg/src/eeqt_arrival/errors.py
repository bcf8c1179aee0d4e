"""Exception hierarchy. Everything numerical derives from ``NumericalError`` so
the CLI can map it onto a single exit code."""


class NumericalError(RuntimeError):
    """A computation could not reach its stated accuracy."""


class OverflowRegionError(NumericalError, OverflowError):
    pass


class QuadratureError(NumericalError):
    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved tolerance {achieved:.3e})")
        self.achieved = achieved


class ContourError(NumericalError):
    pass


class ExpmError(NumericalError):
    pass


class StepSizeError(NumericalError):
    pass


class StateExhaustedError(NumericalError):
    pass


class BracketError(NumericalError, ValueError):
    pass


class MajorantError(NumericalError):
    pass


class InvalidRunError(NumericalError):
    """Grid run whose boundary leakage makes the efficiency accounting unreliable."""
