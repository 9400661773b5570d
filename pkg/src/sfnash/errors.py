"""Exception types. Validation problems are ValueErrors, numerical failures RuntimeErrors."""


class GameValidationError(ValueError):
    pass


class NotInActionSetError(ValueError):
    pass


class OutsideHullError(ValueError):
    def __init__(self, msg, distance=float("nan")):
        super().__init__(msg)
        self.distance = distance


class NumericalError(RuntimeError):
    pass


class InnerSolveError(NumericalError):
    def __init__(self, msg, gap=float("nan")):
        super().__init__(msg)
        self.gap = gap
