"""Exception hierarchy shared by the numerical modules."""


class NumericalError(ArithmeticError):
    """A computation left its domain of validity (maps to CLI exit code 3)."""


class HermitianError(NumericalError, ValueError):
    def __init__(self, residual, scale):
        self.residual = float(residual)
        self.scale = float(scale)
        super().__init__(
            f"matrix is not Hermitian: max|A - A^H| = {self.residual:.3e} "
            f"(allowed {1e-12 * max(1.0, self.scale):.3e})"
        )


class ConvergenceError(NumericalError):
    pass


class NotCompletelyPositiveError(NumericalError):
    pass


class SingularMapError(NumericalError):
    """The transfer matrix F(t) cannot be inverted at time ``t``."""

    def __init__(self, t, det):
        self.t = t
        self.det = det
        super().__init__(f"transfer matrix singular at t={t!r} (det F = {det!r})")
