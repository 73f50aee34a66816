"""Exception hierarchy shared by all modules."""


class SatsecError(Exception):
    """Base class for library errors."""


class DimensionError(SatsecError, ValueError):
    """Inconsistent array shapes or invalid scalar arguments."""


class DimensionInfeasible(SatsecError):
    """Zero-forcing needs more antenna elements than constraints."""


class ZeroGain(SatsecError):
    """A beam has (numerically) zero gain towards its own user."""

    def __init__(self, beam, gain):
        self.beam = beam
        self.gain = gain
        super().__init__(f"beam {beam}: gain {gain:.3e} is numerically zero")


class Infeasible(SatsecError):
    """No finite power vector meets the targets.

    Raised when the update denominator ``mu_k - (1 + gamma_k) mu_ek`` is not
    positive, or when the iteration runs past the power ceiling.
    """

    def __init__(self, beam, denominator, iteration=None, trace=None, diverged=False):
        self.beam = beam
        self.denominator = denominator
        self.iteration = iteration
        self.trace = trace
        self.diverged = diverged
        where = "" if iteration is None else f" at iteration {iteration}"
        if diverged:
            msg = f"beam {beam}: power diverged{where} (denominator {denominator:.6e})"
        else:
            msg = f"beam {beam}: update denominator {denominator:.6e} <= 0{where}"
        super().__init__(msg)


class NotConverged(SatsecError):
    """Fixed-point iteration hit max_iter; the partial solution is attached."""

    def __init__(self, solution):
        self.solution = solution
        super().__init__(
            f"no convergence after {solution.iterations} iterations "
            f"(residual {solution.residual:.3e})"
        )


class TableExhausted(SatsecError, ValueError):
    """Requested spectral efficiency exceeds every row of the rate table."""
