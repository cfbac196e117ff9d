"""Exception types shared across the package.

Each CLI-visible failure mode gets its own type so the command layer can map
it to a stable exit code without string matching.
"""


class FraclaneError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(FraclaneError):
    """Invalid user input: bad domain, resolution, exponents, or config file.

    CLI exit code 4.
    """


class ResonantProblemError(FraclaneError):
    """The exponent pair satisfies p*q == 1, which both solvers reject.

    The coupled power system degenerates into an eigenvalue problem there:
    amplitude is not determined by the equations, Newton Jacobians become
    singular along the solution ray, and no isolated positive solution exists
    to converge to.  CLI exit code 3.
    """


class NonconvergenceError(FraclaneError):
    """A solver exhausted its budget without meeting its tolerance.

    Carries the diagnostic trace so callers can report how far the run got.
    CLI exit code 2.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []
