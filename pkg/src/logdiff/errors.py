"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or input data (CLI exit code 3)."""


class SolverFailure(RuntimeError):
    """The time stepper could not continue (CLI exit code 2)."""


class NewtonFailure(SolverFailure):
    """Newton iteration did not converge at the smallest allowed step."""


class BlowupDetected(SolverFailure):
    """Curvature ceiling exceeded or positivity lost during stepping."""


class CFLViolation(SolverFailure):
    """Explicit step requested above the stability bound; the step is rejected."""
