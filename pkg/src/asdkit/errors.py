"""Exception types shared across the package; the CLI maps them to exit codes."""


class ParameterError(ValueError):
    """Inputs violate an operation's preconditions."""


class SizeGuardError(RuntimeError):
    """A requested enumeration would exceed the memory guard."""


class NoCrossingError(RuntimeError):
    """Scan endpoints do not bracket a crossing."""


class UnreliableEstimateError(RuntimeError):
    """A fit or estimate fails its reliability policy."""


class DivergenceError(RuntimeError):
    """Quadrature does not settle under refinement."""


class DomainError(ValueError):
    """Evaluation outside a chart's admissible region, or a degenerate metric."""
