"""Exception types raised by densitycut."""


class DensityCutError(Exception):
    """Base class for all library errors."""


class OutsideDomain(DensityCutError, ValueError):
    pass


class UnknownFamily(DensityCutError, KeyError):
    pass


class BadParams(DensityCutError, ValueError):
    pass


class NonIntegrable(DensityCutError, ArithmeticError):
    pass


class DegenerateMass(DensityCutError, ValueError):
    pass


class WitnessDegenerate(DensityCutError, ValueError):
    pass


class DivergentWeight(DensityCutError, ArithmeticError):
    pass


class GridTooCoarse(DensityCutError, ValueError):
    pass


class GridTooFine(DensityCutError, ValueError):
    pass


class EmptySide(DensityCutError, ValueError):
    pass


class ConstantVector(DensityCutError, ValueError):
    pass


class RadiusExceedsDomain(DensityCutError, ValueError):
    pass


class DisconnectedGraph(DensityCutError, ValueError):
    pass


class SingularPencil(DensityCutError, ArithmeticError):
    pass


class SolverNoConverge(DensityCutError, RuntimeError):
    """The eigensolver stopped before reaching the requested residual."""

    def __init__(self, iterations, residual, message=None):
        self.iterations = iterations
        self.residual = residual
        super().__init__(message or f"no convergence after {iterations} iterations "
                                    f"(residual {residual:.3e})")


class NoProgress(DensityCutError, RuntimeError):
    """An iterative partition round removed no mass; ``trail`` holds the rounds so far."""

    def __init__(self, trail, region, message=None):
        self.trail = trail
        self.region = region
        super().__init__(message or f"round {len(trail)} removed no mass")
