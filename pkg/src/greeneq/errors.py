"""Exception types raised across the package."""


class GreenEqError(Exception):
    """Base class for all package errors."""


class PointOutsideDomain(GreenEqError, ValueError):
    pass


class PointOutsideK(GreenEqError, ValueError):
    pass


class DuplicateNodes(GreenEqError, ValueError):
    def __init__(self, i, j):
        super().__init__(f"nodes {i} and {j} coincide")
        self.indices = (i, j)


class AllInfinite(GreenEqError, ValueError):
    pass


class NTooSmall(GreenEqError, ValueError):
    pass


class ConstraintViolated(GreenEqError, ValueError):
    pass


class ProblemTooLarge(GreenEqError, ValueError):
    pass


class GridTooSmall(GreenEqError, ValueError):
    pass


class SingularMatrix(GreenEqError, ArithmeticError):
    pass


class EmptyHistory(GreenEqError, ValueError):
    pass


class EmptyGrid(GreenEqError, ValueError):
    pass


class EmptyA(GreenEqError, ValueError):
    pass


class ZeroMeasure(GreenEqError, ValueError):
    pass


class ConfigParse(GreenEqError, ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
