"""Exception types raised by the package."""


class NotHermitianError(ValueError):
    pass


class NegativeEigenvalueError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


class SizeLimitError(ValueError):
    """Requested dense construction exceeds the configured matrix side limit."""


class TriangleInequalityError(ValueError):
    pass
