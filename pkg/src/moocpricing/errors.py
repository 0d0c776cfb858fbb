"""Exception types shared across the package."""


class MoocPricingError(Exception):
    """Base class for all package errors."""


class AllBelowCostError(MoocPricingError):
    """No price above marginal cost yields a sale.

    ``result`` carries the flagged fallback outcome (price at marginal cost,
    zero demand, zero profit) so callers can still report it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class EmptyGridError(MoocPricingError, ValueError):
    pass


class EmptyExperimentsError(MoocPricingError, ValueError):
    pass


class DimensionMismatchError(MoocPricingError, ValueError):
    pass


class TooManyCoursesError(MoocPricingError, ValueError):
    pass


class NonUniformScheduleError(MoocPricingError, ValueError):
    pass


class NonPositivePriceError(MoocPricingError, ValueError):
    pass


class InvalidSpecError(MoocPricingError, ValueError):
    pass


class DataError(MoocPricingError):
    """Problem with an input data file (as opposed to configuration)."""


class MissingFileError(DataError, FileNotFoundError):
    pass


class SchemaMismatchError(DataError, ValueError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class InvariantViolationError(DataError, ValueError):
    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class ZeroTotalRevenueError(MoocPricingError, ValueError):
    pass


class ZeroMeanError(MoocPricingError, ValueError):
    pass


class NoCompletersError(MoocPricingError, ValueError):
    pass


class TooFewOfferingsError(MoocPricingError, ValueError):
    pass


class MixedCourseIdsError(MoocPricingError, ValueError):
    pass
