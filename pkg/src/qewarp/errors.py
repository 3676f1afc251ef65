"""Exception hierarchy shared by every qewarp module."""


class QewarpError(Exception):
    """Base class for all library errors."""


class DimensionError(QewarpError, ValueError):
    pass


class InvalidDirectionError(QewarpError, ValueError):
    pass


class DomainError(QewarpError, ValueError):
    """Evaluation requested outside a profile's open domain."""


class SpecError(QewarpError, ValueError):
    """A WarpedSpec (or its JSON form) violates a construction invariant."""


class SingularConformalFactorError(QewarpError, ValueError):
    pass


class InvalidWarpingError(QewarpError, ValueError):
    pass


class InvalidPotentialError(QewarpError, ValueError):
    pass


class InadmissibleParametersError(QewarpError, ValueError):
    """Family parameters violate the admissibility conditions of the family."""


class NoRealBranchError(InadmissibleParametersError):
    pass


class DegenerateExponentError(InadmissibleParametersError):
    pass


class ComplexExponentError(InadmissibleParametersError):
    pass


class NearSingularityError(QewarpError, ArithmeticError):
    pass


class IntegrationError(QewarpError, RuntimeError):
    pass


class InvalidRequestError(QewarpError, ValueError):
    pass


class PreconditionError(QewarpError, ValueError):
    pass


class AssemblyRejectedError(QewarpError):
    def __init__(self, certified_mu: float, fiber2_mu: float):
        self.certified_mu = certified_mu
        self.fiber2_mu = fiber2_mu
        self.mismatch = abs(certified_mu - fiber2_mu)
        super().__init__(
            f"second-fiber Ricci constant {fiber2_mu!r} does not match certified "
            f"mu {certified_mu!r} (mismatch {self.mismatch:.3e})"
        )
