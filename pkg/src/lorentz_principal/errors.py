"""Exception hierarchy shared by every module of the package."""


class LorentzPrincipalError(Exception):
    """Base class for all errors raised by this package."""


class ParamError(LorentzPrincipalError, ValueError):
    """Chart or system parameters violate their admissibility predicate."""


class DomainError(LorentzPrincipalError, ValueError):
    """A parameter point lies outside the domain of a chart or map."""


class SingularChartError(LorentzPrincipalError, ArithmeticError):
    """The chart formula is not differentiable at the requested point."""


class DegenerateError(LorentzPrincipalError):
    """An operation that needs a non-degenerate metric was called on the tropic."""


class LightconeError(LorentzPrincipalError, ArithmeticError):
    """A point lies on (or too close to) the lightcone of an inversion center."""


class SeedAtUmbilicError(LorentzPrincipalError):
    pass


class SeedOutsideDomainError(LorentzPrincipalError):
    pass


class NotDarbouxianError(LorentzPrincipalError):
    """Separatrices were requested for an umbilic without Darbouxian type."""


class DegenerateLinearizationError(LorentzPrincipalError):
    """A Lie-Cartan singularity has a (numerically) vanishing eigenvalue."""


class NotPositiveDefiniteError(LorentzPrincipalError, ValueError):
    pass


class NoTimelikeEigenvectorError(LorentzPrincipalError):
    pass


class SceneError(LorentzPrincipalError):
    """A scene descriptor could not be read or failed schema validation."""


class IoError(LorentzPrincipalError, OSError):
    pass
