"""Exception hierarchy shared by all thinlab modules."""


class ThinlabError(Exception):
    """Base class for all thinlab errors."""


class ConfigError(ThinlabError):
    """Invalid run configuration or input file."""


class DisconnectedDomain(ThinlabError):
    """Rectangle union whose interior has more than one component."""


class NonNiceDecomposition(ThinlabError):
    """Strips touch in a way that admits no valid junction structure."""


class Unclassifiable(ThinlabError):
    """Edge weight fits none of the supported regularity cases."""


class QuadratureFailure(ThinlabError):
    """Quadrature of 1/p did not converge within the declared budget."""


class SingularWeight(ThinlabError):
    """Weight non-positive at a quadrature point."""


class EigensolverFailure(ThinlabError):
    """Generalized eigensolver failed to converge."""


class DegenerateEigenvalue(ThinlabError):
    """Per-vector alignment requested at a multiple limit eigenvalue."""


class NonconformingInput(ThinlabError):
    """Rectangles cannot be meshed conformingly."""


class NoAdmissibleNu(ThinlabError):
    """No computed cut level satisfies the smallness conditions."""


class TailTruncationTooCoarse(ThinlabError):
    """History horizon too short for the requested exponential weight."""


class ContractionViolated(ThinlabError):
    """Fixed-point iteration not contracting at the expected rate."""


class NuMismatch(ThinlabError):
    """Selected cut level not admissible across the squeeze sweep."""


class FluxSignViolation(ThinlabError):
    """Outward flux of the reduced field not negative on the level set."""


class BlowUp(ThinlabError):
    """Trajectory norm exceeded the blow-up threshold."""


class EmptySample(ThinlabError):
    """Semidistance of an empty sample set requested."""


class QuadratureMismatch(ThinlabError):
    """Coefficient vector inconsistent with the quadrature table."""


class HypothesisViolation(ThinlabError):
    """Comparison weight fails the monotone-concave-majorant hypotheses."""
