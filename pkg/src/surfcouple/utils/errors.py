class DegenerateMetric(ValueError):
    """The Weierstrass factor |wf| fell below the metric guard."""


class DomainExit(ValueError):
    """A chart step left the chart domain.

    Attributes
    ----------
    boundary : bool
        True if the chart edge is a boundary of the surface itself, False if it is only the edge of the
        chart (an artifact of truncating a complete surface).
    """

    def __init__(self, msg: str, boundary: bool = False):
        super().__init__(msg)
        self.boundary = boundary


class BadParams(ValueError):
    pass


class ParticlesCoincident(ValueError):
    pass


class NotOnSigmaE(ValueError):
    pass


class TooFewSamples(ValueError):
    pass


class BadDimension(ValueError):
    pass


class MissingBoundary(ValueError):
    pass
