"""Exception hierarchy shared across the package."""


class NormEvalError(Exception):
    """Base class for all errors raised by this package."""


class CorpusError(NormEvalError):
    """Corpus file missing, malformed, or unusable."""


class NormalizerError(NormEvalError):
    """Normalizer construction or token normalization failed."""


class EmbeddingError(NormEvalError):
    """Embedding provider construction or lookup failed."""


class MetricError(NormEvalError):
    """A metric's precondition was violated (degenerate input)."""


class EvaluationError(NormEvalError):
    """Downstream evaluation or report assembly failed."""
