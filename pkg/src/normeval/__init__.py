"""Task-oriented evaluation of text normalizers.

Scores a token normalizer (stemmer or lemmatizer) along five axes:
vocabulary Compression Ratio, Information Retention Score from pooled
document embeddings, the combined Stemming Effectiveness Score with its
distortion safety gate, Average Normalized Levenshtein Distance, and
downstream Model Performance Delta under cross-validation with paired
significance tests.
"""

__version__ = "0.1.0"

from .corpus import (
    Corpus,
    Document,
    FoldPlan,
    TokenizedDocument,
    TokenizerConfig,
    Vocabulary,
    build_vocabulary,
    load_corpus,
    make_folds,
    tokenize,
    tokenize_corpus,
)
from .downstream import (
    ALPHA,
    ClassifierSpec,
    EvalRun,
    MpdResult,
    TfidfModel,
    accuracy,
    cross_validate,
    macro_f1,
    make_classifier_spec,
    mcnemar,
    mpd,
    mpd_delta,
    paired_t_pvalue,
    softmax_loss_and_grad,
    tfidf_fit,
    tfidf_transform,
    tfidf_transform_all,
    train,
)
from .embeddings import (
    DocumentEmbedding,
    EmbeddingProvider,
    HashedNgramProvider,
    HttpServiceProvider,
    IrsResult,
    VectorFileProvider,
    cosine,
    cosine_with_flag,
    irs,
    load_word2vec_text,
)
from .errors import (
    CorpusError,
    EmbeddingError,
    EvaluationError,
    MetricError,
    NormalizerError,
    NormEvalError,
)
from .metrics import (
    AnldResult,
    CompressionResult,
    anld,
    compression_ratio,
    levenshtein,
)
from .normalizers import (
    ExternalNormalizer,
    IdentityNormalizer,
    MappingNormalizer,
    Normalizer,
    SnowballEnglishNormalizer,
    TokenMapping,
    TruncateNormalizer,
    load_mapping,
    normalize_corpus,
)
from .report import (
    ClassifierDelta,
    NormalizerReport,
    RunConfig,
    build_embedder,
    build_normalizer,
    emit_json,
    emit_markdown,
    run_evaluation,
)
from .ses import (
    DEFAULT_ANLD_THRESHOLD,
    SES_CONSISTENCY_TOLERANCE,
    SesResult,
    safety_gate,
    ses,
    ses_consistency_ok,
)

__all__ = [
    "__version__",
    "Corpus",
    "Document",
    "FoldPlan",
    "TokenizedDocument",
    "TokenizerConfig",
    "Vocabulary",
    "build_vocabulary",
    "load_corpus",
    "make_folds",
    "tokenize",
    "tokenize_corpus",
    "NormEvalError",
    "CorpusError",
    "NormalizerError",
    "EmbeddingError",
    "MetricError",
    "EvaluationError",
    "Normalizer",
    "IdentityNormalizer",
    "SnowballEnglishNormalizer",
    "TruncateNormalizer",
    "MappingNormalizer",
    "ExternalNormalizer",
    "TokenMapping",
    "load_mapping",
    "normalize_corpus",
    "AnldResult",
    "CompressionResult",
    "anld",
    "compression_ratio",
    "levenshtein",
    "DocumentEmbedding",
    "EmbeddingProvider",
    "HashedNgramProvider",
    "VectorFileProvider",
    "HttpServiceProvider",
    "IrsResult",
    "cosine",
    "cosine_with_flag",
    "irs",
    "load_word2vec_text",
    "DEFAULT_ANLD_THRESHOLD",
    "SES_CONSISTENCY_TOLERANCE",
    "SesResult",
    "ses",
    "safety_gate",
    "ses_consistency_ok",
    "ALPHA",
    "ClassifierSpec",
    "EvalRun",
    "MpdResult",
    "TfidfModel",
    "accuracy",
    "macro_f1",
    "make_classifier_spec",
    "cross_validate",
    "mcnemar",
    "mpd",
    "mpd_delta",
    "paired_t_pvalue",
    "softmax_loss_and_grad",
    "tfidf_fit",
    "tfidf_transform",
    "tfidf_transform_all",
    "train",
    "ClassifierDelta",
    "NormalizerReport",
    "RunConfig",
    "build_embedder",
    "build_normalizer",
    "emit_json",
    "emit_markdown",
    "run_evaluation",
]
