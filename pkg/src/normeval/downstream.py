"""Downstream task evaluation: TF-IDF features, three deterministic
linear classifiers, stratified cross-validation, and the model
performance delta with paired significance testing.

The delta answers the question the intrinsic metrics cannot: does
normalizing the text actually change what a classifier can learn from
it? Scores are compared per fold against a shared un-normalized
baseline, and the delta is paired with a two-sided t-test (plus a
McNemar test over pooled out-of-fold predictions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse, stats

from .corpus import Corpus, FoldPlan, TokenizedDocument, TokenizerConfig, tokenize_corpus
from .errors import EvaluationError
from .normalizers import Normalizer, normalize_corpus

ALPHA = 0.05


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray
    doc_count: int


@dataclass(frozen=True)
class ClassifierSpec:
    """Classifier kind plus its training hyperparameters.

    alpha applies to multinomial_nb only; learning_rate and epochs apply
    to the two gradient-trained models only.
    """

    kind: str
    alpha: float = 1.0
    l2_lambda: float = 1e-4
    learning_rate: float = 0.5
    epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.kind not in CLASSIFIER_KINDS:
            raise EvaluationError(
                f"unknown classifier kind {self.kind!r}; expected one of {sorted(CLASSIFIER_KINDS)}"
            )
        if self.alpha <= 0:
            raise EvaluationError(f"alpha must be > 0, got {self.alpha}")
        if self.l2_lambda < 0:
            raise EvaluationError(f"l2_lambda must be >= 0, got {self.l2_lambda}")
        if self.learning_rate <= 0:
            raise EvaluationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise EvaluationError(f"epochs must be >= 1, got {self.epochs}")


def make_classifier_spec(kind: str, seed: int = 0) -> ClassifierSpec:
    """Spec with the documented default hyperparameters for ``kind``."""
    if kind == "linear_svm":
        return ClassifierSpec(kind=kind, learning_rate=0.1, seed=seed)
    return ClassifierSpec(kind=kind, seed=seed)


@dataclass(frozen=True)
class EvalRun:
    classifier: str
    condition: str
    fold_scores: tuple[tuple[int, float, float], ...]
    mean_accuracy: float
    mean_macro_f1: float
    per_doc_predictions: dict[str, str]


@dataclass(frozen=True)
class MpdResult:
    metric_name: str
    mpd: float
    p_value: float
    test: str
    significant: bool


def tfidf_fit(train_docs: list[TokenizedDocument]) -> TfidfModel:
    """Fit vocabulary and smoothed idf on training documents only:
    idf(t) = ln((1 + N) / (1 + df(t))) + 1."""
    if not train_docs:
        raise EvaluationError("cannot fit TF-IDF on an empty training set")
    df: dict[str, int] = {}
    for doc in train_docs:
        for token in set(doc.tokens):
            df[token] = df.get(token, 0) + 1
    vocabulary = {token: i for i, token in enumerate(sorted(df))}
    n = len(train_docs)
    idf = np.empty(len(vocabulary), dtype=np.float64)
    for token, i in vocabulary.items():
        idf[i] = math.log((1 + n) / (1 + df[token])) + 1.0
    return TfidfModel(vocabulary=vocabulary, idf=idf, doc_count=n)


def tfidf_transform(model: TfidfModel, doc: TokenizedDocument) -> sparse.csr_matrix:
    """Single-document transform: raw token counts times idf, L2-normalized
    unless the document has no in-vocabulary tokens (then all-zero)."""
    return tfidf_transform_all(model, [doc])


def tfidf_transform_all(
    model: TfidfModel, docs: list[TokenizedDocument]
) -> sparse.csr_matrix:
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for r, doc in enumerate(docs):
        counts: dict[int, int] = {}
        for token in doc.tokens:
            j = model.vocabulary.get(token)
            if j is not None:
                counts[j] = counts.get(j, 0) + 1
        if not counts:
            continue
        weights = {j: tf * model.idf[j] for j, tf in counts.items()}
        norm = math.sqrt(sum(w * w for w in weights.values()))
        for j in sorted(weights):
            rows.append(r)
            cols.append(j)
            vals.append(weights[j] / norm)
    return sparse.csr_matrix(
        (vals, (rows, cols)), shape=(len(docs), len(model.vocabulary)), dtype=np.float64
    )


class MultinomialNBClassifier:
    """Multinomial naive Bayes over non-negative feature values with
    Laplace smoothing. Ties resolve to the lowest class in sort order
    (argmax over classes sorted ascending returns the first maximum)."""

    def __init__(self, classes: list[str], log_prior: np.ndarray, log_likelihood: np.ndarray):
        self.classes = classes
        self.log_prior = log_prior
        self.log_likelihood = log_likelihood

    def decision_scores(self, X) -> np.ndarray:
        return np.asarray(X @ self.log_likelihood.T) + self.log_prior

    def predict(self, X) -> list[str]:
        scores = self.decision_scores(X)
        return [self.classes[i] for i in np.argmax(scores, axis=1)]

    def predict_proba(self, X) -> np.ndarray:
        scores = self.decision_scores(X)
        scores -= scores.max(axis=1, keepdims=True)
        expd = np.exp(scores)
        return expd / expd.sum(axis=1, keepdims=True)


def _train_multinomial_nb(spec: ClassifierSpec, X, y_idx: np.ndarray, classes: list[str]):
    n_features = X.shape[1]
    k = len(classes)
    log_prior = np.empty(k)
    log_likelihood = np.empty((k, n_features))
    for c in range(k):
        mask = y_idx == c
        log_prior[c] = math.log(mask.sum() / len(y_idx))
        feature_sums = np.asarray(X[np.where(mask)[0]].sum(axis=0)).ravel()
        smoothed = feature_sums + spec.alpha
        log_likelihood[c] = np.log(smoothed) - math.log(smoothed.sum())
    return MultinomialNBClassifier(classes, log_prior, log_likelihood)


def softmax_loss_and_grad(W: np.ndarray, X, y_idx: np.ndarray, l2_lambda: float):
    """Multinomial softmax objective and its gradient in W (classes x
    features): mean cross-entropy plus (l2/2)||W||^2. Exposed so the
    analytic gradient can be checked against finite differences."""
    n = X.shape[0]
    scores = np.asarray(X @ W.T)
    scores -= scores.max(axis=1, keepdims=True)
    expd = np.exp(scores)
    probs = expd / expd.sum(axis=1, keepdims=True)
    loss = -np.mean(np.log(probs[np.arange(n), y_idx])) + 0.5 * l2_lambda * float(
        np.sum(W * W)
    )
    delta = probs.copy()
    delta[np.arange(n), y_idx] -= 1.0
    grad = np.asarray((X.T @ delta).T) / n + l2_lambda * W
    return loss, grad


class LogisticRegressionClassifier:
    def __init__(self, classes: list[str], W: np.ndarray):
        self.classes = classes
        self.W = W

    def decision_scores(self, X) -> np.ndarray:
        return np.asarray(X @ self.W.T)

    def predict(self, X) -> list[str]:
        scores = self.decision_scores(X)
        return [self.classes[i] for i in np.argmax(scores, axis=1)]


def _train_logistic_regression(spec: ClassifierSpec, X, y_idx: np.ndarray, classes: list[str]):
    W = np.zeros((len(classes), X.shape[1]), dtype=np.float64)
    for _ in range(spec.epochs):
        _, grad = softmax_loss_and_grad(W, X, y_idx, spec.l2_lambda)
        W -= spec.learning_rate * grad
    return LogisticRegressionClassifier(classes, W)


class LinearSvmClassifier:
    def __init__(self, classes: list[str], W: np.ndarray):
        self.classes = classes
        self.W = W

    def decision_scores(self, X) -> np.ndarray:
        return np.asarray(X @ self.W.T)

    def predict(self, X) -> list[str]:
        scores = self.decision_scores(X)
        return [self.classes[i] for i in np.argmax(scores, axis=1)]


def _train_linear_svm(spec: ClassifierSpec, X, y_idx: np.ndarray, classes: list[str]):
    """One-vs-rest hinge loss, per-sample subgradient steps in a seeded
    per-epoch permutation. The uniform L2 shrink is tracked as a lazy
    scalar so each step costs O(classes + nnz of the sample row)."""
    X = sparse.csr_matrix(X)
    n, n_features = X.shape
    k = len(classes)
    lr, lam = spec.learning_rate, spec.l2_lambda
    if lr * lam >= 1.0:
        raise EvaluationError(
            f"learning_rate * l2_lambda must be < 1 for stable updates, got {lr * lam}"
        )
    shrink = 1.0 - lr * lam
    rng = np.random.default_rng(spec.seed)
    W = np.zeros((k, n_features), dtype=np.float64)
    scale = 1.0
    signs = np.full((n, k), -1.0)
    signs[np.arange(n), y_idx] = 1.0
    for _ in range(spec.epochs):
        for i in rng.permutation(n):
            lo, hi = X.indptr[i], X.indptr[i + 1]
            cols = X.indices[lo:hi]
            vals = X.data[lo:hi]
            margins = signs[i] * scale * (W[:, cols] @ vals)
            scale *= shrink
            violating = np.where(margins < 1.0)[0]
            if violating.size:
                W[np.ix_(violating, cols)] += np.outer(
                    signs[i, violating] * (lr / scale), vals
                )
    return LinearSvmClassifier(classes, W * scale)


CLASSIFIER_KINDS = {
    "multinomial_nb": _train_multinomial_nb,
    "logistic_regression": _train_logistic_regression,
    "linear_svm": _train_linear_svm,
}


def train(spec: ClassifierSpec, X, labels: list[str]):
    """Train the classifier named by spec on feature rows X. Training is
    deterministic for fixed inputs and seed. Requires >= 2 classes."""
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise EvaluationError(f"training set has a single class {classes}; need at least 2")
    index = {c: i for i, c in enumerate(classes)}
    y_idx = np.array([index[lab] for lab in labels], dtype=np.intp)
    return CLASSIFIER_KINDS[spec.kind](spec, X, y_idx, classes)


def accuracy(gold: list[str], predicted: list[str]) -> float:
    if len(gold) != len(predicted):
        raise EvaluationError(f"length mismatch: {len(gold)} gold vs {len(predicted)} predicted")
    if not gold:
        raise EvaluationError("cannot score an empty prediction set")
    return sum(g == p for g, p in zip(gold, predicted)) / len(gold)


def macro_f1(gold: list[str], predicted: list[str]) -> float:
    """Unweighted mean of per-class F1 over the classes present in gold.

    Classes absent from gold are excluded even if predicted; a gold
    class with zero precision+recall contributes F1 = 0.
    """
    if len(gold) != len(predicted):
        raise EvaluationError(f"length mismatch: {len(gold)} gold vs {len(predicted)} predicted")
    if not gold:
        raise EvaluationError("cannot score an empty prediction set")
    scores = []
    for cls in sorted(set(gold)):
        tp = sum(1 for g, p in zip(gold, predicted) if g == cls and p == cls)
        fp = sum(1 for g, p in zip(gold, predicted) if g != cls and p == cls)
        fn = sum(1 for g, p in zip(gold, predicted) if g == cls and p != cls)
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return sum(scores) / len(scores)


def cross_validate(
    corpus: Corpus,
    folds: FoldPlan,
    spec: ClassifierSpec,
    normalizer: Normalizer | None = None,
    tokenizer: TokenizerConfig = TokenizerConfig(),
) -> EvalRun:
    """Out-of-fold evaluation: for each fold, TF-IDF and the classifier
    are fitted on the other folds only, so no test-fold token ever
    enters the feature space (leakage guard). Normalization, when given,
    is applied per token before featurization."""
    missing = [doc.id for doc in corpus.documents if doc.id not in folds.assignments]
    if missing:
        raise EvaluationError(f"fold plan does not cover document ids {missing[:5]}")
    docs = tokenize_corpus(corpus, tokenizer)
    condition = "original"
    if normalizer is not None:
        docs, _ = normalize_corpus(normalizer, docs)
        condition = "normalized"
    by_id = {doc.doc_id: doc for doc in docs}
    gold = {doc.id: doc.label for doc in corpus.documents}
    fold_scores: list[tuple[int, float, float]] = []
    predictions: dict[str, str] = {}
    for fold in range(folds.k):
        train_ids = [d.id for d in corpus.documents if folds.assignments[d.id] != fold]
        test_ids = [d.id for d in corpus.documents if folds.assignments[d.id] == fold]
        model = tfidf_fit([by_id[i] for i in train_ids])
        Xtr = tfidf_transform_all(model, [by_id[i] for i in train_ids])
        Xte = tfidf_transform_all(model, [by_id[i] for i in test_ids])
        clf = train(spec, Xtr, [gold[i] for i in train_ids])
        preds = clf.predict(Xte)
        gold_te = [gold[i] for i in test_ids]
        fold_scores.append((fold, accuracy(gold_te, preds), macro_f1(gold_te, preds)))
        for doc_id, pred in zip(test_ids, preds):
            predictions[doc_id] = pred
    predictions = {doc.id: predictions[doc.id] for doc in corpus.documents}
    return EvalRun(
        classifier=spec.kind,
        condition=condition,
        fold_scores=tuple(fold_scores),
        mean_accuracy=sum(s[1] for s in fold_scores) / len(fold_scores),
        mean_macro_f1=sum(s[2] for s in fold_scores) / len(fold_scores),
        per_doc_predictions=predictions,
    )


def mpd_delta(metric_normalized: float, metric_original: float) -> float:
    """Performance delta in the callers' units: normalized minus original."""
    return float(metric_normalized - metric_original)


def paired_t_pvalue(differences: list[float]) -> float:
    """Two-sided paired t-test p-value over per-fold score differences.

    Degenerate-variance conventions: all differences zero -> 1.0; all
    differences equal and non-zero -> 0.0.
    """
    if not differences:
        raise EvaluationError("paired t-test needs at least one difference")
    diffs = np.asarray(differences, dtype=np.float64)
    # constancy is checked on the values, not on the sample deviation:
    # std([0.1, 0.1, 0.1]) is ~1e-17 because the mean is not representable
    if np.all(diffs == diffs[0]):
        return 1.0 if diffs[0] == 0.0 else 0.0
    sd = float(np.std(diffs, ddof=1))
    t_stat = float(np.mean(diffs)) / (sd / math.sqrt(len(diffs)))
    return float(2.0 * stats.t.sf(abs(t_stat), df=len(diffs) - 1))


def mpd(run_normalized: EvalRun, run_original: EvalRun, metric: str = "accuracy") -> MpdResult:
    """Model performance delta for one classifier: mean normalized fold
    score minus mean original fold score, with a paired two-sided t-test
    over the per-fold differences. Requires matching classifier and
    fold structure."""
    if metric not in ("accuracy", "macro_f1"):
        raise EvaluationError(f"unknown metric {metric!r}; expected accuracy or macro_f1")
    if run_normalized.classifier != run_original.classifier:
        raise EvaluationError(
            f"classifier mismatch: {run_normalized.classifier!r} vs {run_original.classifier!r}"
        )
    folds_a = [s[0] for s in run_normalized.fold_scores]
    folds_b = [s[0] for s in run_original.fold_scores]
    if folds_a != folds_b:
        raise EvaluationError(f"fold mismatch: {folds_a} vs {folds_b}")
    col = 1 if metric == "accuracy" else 2
    diffs = [
        sa[col] - sb[col]
        for sa, sb in zip(run_normalized.fold_scores, run_original.fold_scores)
    ]
    p_value = paired_t_pvalue(diffs)
    delta = mpd_delta(
        sum(s[col] for s in run_normalized.fold_scores) / len(diffs),
        sum(s[col] for s in run_original.fold_scores) / len(diffs),
    )
    return MpdResult(
        metric_name=metric,
        mpd=delta,
        p_value=p_value,
        test="paired_t",
        significant=p_value < ALPHA,
    )


def mcnemar(
    preds_a: dict[str, str], preds_b: dict[str, str], gold: dict[str, str]
) -> float:
    """Two-sided McNemar p-value over pooled out-of-fold predictions.

    Exact binomial when the disagreement count n01+n10 <= 25, else
    chi-square with continuity correction. Identical predictions -> 1.0.
    """
    if set(preds_a) != set(preds_b) or set(preds_a) != set(gold):
        raise EvaluationError("prediction and gold document sets differ")
    n01 = sum(1 for i in gold if preds_a[i] == gold[i] and preds_b[i] != gold[i])
    n10 = sum(1 for i in gold if preds_a[i] != gold[i] and preds_b[i] == gold[i])
    n = n01 + n10
    if n == 0:
        return 1.0
    if n <= 25:
        return float(min(1.0, 2.0 * stats.binom.cdf(min(n01, n10), n, 0.5)))
    chi = (abs(n01 - n10) - 1.0) ** 2 / n
    return float(stats.chi2.sf(chi, df=1))
