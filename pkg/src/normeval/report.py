"""Evaluation orchestration and report emission.

run_evaluation ties the pieces together: normalize, score the intrinsic
metrics, compute semantic retention, apply the safety gate, and measure
downstream classifier deltas against a shared un-normalized baseline.
Reports serialize to JSON (machine, full precision) and Markdown
(human, rounded), one row group per normalizer.
"""

from __future__ import annotations

import json
import shlex
from dataclasses import dataclass, field

from .corpus import (
    Corpus,
    TokenizedDocument,
    TokenizerConfig,
    build_vocabulary,
    load_corpus,
    make_folds,
    tokenize_corpus,
)
from .downstream import EvalRun, MpdResult, cross_validate, make_classifier_spec, mcnemar, mpd
from .embeddings import (
    EmbeddingProvider,
    HashedNgramProvider,
    HttpServiceProvider,
    IrsResult,
    VectorFileProvider,
    irs,
)
from .errors import EvaluationError, NormEvalError, NormalizerError
from .metrics import AnldResult, CompressionResult, anld, compression_ratio
from .normalizers import (
    ExternalNormalizer,
    IdentityNormalizer,
    MappingNormalizer,
    Normalizer,
    SnowballEnglishNormalizer,
    TokenMapping,
    TruncateNormalizer,
    normalize_corpus,
)
from .ses import DEFAULT_ANLD_THRESHOLD, SesResult, safety_gate, ses_consistency_ok

CLASSIFIER_ALIASES = {
    "nb": "multinomial_nb",
    "lr": "logistic_regression",
    "svm": "linear_svm",
    "multinomial_nb": "multinomial_nb",
    "logistic_regression": "logistic_regression",
    "linear_svm": "linear_svm",
}


@dataclass(frozen=True)
class RunConfig:
    """Complete, serializable description of one evaluation run."""

    corpus_path: str
    normalizers: tuple[str, ...]
    text_col: str = "text"
    label_col: str = "label"
    delimiter: str = "\t"
    has_header: bool = True
    lowercase: bool = True
    strip_punct: bool = True
    embedder: str = "hash:256:0"
    classifiers: tuple[str, ...] = ("multinomial_nb", "logistic_regression", "linear_svm")
    k: int = 5
    seed: int = 42
    anld_weighting: str = "by_occurrence"
    safety_threshold: float = DEFAULT_ANLD_THRESHOLD
    worst_n: int = 20

    def __post_init__(self):
        if not self.normalizers:
            raise EvaluationError("config needs at least one normalizer")
        if self.anld_weighting not in ("by_occurrence", "by_type"):
            raise EvaluationError(f"unknown anld weighting {self.anld_weighting!r}")
        unknown = [c for c in self.classifiers if c not in CLASSIFIER_ALIASES]
        if unknown:
            raise EvaluationError(f"unknown classifier name(s) {unknown}")

    def to_dict(self) -> dict:
        return {
            "corpus_path": self.corpus_path,
            "normalizers": list(self.normalizers),
            "text_col": self.text_col,
            "label_col": self.label_col,
            "delimiter": self.delimiter,
            "has_header": self.has_header,
            "lowercase": self.lowercase,
            "strip_punct": self.strip_punct,
            "embedder": self.embedder,
            "classifiers": list(self.classifiers),
            "k": self.k,
            "seed": self.seed,
            "anld_weighting": self.anld_weighting,
            "safety_threshold": self.safety_threshold,
            "worst_n": self.worst_n,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        data["normalizers"] = tuple(data["normalizers"])
        data["classifiers"] = tuple(data["classifiers"])
        return cls(**data)


@dataclass(frozen=True)
class ClassifierDelta:
    classifier: str
    original: EvalRun
    normalized: EvalRun
    mpd_accuracy: MpdResult
    mpd_macro_f1: MpdResult
    mcnemar_p: float


@dataclass(frozen=True)
class NormalizerReport:
    normalizer: str
    error: str | None = None
    compression: CompressionResult | None = None
    irs_result: IrsResult | None = None
    ses_result: SesResult | None = None
    anld_primary: AnldResult | None = None
    anld_alternate: AnldResult | None = None
    deltas: tuple[ClassifierDelta, ...] = ()
    empty_stems: int = 0
    consistency_ok: bool = True

    @property
    def failed(self) -> bool:
        return self.error is not None


def build_normalizer(spec: str) -> Normalizer:
    """Instantiate a normalizer from its spec string.

    Grammar: identity | snowball-en | truncate:<n> | map:<path> |
    ext:<command...> (command split shell-style).
    """
    if spec == "identity":
        return IdentityNormalizer()
    if spec == "snowball-en":
        return SnowballEnglishNormalizer()
    if spec.startswith("truncate:"):
        arg = spec[len("truncate:") :]
        try:
            n = int(arg)
        except ValueError:
            raise NormalizerError(f"truncate length must be an integer, got {arg!r}") from None
        return TruncateNormalizer(n)
    if spec.startswith("map:"):
        return MappingNormalizer(spec[len("map:") :])
    if spec.startswith("ext:"):
        command = shlex.split(spec[len("ext:") :])
        if not command:
            raise NormalizerError("ext: spec needs a command")
        return ExternalNormalizer(command)
    raise NormalizerError(
        f"unknown normalizer spec {spec!r}; expected identity, snowball-en, "
        f"truncate:<n>, map:<path>, or ext:<command>"
    )


def build_embedder(spec: str) -> EmbeddingProvider:
    """Instantiate an embedding provider from its spec string.

    Grammar: hash[:<dim>[:<seed>]] | vecfile:<path> | http:<url>.
    """
    if spec == "hash" or spec.startswith("hash:"):
        parts = spec.split(":")
        try:
            dim = int(parts[1]) if len(parts) > 1 else 256
            seed = int(parts[2]) if len(parts) > 2 else 0
        except ValueError:
            raise EvaluationError(f"bad hash embedder spec {spec!r}") from None
        if len(parts) > 3:
            raise EvaluationError(f"bad hash embedder spec {spec!r}")
        return HashedNgramProvider(dim=dim, seed=seed)
    if spec.startswith("vecfile:"):
        return VectorFileProvider(spec[len("vecfile:") :])
    if spec.startswith("http:") or spec.startswith("https:"):
        return HttpServiceProvider(spec)
    raise EvaluationError(
        f"unknown embedder spec {spec!r}; expected hash:<dim>:<seed>, vecfile:<path>, or http:<url>"
    )


class _PrecomputedNormalizer(Normalizer):
    """Replays an already-observed token mapping so downstream folds can
    re-normalize without touching the (possibly external) normalizer."""

    def __init__(self, name: str, pairs: dict[str, str]):
        self.name = name
        self._pairs = pairs

    def normalize_token(self, token: str) -> str:
        return self._pairs[token]


def _evaluate_one(
    name: str,
    mapping: TokenMapping,
    original_docs: list[TokenizedDocument],
    normalized_docs: list[TokenizedDocument],
    corpus: Corpus,
    folds,
    provider: EmbeddingProvider,
    baselines: dict[str, EvalRun],
    config: RunConfig,
    tokenizer: TokenizerConfig,
) -> NormalizerReport:
    compression = compression_ratio(
        build_vocabulary(original_docs), build_vocabulary(normalized_docs)
    )
    primary = anld(mapping, weighting=config.anld_weighting, worst_n=config.worst_n)
    alternate_mode = "by_type" if config.anld_weighting == "by_occurrence" else "by_occurrence"
    alternate = anld(mapping, weighting=alternate_mode, worst_n=0)
    irs_result = irs(provider, original_docs, normalized_docs)
    gated = safety_gate(
        irs_result.irs, compression.cr, primary.anld, config.safety_threshold
    )
    replay = _PrecomputedNormalizer(name, mapping.pairs)
    deltas = []
    for alias in config.classifiers:
        kind = CLASSIFIER_ALIASES[alias]
        run_norm = cross_validate(corpus, folds, make_classifier_spec(kind, config.seed),
                                  normalizer=replay, tokenizer=tokenizer)
        run_orig = baselines[kind]
        gold = {doc.id: doc.label for doc in corpus.documents}
        deltas.append(
            ClassifierDelta(
                classifier=kind,
                original=run_orig,
                normalized=run_norm,
                mpd_accuracy=mpd(run_norm, run_orig, "accuracy"),
                mpd_macro_f1=mpd(run_norm, run_orig, "macro_f1"),
                mcnemar_p=mcnemar(
                    run_norm.per_doc_predictions, run_orig.per_doc_predictions, gold
                ),
            )
        )
    return NormalizerReport(
        normalizer=name,
        compression=compression,
        irs_result=irs_result,
        ses_result=gated,
        anld_primary=primary,
        anld_alternate=alternate,
        deltas=tuple(deltas),
        empty_stems=mapping.empty_stem_count,
        consistency_ok=ses_consistency_ok(compression.cr, irs_result.irs, gated.ses),
    )


def run_evaluation(config: RunConfig) -> list[NormalizerReport]:
    """Evaluate every configured normalizer over the configured corpus.

    The un-normalized downstream baseline is computed once per
    classifier and shared. A failure inside one normalizer's pipeline
    becomes a failure entry in its report; the others still complete.
    Corpus loading or baseline failures abort the whole run.
    """
    corpus = load_corpus(
        config.corpus_path,
        text_col=config.text_col,
        label_col=config.label_col,
        delimiter=config.delimiter,
        has_header=config.has_header,
    )
    tokenizer = TokenizerConfig(lowercase=config.lowercase, strip_punct=config.strip_punct)
    original_docs = tokenize_corpus(corpus, tokenizer)
    provider = build_embedder(config.embedder)
    baselines: dict[str, EvalRun] = {}
    folds = None
    if config.classifiers:
        if len(corpus.labels) < 2:
            raise EvaluationError("downstream evaluation requires at least 2 labels")
        folds = make_folds(corpus, config.k, config.seed)
        for alias in config.classifiers:
            kind = CLASSIFIER_ALIASES[alias]
            if kind not in baselines:
                baselines[kind] = cross_validate(
                    corpus, folds, make_classifier_spec(kind, config.seed), tokenizer=tokenizer
                )
    reports: list[NormalizerReport] = []
    for spec in config.normalizers:
        normalizer = None
        try:
            normalizer = build_normalizer(spec)
            normalized_docs, mapping = normalize_corpus(normalizer, original_docs)
            reports.append(
                _evaluate_one(
                    normalizer.name, mapping, original_docs, normalized_docs,
                    corpus, folds, provider, baselines, config, tokenizer,
                )
            )
        except NormEvalError as exc:
            reports.append(NormalizerReport(normalizer=spec, error=str(exc)))
        finally:
            if normalizer is not None:
                normalizer.close()
    return reports


def _report_to_dict(report: NormalizerReport) -> dict:
    if report.failed:
        return {"normalizer": report.normalizer, "error": report.error}
    c = report.compression
    s = report.ses_result
    a = report.anld_primary
    alt = report.anld_alternate
    out = {
        "normalizer": report.normalizer,
        "compression": {"vocab_before": c.vocab_before, "vocab_after": c.vocab_after, "cr": c.cr},
        "irs": {"irs": report.irs_result.irs, "zero_vector_docs": report.irs_result.zero_vector_docs},
        "ses": s.ses,
        "verdict": s.verdict,
        "safety_threshold": s.threshold,
        "anld": {
            "weighting": a.weighting,
            "anld": a.anld,
            "pair_count": a.pair_count,
            "over_unit_pairs": a.over_unit_pairs,
            "alternate_weighting": alt.weighting,
            "alternate_anld": alt.anld,
            "worst_pairs": [
                {"original": orig, "stem": stem, "distance": dist}
                for orig, stem, dist in a.worst_pairs
            ],
        },
        "downstream": [
            {
                "classifier": d.classifier,
                "original": {"accuracy": d.original.mean_accuracy, "macro_f1": d.original.mean_macro_f1},
                "normalized": {"accuracy": d.normalized.mean_accuracy, "macro_f1": d.normalized.mean_macro_f1},
                "mpd_accuracy": {
                    "mpd": d.mpd_accuracy.mpd,
                    "p_value": d.mpd_accuracy.p_value,
                    "test": d.mpd_accuracy.test,
                    "significant": d.mpd_accuracy.significant,
                },
                "mpd_macro_f1": {
                    "mpd": d.mpd_macro_f1.mpd,
                    "p_value": d.mpd_macro_f1.p_value,
                    "test": d.mpd_macro_f1.test,
                    "significant": d.mpd_macro_f1.significant,
                },
                "mcnemar_p": d.mcnemar_p,
            }
            for d in report.deltas
        ],
        "warnings": {
            "empty_stems": report.empty_stems,
            "zero_vector_docs": report.irs_result.zero_vector_docs,
            "over_unit_pairs": a.over_unit_pairs,
            "ses_consistency_flag": not report.consistency_ok,
        },
    }
    return out


def emit_json(reports: list[NormalizerReport], path: str, config: RunConfig | None = None) -> None:
    """Write the machine-readable report: schema version, optional echoed
    config (including the seed), and one entry per normalizer. Key order
    and float formatting are stable, so identical runs produce
    byte-identical files."""
    payload: dict = {"schema": "1"}
    if config is not None:
        payload["config"] = config.to_dict()
    payload["reports"] = [_report_to_dict(r) for r in reports]
    text = json.dumps(payload, separators=(",", ":"), ensure_ascii=True)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise EvaluationError(f"cannot write JSON report to {path!r}: {exc}") from exc


def _pct(x: float) -> str:
    return f"{100.0 * x:.2f}"


def emit_markdown(reports: list[NormalizerReport], path: str, config: RunConfig | None = None) -> None:
    """Write the human-readable report: a summary table (one row per
    normalizer), per-classifier detail, worst over-stemming pairs, and
    footnotes for every flag. Displayed numbers are rounded; the JSON
    report keeps full precision."""
    lines: list[str] = ["# Normalizer evaluation", ""]
    if config is not None:
        lines += [
            f"Corpus: `{config.corpus_path}` | folds: {config.k} | seed: {config.seed} | "
            f"embedder: `{config.embedder}` | ANLD weighting: {config.anld_weighting} | "
            f"safety threshold: {config.safety_threshold}",
            "",
        ]
    ok = [r for r in reports if not r.failed]
    failed = [r for r in reports if r.failed]
    classifier_names: list[str] = []
    for r in ok:
        for d in r.deltas:
            if d.classifier not in classifier_names:
                classifier_names.append(d.classifier)

    header = ["Normalizer", "CR", "IRS", "SES", "ANLD"]
    header += [f"{name} acc (orig→norm)" for name in classifier_names]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    notes: list[str] = []
    for r in ok:
        verdict = "safe" if r.ses_result.safe else "UNSAFE"
        row = [
            r.normalizer,
            f"{r.compression.cr:.2f}",
            f"{r.irs_result.irs:.2f}",
            f"{r.ses_result.ses:.2f} ({verdict})",
            f"{r.anld_primary.anld:.2f}",
        ]
        by_kind = {d.classifier: d for d in r.deltas}
        for name in classifier_names:
            d = by_kind.get(name)
            if d is None:
                row.append("-")
            else:
                mark = "*" if d.mpd_accuracy.significant else ""
                row.append(
                    f"{_pct(d.original.mean_accuracy)} → {_pct(d.normalized.mean_accuracy)}{mark}"
                )
        lines.append("| " + " | ".join(row) + " |")
        if not r.ses_result.safe:
            notes.append(
                f"`{r.normalizer}`: UNSAFE, ANLD {r.anld_primary.anld:.2f} exceeds "
                f"threshold {r.ses_result.threshold:.2f}; its SES should not be optimized for."
            )
        if not r.consistency_ok:
            notes.append(
                f"`{r.normalizer}`: SES-consistency flag, reported SES differs from CR x IRS "
                f"by more than 0.005."
            )
        if r.empty_stems:
            notes.append(f"`{r.normalizer}`: {r.empty_stems} token type(s) normalized to empty stems.")
        if r.irs_result.zero_vector_docs:
            notes.append(
                f"`{r.normalizer}`: {r.irs_result.zero_vector_docs} document(s) embedded to a zero "
                f"vector and scored 0 retention."
            )
        if r.anld_primary.over_unit_pairs:
            notes.append(
                f"`{r.normalizer}`: {r.anld_primary.over_unit_pairs} pair(s) with normalized "
                f"distance above 1 (stem longer than original)."
            )
    lines.append("")
    if any(d.mpd_accuracy.significant for r in ok for d in r.deltas):
        lines += ["`*` accuracy delta significant at p < 0.05 (paired t).", ""]

    if classifier_names:
        lines += ["## Downstream detail", ""]
        lines.append(
            "| Normalizer | Classifier | Acc orig | Acc norm | MPD | p (paired t) | "
            "p (McNemar) | Macro-F1 orig | Macro-F1 norm |"
        )
        lines.append("|" + "---|" * 9)
        for r in ok:
            for d in r.deltas:
                lines.append(
                    "| {} | {} | {} | {} | {:+.2f} | {:.4f} | {:.4f} | {} | {} |".format(
                        r.normalizer,
                        d.classifier,
                        _pct(d.original.mean_accuracy),
                        _pct(d.normalized.mean_accuracy),
                        100.0 * d.mpd_accuracy.mpd,
                        d.mpd_accuracy.p_value,
                        d.mcnemar_p,
                        _pct(d.original.mean_macro_f1),
                        _pct(d.normalized.mean_macro_f1),
                    )
                )
        lines.append("")

    pairs_sections = [r for r in ok if r.anld_primary.worst_pairs]
    if pairs_sections:
        lines += ["## Worst over-stemming pairs", ""]
        for r in pairs_sections:
            lines += [f"### {r.normalizer}", "", "| Original | Stem | Normalized distance |", "|---|---|---|"]
            for orig, stem, dist in r.anld_primary.worst_pairs:
                lines.append(f"| {orig} | {stem if stem else '(empty)'} | {dist:.2f} |")
            lines.append("")

    if notes:
        lines += ["## Notes", ""]
        lines += [f"- {note}" for note in notes]
        lines.append("")

    if failed:
        lines += ["## Failed normalizers", ""]
        for r in failed:
            lines.append(f"- `{r.normalizer}`: {r.error}")
        lines.append("")

    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines))
    except OSError as exc:
        raise EvaluationError(f"cannot write Markdown report to {path!r}: {exc}") from exc
