"""Command-line interface.

Subcommands:
  evaluate    full pipeline: CR, ANLD, IRS, SES + safety gate, downstream
              classifier deltas with significance, JSON/Markdown reports.
  metrics     intrinsic metrics only (CR, ANLD); no classifiers, no
              embeddings.
  anld-pairs  dump the worst (original, stem, distance) pairs as TSV.

Exit codes: 0 success; 1 configuration or I/O error; 2 evaluation failed
for every requested normalizer.
"""

from __future__ import annotations

import argparse
import json
import sys

from .corpus import TokenizerConfig, build_vocabulary, load_corpus, tokenize_corpus
from .errors import NormEvalError
from .metrics import anld, compression_ratio
from .normalizers import normalize_corpus
from .report import (
    CLASSIFIER_ALIASES,
    RunConfig,
    build_normalizer,
    emit_json,
    emit_markdown,
    run_evaluation,
)

_DELIMITERS = {"tab": "\t", "comma": ","}
_WEIGHTINGS = {"occurrence": "by_occurrence", "type": "by_type"}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors by default; 2 is reserved for
    # all-normalizers-failed, so usage errors must exit 1 instead.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_corpus_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", required=True, help="path to the delimited corpus file")
    parser.add_argument("--text-col", default="text", help="text column name or 0-based index")
    parser.add_argument("--label-col", default="label", help="label column name or 0-based index")
    parser.add_argument("--delimiter", choices=sorted(_DELIMITERS), default="tab")
    parser.add_argument("--no-header", action="store_true", help="corpus file has no header row")
    parser.add_argument("--no-lowercase", action="store_true", help="keep token case")
    parser.add_argument("--no-strip-punct", action="store_true", help="keep edge punctuation")
    parser.add_argument(
        "--normalizer",
        action="append",
        required=True,
        metavar="SPEC",
        help="identity | snowball-en | truncate:<n> | map:<path> | ext:<command>; repeatable",
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="normeval", description="Evaluate text normalizers.")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="full evaluation with downstream classifiers")
    _add_corpus_args(ev)
    ev.add_argument(
        "--embedder",
        default="hash:256:0",
        help="hash:<dim>:<seed> | vecfile:<path> | http:<url>",
    )
    ev.add_argument(
        "--classifiers",
        default="nb,lr,svm",
        help="comma-separated subset of nb,lr,svm (empty string skips downstream evaluation)",
    )
    ev.add_argument("--k", type=int, default=5, help="cross-validation fold count")
    ev.add_argument("--seed", type=int, default=42, help="fold and classifier seed")
    ev.add_argument("--anld-weighting", choices=sorted(_WEIGHTINGS), default="occurrence")
    ev.add_argument("--safety-threshold", type=float, default=0.20)
    ev.add_argument("--worst-n", type=int, default=20, help="over-stemming pairs to keep")
    ev.add_argument("--out-json", help="JSON report path (default: stdout)")
    ev.add_argument("--out-md", help="Markdown report path (optional)")

    me = sub.add_parser("metrics", help="intrinsic metrics only (CR, ANLD)")
    _add_corpus_args(me)
    me.add_argument("--anld-weighting", choices=sorted(_WEIGHTINGS), default="occurrence")
    me.add_argument("--worst-n", type=int, default=20)
    me.add_argument("--out-json", help="JSON output path (default: stdout)")

    ap = sub.add_parser("anld-pairs", help="dump worst (original, stem, distance) pairs as TSV")
    _add_corpus_args(ap)
    ap.add_argument("--anld-weighting", choices=sorted(_WEIGHTINGS), default="occurrence")
    ap.add_argument("--worst-n", type=int, default=20)

    return parser


def _tokenizer_from_args(args) -> TokenizerConfig:
    return TokenizerConfig(
        lowercase=not args.no_lowercase, strip_punct=not args.no_strip_punct
    )


def _load_tokenized(args):
    corpus = load_corpus(
        args.corpus,
        text_col=args.text_col,
        label_col=args.label_col,
        delimiter=_DELIMITERS[args.delimiter],
        has_header=not args.no_header,
    )
    return tokenize_corpus(corpus, _tokenizer_from_args(args))


def _cmd_evaluate(args) -> int:
    classifiers = tuple(c for c in args.classifiers.split(",") if c)
    bad = [c for c in classifiers if c not in CLASSIFIER_ALIASES]
    if bad:
        print(f"normeval: unknown classifier name(s) {bad}", file=sys.stderr)
        return 1
    config = RunConfig(
        corpus_path=args.corpus,
        normalizers=tuple(args.normalizer),
        text_col=args.text_col,
        label_col=args.label_col,
        delimiter=_DELIMITERS[args.delimiter],
        has_header=not args.no_header,
        lowercase=not args.no_lowercase,
        strip_punct=not args.no_strip_punct,
        embedder=args.embedder,
        classifiers=classifiers,
        k=args.k,
        seed=args.seed,
        anld_weighting=_WEIGHTINGS[args.anld_weighting],
        safety_threshold=args.safety_threshold,
        worst_n=args.worst_n,
    )
    reports = run_evaluation(config)
    for report in reports:
        if report.failed:
            print(f"normeval: {report.normalizer} failed: {report.error}", file=sys.stderr)
    if args.out_json:
        emit_json(reports, args.out_json, config)
    else:
        from .report import _report_to_dict

        payload = {"schema": "1", "config": config.to_dict(),
                   "reports": [_report_to_dict(r) for r in reports]}
        print(json.dumps(payload, separators=(",", ":"), ensure_ascii=True))
    if args.out_md:
        emit_markdown(reports, args.out_md, config)
    if all(r.failed for r in reports):
        return 2
    return 0


def _intrinsic_reports(args):
    docs = _load_tokenized(args)
    vocab_before = build_vocabulary(docs)
    weighting = _WEIGHTINGS[args.anld_weighting]
    entries = []
    failures = 0
    for spec in args.normalizer:
        normalizer = None
        try:
            normalizer = build_normalizer(spec)
            normalized, mapping = normalize_corpus(normalizer, docs)
            compression = compression_ratio(vocab_before, build_vocabulary(normalized))
            result = anld(mapping, weighting=weighting, worst_n=args.worst_n)
            entries.append((normalizer.name, compression, result, None))
        except NormEvalError as exc:
            failures += 1
            entries.append((spec, None, None, str(exc)))
            print(f"normeval: {spec} failed: {exc}", file=sys.stderr)
        finally:
            if normalizer is not None:
                normalizer.close()
    return entries, failures


def _cmd_metrics(args) -> int:
    entries, failures = _intrinsic_reports(args)
    reports = []
    for name, compression, result, error in entries:
        if error is not None:
            reports.append({"normalizer": name, "error": error})
            continue
        reports.append(
            {
                "normalizer": name,
                "compression": {
                    "vocab_before": compression.vocab_before,
                    "vocab_after": compression.vocab_after,
                    "cr": compression.cr,
                },
                "anld": {
                    "weighting": result.weighting,
                    "anld": result.anld,
                    "pair_count": result.pair_count,
                    "over_unit_pairs": result.over_unit_pairs,
                    "worst_pairs": [
                        {"original": o, "stem": s, "distance": d}
                        for o, s, d in result.worst_pairs
                    ],
                },
            }
        )
    text = json.dumps({"schema": "1", "reports": reports}, separators=(",", ":"), ensure_ascii=True)
    if args.out_json:
        with open(args.out_json, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text)
    return 2 if failures == len(entries) else 0


def _cmd_anld_pairs(args) -> int:
    entries, failures = _intrinsic_reports(args)
    for name, _, result, error in entries:
        if error is not None:
            continue
        for original, stem, distance in result.worst_pairs:
            print(f"{name}\t{original}\t{stem}\t{distance!r}")
    return 2 if failures == len(entries) else 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "metrics":
            return _cmd_metrics(args)
        return _cmd_anld_pairs(args)
    except NormEvalError as exc:
        print(f"normeval: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
