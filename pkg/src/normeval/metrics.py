"""Intrinsic normalization metrics: vocabulary compression and
average normalized Levenshtein distance over (original, stem) pairs.

All functions here are pure and safe for concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from .corpus import Vocabulary
from .errors import MetricError
from .normalizers import TokenMapping


@dataclass(frozen=True)
class CompressionResult:
    vocab_before: int
    vocab_after: int
    cr: float


@dataclass(frozen=True)
class AnldResult:
    anld: float
    pair_count: int
    over_unit_pairs: int
    worst_pairs: tuple[tuple[str, str, float], ...]
    weighting: str


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character insertions, deletions, and
    substitutions transforming a into b. Operates on Unicode scalar
    values (Python string items), not bytes."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
            )
        previous = current
    return previous[-1]


def compression_ratio(before: Vocabulary | int, after: Vocabulary | int) -> CompressionResult:
    """Unique-token count before normalization divided by after.

    cr > 1 means the vocabulary shrank; cr = 1 means the normalization
    changed nothing; cr < 1 means it expanded the vocabulary.
    """
    nb = before.size if isinstance(before, Vocabulary) else int(before)
    na = after.size if isinstance(after, Vocabulary) else int(after)
    if nb > 0 and na == 0:
        raise MetricError(
            "degenerate normalizer: non-empty vocabulary collapsed to zero distinct tokens"
        )
    cr = nb / na if na > 0 else 1.0
    return CompressionResult(vocab_before=nb, vocab_after=na, cr=cr)


def anld(
    mapping: TokenMapping,
    weighting: Literal["by_occurrence", "by_type"] = "by_occurrence",
    worst_n: int = 20,
) -> AnldResult:
    """Average of levenshtein(original, stem) / len(original) over pairs.

    ``by_occurrence`` weights each pair by how often the original token
    occurred; ``by_type`` weights every pair equally. Distances are
    never clamped: a stem longer than its original can push a pair's
    normalized distance above 1, and such pairs are counted in
    ``over_unit_pairs`` so the anomaly stays visible.
    """
    if weighting not in ("by_occurrence", "by_type"):
        raise ValueError(f"unknown weighting {weighting!r}")
    if not mapping.pairs:
        raise MetricError("cannot compute distance average over an empty token mapping")
    total = 0.0
    weight_sum = 0.0
    over_unit = 0
    scored: list[tuple[str, str, float]] = []
    for original, stem in mapping.pairs.items():
        if not original:
            raise MetricError("token mapping contains an empty original token")
        d = levenshtein(original, stem) / len(original)
        w = mapping.occurrence_counts.get(original, 0) if weighting == "by_occurrence" else 1.0
        total += d * w
        weight_sum += w
        if d > 1.0:
            over_unit += 1
        scored.append((original, stem, d))
    if weight_sum == 0:
        raise MetricError("token mapping has zero total occurrence weight")
    scored.sort(key=lambda item: (-item[2], item[0]))
    return AnldResult(
        anld=total / weight_sum,
        pair_count=len(mapping.pairs),
        over_unit_pairs=over_unit,
        worst_pairs=tuple(scored[:worst_n]),
        weighting=weighting,
    )
