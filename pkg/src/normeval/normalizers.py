"""Token normalizers behind a single token -> stem interface.

Built-in normalizers (identity, snowball English, prefix truncation) are
pure functions. Mapping-file and external-process normalizers adapt
third-party tools: the mapping file is a static lookup table, and the
external adapter speaks a line protocol over the tool's stdin/stdout
(request ``NORM<TAB>token``, reply ``OK<TAB>stem`` or ``ERR<TAB>message``).

``normalize_corpus`` memoizes per token type and records every
(original, stem) pair with occurrence counts in a :class:`TokenMapping`.
"""

from __future__ import annotations

import logging
import queue
import subprocess
import threading
from collections import Counter
from dataclasses import dataclass, field

from .corpus import TokenizedDocument
from .errors import NormalizerError
from .snowball import stem as snowball_stem

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TokenMapping:
    """Observed (original -> stem) pairs plus how often each original occurred."""

    pairs: dict[str, str]
    occurrence_counts: dict[str, int]

    @property
    def empty_stem_count(self) -> int:
        """Distinct originals the normalizer mapped to an empty stem."""
        return sum(1 for stem in self.pairs.values() if not stem)


class Normalizer:
    """Base class: subclasses implement ``normalize_token``."""

    name: str = "normalizer"

    def normalize_token(self, token: str) -> str:
        raise NotImplementedError

    def close(self) -> None:
        """Release external resources, if any."""


class IdentityNormalizer(Normalizer):
    name = "identity"

    def normalize_token(self, token: str) -> str:
        return token


class SnowballEnglishNormalizer(Normalizer):
    """Snowball English (Porter2) stemming of the lowercased token."""

    name = "snowball-en"

    def normalize_token(self, token: str) -> str:
        return snowball_stem(token)


class TruncateNormalizer(Normalizer):
    """Keep only the first n Unicode scalar values of each token.

    Deliberately crude: a built-in stand-in for over-stemming behavior.
    """

    def __init__(self, n: int):
        if n < 1:
            raise NormalizerError(f"truncate length must be >= 1, got {n}")
        self.n = n
        self.name = f"truncate-{n}"

    def normalize_token(self, token: str) -> str:
        return token[: self.n]


def load_mapping(path: str) -> dict[str, str]:
    """Load an 'original<TAB>stem' mapping file.

    Lines starting with '#' are comments. Duplicate originals keep the
    last entry; duplicates are counted and logged as a warning.
    """
    mapping: dict[str, str] = {}
    duplicates = 0
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise NormalizerError(f"cannot open mapping file {path!r}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise NormalizerError(f"line {lineno}: expected 2 fields, got {len(parts)}")
            original, stem = parts
            if original in mapping:
                duplicates += 1
            mapping[original] = stem
    if duplicates:
        log.warning("mapping file %s: %d duplicate original(s), last entry wins", path, duplicates)
    return mapping


class MappingNormalizer(Normalizer):
    """Lookup-table normalizer; unknown tokens map to themselves."""

    def __init__(self, path: str, name: str | None = None):
        self.mapping = load_mapping(path)
        self.name = name or f"map:{path}"

    def normalize_token(self, token: str) -> str:
        return self.mapping.get(token, token)


class ExternalNormalizer(Normalizer):
    """Adapter around an external process speaking the NORM line protocol.

    The session is serial: callers running concurrently must either wrap
    calls in their own lock or open one session per worker.
    """

    def __init__(self, command: list[str], timeout: float = 5.0, name: str | None = None):
        if not command:
            raise NormalizerError("external normalizer command is empty")
        self.command = list(command)
        self.timeout = timeout
        self.name = name or f"ext:{command[0]}"
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise NormalizerError(f"cannot start external normalizer {self.command}: {exc}") from exc
        self._replies: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._replies.put(line.rstrip("\n"))
        self._replies.put(None)  # EOF sentinel

    def normalize_token(self, token: str) -> str:
        if "\n" in token or "\t" in token:
            raise NormalizerError(f"token contains protocol separator characters: {token!r}")
        if self._proc.poll() is not None:
            raise NormalizerError(
                f"external normalizer {self.command} exited with code {self._proc.returncode}"
            )
        try:
            assert self._proc.stdin is not None
            self._proc.stdin.write(f"NORM\t{token}\n")
            self._proc.stdin.flush()
        except (OSError, ValueError) as exc:
            raise NormalizerError(
                f"external normalizer {self.command}: cannot send token {token!r}: {exc}"
            ) from exc
        try:
            reply = self._replies.get(timeout=self.timeout)
        except queue.Empty:
            raise NormalizerError(
                f"external normalizer {self.command}: timeout after {self.timeout}s on token {token!r}"
            ) from None
        if reply is None:
            raise NormalizerError(
                f"external normalizer {self.command}: process closed its output on token {token!r}"
            )
        kind, _, payload = reply.partition("\t")
        if kind == "OK":
            return payload
        if kind == "ERR":
            raise NormalizerError(
                f"external normalizer {self.command}: tool error on token {token!r}: {payload}"
            )
        raise NormalizerError(
            f"external normalizer {self.command}: malformed reply {reply!r} on token {token!r}"
        )

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                if self._proc.stdin is not None:
                    self._proc.stdin.close()
                self._proc.wait(timeout=2.0)
            except (OSError, subprocess.TimeoutExpired):
                self._proc.kill()
                self._proc.wait()

    def __enter__(self) -> "ExternalNormalizer":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def normalize_corpus(
    normalizer: Normalizer, docs: list[TokenizedDocument]
) -> tuple[list[TokenizedDocument], TokenMapping]:
    """Normalize every token, memoizing per distinct token.

    Token order and document boundaries are preserved. Empty stems are
    kept in the mapping (they count as defects and as full-length edits
    in distance metrics) but dropped from the normalized token streams,
    which must not contain empty tokens.
    """
    cache: dict[str, str] = {}
    occurrence: Counter[str] = Counter()
    normalized: list[TokenizedDocument] = []
    for doc in docs:
        out: list[str] = []
        for token in doc.tokens:
            if token in cache:
                stem = cache[token]
            else:
                stem = normalizer.normalize_token(token)
                cache[token] = stem
            occurrence[token] += 1
            if stem:
                out.append(stem)
        normalized.append(TokenizedDocument(doc_id=doc.doc_id, tokens=tuple(out)))
    return normalized, TokenMapping(pairs=cache, occurrence_counts=dict(occurrence))
