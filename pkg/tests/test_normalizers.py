"""Normalizer adapters and corpus normalization."""

import sys

import pytest

from normeval import (
    ExternalNormalizer,
    IdentityNormalizer,
    MappingNormalizer,
    Normalizer,
    NormalizerError,
    SnowballEnglishNormalizer,
    TokenizedDocument,
    TruncateNormalizer,
    load_mapping,
    normalize_corpus,
)

# Line-protocol test double: OK replies truncate to 4 chars, the token
# "boom" draws an ERR reply, the token "hang" draws no reply at all.
STUB = """
import sys
for line in sys.stdin:
    line = line.rstrip("\\n")
    cmd, _, token = line.partition("\\t")
    if cmd != "NORM":
        print("ERR\\tunknown command", flush=True)
    elif token == "boom":
        print("ERR\\tcannot stem this", flush=True)
    elif token == "hang":
        pass
    elif token == "die":
        sys.exit(3)
    else:
        print("OK\\t" + token[:4], flush=True)
"""


def docs(*token_lists):
    return [
        TokenizedDocument(doc_id=str(i), tokens=tuple(tokens))
        for i, tokens in enumerate(token_lists)
    ]


class TestBuiltinNormalizers:
    def test_identity(self):
        assert IdentityNormalizer().normalize_token("running") == "running"

    def test_snowball_wrapper(self):
        n = SnowballEnglishNormalizer()
        assert n.normalize_token("Running") == "run"
        assert n.name == "snowball-en"

    def test_truncate(self):
        n = TruncateNormalizer(3)
        assert n.normalize_token("running") == "run"
        assert n.normalize_token("ab") == "ab"
        assert n.name == "truncate-3"

    def test_truncate_rejects_nonpositive(self):
        with pytest.raises(NormalizerError):
            TruncateNormalizer(0)


class TestMapping:
    def test_load_and_lookup(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("# comment\nrunning\trun\nflies\tfly\n", encoding="utf-8")
        n = MappingNormalizer(str(path))
        assert n.normalize_token("running") == "run"
        assert n.normalize_token("unknown") == "unknown"

    def test_duplicates_last_wins(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("a\tx\na\ty\n", encoding="utf-8")
        assert load_mapping(str(path)) == {"a": "y"}

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("a\tx\nbroken line\n", encoding="utf-8")
        with pytest.raises(NormalizerError, match="line 2"):
            load_mapping(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(NormalizerError, match="cannot open"):
            MappingNormalizer(str(tmp_path / "nope.tsv"))

    def test_empty_stem_allowed(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("junk\t\n", encoding="utf-8")
        assert load_mapping(str(path)) == {"junk": ""}


class TestNormalizeCorpus:
    def test_order_and_boundaries_preserved(self):
        normalized, mapping = normalize_corpus(
            TruncateNormalizer(2), docs(["alpha", "beta"], ["gamma"])
        )
        assert [d.tokens for d in normalized] == [("al", "be"), ("ga",)]
        assert [d.doc_id for d in normalized] == ["0", "1"]
        assert mapping.pairs == {"alpha": "al", "beta": "be", "gamma": "ga"}

    def test_occurrence_counts(self):
        _, mapping = normalize_corpus(
            IdentityNormalizer(), docs(["a", "b", "a"], ["a"])
        )
        assert mapping.occurrence_counts == {"a": 3, "b": 1}

    def test_memoizes_per_token_type(self):
        calls = []

        class Spy(Normalizer):
            name = "spy"

            def normalize_token(self, token):
                calls.append(token)
                return token

        normalize_corpus(Spy(), docs(["x", "y", "x"], ["y", "x"]))
        assert sorted(calls) == ["x", "y"]

    def test_empty_stems_dropped_from_stream_kept_in_mapping(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("junk\t\n", encoding="utf-8")
        normalized, mapping = normalize_corpus(
            MappingNormalizer(str(path)), docs(["keep", "junk", "also"])
        )
        assert normalized[0].tokens == ("keep", "also")
        assert mapping.pairs["junk"] == ""
        assert mapping.empty_stem_count == 1


class TestExternalNormalizer:
    def command(self):
        return [sys.executable, "-c", STUB]

    def test_round_trip(self):
        with ExternalNormalizer(self.command()) as n:
            assert n.normalize_token("running") == "runn"
            assert n.normalize_token("ab") == "ab"

    def test_err_reply_raises_with_token_and_message(self):
        with ExternalNormalizer(self.command()) as n:
            with pytest.raises(NormalizerError, match="boom.*cannot stem"):
                n.normalize_token("boom")

    def test_timeout(self):
        with ExternalNormalizer(self.command(), timeout=0.5) as n:
            with pytest.raises(NormalizerError, match="timeout"):
                n.normalize_token("hang")

    def test_process_death_detected(self):
        with ExternalNormalizer(self.command()) as n:
            with pytest.raises(NormalizerError, match="closed its output|exited"):
                n.normalize_token("die")
            # subsequent calls keep failing instead of hanging
            with pytest.raises(NormalizerError):
                n.normalize_token("more")

    def test_separator_in_token_rejected(self):
        with ExternalNormalizer(self.command()) as n:
            with pytest.raises(NormalizerError, match="separator"):
                n.normalize_token("a\tb")

    def test_unknown_command_fails_to_start(self):
        with pytest.raises(NormalizerError, match="cannot start"):
            ExternalNormalizer(["/nonexistent/binary-xyz"])

    def test_close_idempotent(self):
        n = ExternalNormalizer(self.command())
        n.close()
        n.close()

    def test_works_through_normalize_corpus(self):
        with ExternalNormalizer(self.command()) as n:
            normalized, mapping = normalize_corpus(n, docs(["stemming", "stems"]))
        assert normalized[0].tokens == ("stem", "stem")
        assert mapping.pairs == {"stemming": "stem", "stems": "stem"}
