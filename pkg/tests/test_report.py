"""Report assembly, JSON/Markdown emitters, and the command line."""

import json

import pytest

from normeval import (
    AnldResult,
    CorpusError,
    EvaluationError,
    HashedNgramProvider,
    HttpServiceProvider,
    IdentityNormalizer,
    IrsResult,
    MappingNormalizer,
    NormalizerError,
    NormalizerReport,
    RunConfig,
    SnowballEnglishNormalizer,
    TruncateNormalizer,
    VectorFileProvider,
    build_normalizer,
    build_embedder,
    compression_ratio,
    emit_json,
    emit_markdown,
    run_evaluation,
    safety_gate,
)
from normeval.cli import main


class TestRunConfig:
    def test_round_trip(self):
        config = RunConfig(
            corpus_path="x.tsv",
            normalizers=("identity", "truncate:3"),
            classifiers=("nb", "svm"),
            k=3,
            seed=9,
        )
        assert RunConfig.from_dict(config.to_dict()) == config

    def test_requires_a_normalizer(self):
        with pytest.raises(EvaluationError, match="at least one normalizer"):
            RunConfig(corpus_path="x.tsv", normalizers=())

    def test_rejects_unknown_weighting(self):
        with pytest.raises(EvaluationError, match="weighting"):
            RunConfig(corpus_path="x.tsv", normalizers=("identity",), anld_weighting="magic")

    def test_rejects_unknown_classifier(self):
        with pytest.raises(EvaluationError, match="classifier"):
            RunConfig(corpus_path="x.tsv", normalizers=("identity",), classifiers=("boost",))


class TestBuildNormalizer:
    def test_identity(self):
        assert isinstance(build_normalizer("identity"), IdentityNormalizer)

    def test_snowball(self):
        norm = build_normalizer("snowball-en")
        assert isinstance(norm, SnowballEnglishNormalizer)
        assert norm.normalize_token("running") == "run"

    def test_truncate(self):
        norm = build_normalizer("truncate:3")
        assert isinstance(norm, TruncateNormalizer)
        assert norm.normalize_token("normalization") == "nor"

    def test_truncate_bad_length(self):
        with pytest.raises(NormalizerError, match="integer"):
            build_normalizer("truncate:three")

    def test_mapping_file(self, tmp_path):
        path = tmp_path / "map.tsv"
        path.write_text("running\trun\n", encoding="utf-8")
        norm = build_normalizer(f"map:{path}")
        assert isinstance(norm, MappingNormalizer)
        assert norm.normalize_token("running") == "run"
        assert norm.normalize_token("other") == "other"

    def test_external_command_split_shell_style(self):
        norm = build_normalizer("ext:cat '-A'")
        try:
            assert norm.command == ["cat", "-A"]
        finally:
            norm.close()

    def test_external_empty_command(self):
        with pytest.raises(NormalizerError, match="command"):
            build_normalizer("ext:")

    def test_unknown_spec(self):
        with pytest.raises(NormalizerError, match="unknown normalizer spec"):
            build_normalizer("porter9000")


class TestBuildEmbedder:
    def test_hash_defaults(self):
        provider = build_embedder("hash")
        assert isinstance(provider, HashedNgramProvider)
        assert provider.dim == 256 and provider.seed == 0

    def test_hash_with_dim_and_seed(self):
        provider = build_embedder("hash:64:7")
        assert provider.dim == 64 and provider.seed == 7

    @pytest.mark.parametrize("spec", ["hash:abc", "hash:64:7:9"])
    def test_hash_bad_spec(self, spec):
        with pytest.raises(EvaluationError, match="bad hash embedder spec"):
            build_embedder(spec)

    def test_vecfile(self, tmp_path):
        path = tmp_path / "v.txt"
        path.write_text("1 8\na 1 0 0 0 0 0 0 0\n", encoding="utf-8")
        assert isinstance(build_embedder(f"vecfile:{path}"), VectorFileProvider)

    def test_http(self):
        provider = build_embedder("http://127.0.0.1:1/embed")
        assert isinstance(provider, HttpServiceProvider)

    def test_unknown(self):
        with pytest.raises(EvaluationError, match="unknown embedder spec"):
            build_embedder("bert-large")


CORPUS_ROWS = []
for i in range(12):
    CORPUS_ROWS.append(f"the red crimson scarlet flame glows number{i % 4}\twarm")
    CORPUS_ROWS.append(f"the blue azure cobalt ocean waves number{i % 4}\tcool")


@pytest.fixture(scope="module")
def corpus_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "toy.tsv"
    path.write_text("text\tlabel\n" + "\n".join(CORPUS_ROWS) + "\n", encoding="utf-8")
    return str(path)


def toy_config(corpus_path, **overrides):
    defaults = dict(
        corpus_path=corpus_path,
        normalizers=("identity",),
        embedder="hash:64:0",
        classifiers=("nb",),
        k=3,
        seed=0,
    )
    defaults.update(overrides)
    return RunConfig(**defaults)


@pytest.fixture(scope="module")
def mixed_reports(corpus_path):
    config = toy_config(
        corpus_path, normalizers=("identity", "truncate:2", "map:/nonexistent/f.tsv")
    )
    return config, run_evaluation(config)


class TestRunEvaluation:
    def test_failure_is_isolated_to_its_normalizer(self, mixed_reports):
        _, reports = mixed_reports
        assert [r.failed for r in reports] == [False, False, True]
        assert "map:/nonexistent/f.tsv" == reports[2].normalizer
        assert reports[2].error

    def test_identity_scores(self, mixed_reports):
        _, reports = mixed_reports
        ident = reports[0]
        assert ident.normalizer == "identity"
        assert ident.compression.cr == 1.0
        assert ident.irs_result.irs == 1.0
        assert ident.ses_result.ses == 1.0
        assert ident.ses_result.safe
        assert ident.anld_primary.anld == 0.0
        assert ident.consistency_ok
        for delta in ident.deltas:
            assert delta.mpd_accuracy.mpd == 0.0
            assert delta.mpd_accuracy.p_value == 1.0
            assert not delta.mpd_accuracy.significant
            assert delta.mcnemar_p == 1.0

    def test_truncation_distorts(self, mixed_reports):
        _, reports = mixed_reports
        trunc = reports[1]
        assert trunc.compression.cr > 1.0
        assert trunc.anld_primary.anld > 0.2
        assert not trunc.ses_result.safe

    def test_baseline_runs_shared_across_normalizers(self, mixed_reports):
        _, reports = mixed_reports
        assert reports[0].deltas[0].original is reports[1].deltas[0].original

    def test_alternate_weighting_also_reported(self, mixed_reports):
        _, reports = mixed_reports
        assert reports[0].anld_primary.weighting == "by_occurrence"
        assert reports[0].anld_alternate.weighting == "by_type"

    def test_fold_count_respected(self, corpus_path):
        reports = run_evaluation(toy_config(corpus_path, k=4))
        assert len(reports[0].deltas[0].normalized.fold_scores) == 4

    def test_no_classifiers_skips_downstream(self, corpus_path):
        reports = run_evaluation(toy_config(corpus_path, classifiers=()))
        assert reports[0].deltas == ()
        assert reports[0].compression.cr == 1.0

    def test_missing_corpus_aborts_run(self, corpus_path):
        with pytest.raises(CorpusError, match="cannot open"):
            run_evaluation(toy_config("/nonexistent/corpus.tsv"))


class TestEmitJson:
    def test_empty_report_list_bytes(self, tmp_path):
        path = tmp_path / "out.json"
        emit_json([], str(path))
        assert path.read_bytes() == b'{"schema":"1","reports":[]}'

    def test_identity_values_and_verdict(self, mixed_reports, tmp_path):
        config, reports = mixed_reports
        path = tmp_path / "out.json"
        emit_json(reports, str(path), config)
        text = path.read_text(encoding="utf-8")
        assert '"ses":1.0' in text
        assert '"verdict":"safe"' in text
        assert '"verdict":"unsafe"' in text
        payload = json.loads(text)
        assert payload["schema"] == "1"
        assert payload["config"]["seed"] == 0
        assert payload["config"]["normalizers"][1] == "truncate:2"
        ident = payload["reports"][0]
        assert ident["compression"] == {"vocab_before": ident["compression"]["vocab_before"],
                                        "vocab_after": ident["compression"]["vocab_before"],
                                        "cr": 1.0}
        assert ident["irs"]["irs"] == 1.0
        assert ident["anld"]["anld"] == 0.0
        assert ident["downstream"][0]["mcnemar_p"] == 1.0
        assert ident["warnings"]["ses_consistency_flag"] is False

    def test_failed_entry_shape(self, mixed_reports, tmp_path):
        config, reports = mixed_reports
        path = tmp_path / "out.json"
        emit_json(reports, str(path), config)
        failed = json.loads(path.read_text())["reports"][2]
        assert set(failed) == {"normalizer", "error"}

    def test_byte_identical_across_runs(self, corpus_path, tmp_path):
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        config1 = toy_config(corpus_path, normalizers=("identity", "truncate:2"))
        config2 = toy_config(corpus_path, normalizers=("identity", "truncate:2"))
        emit_json(run_evaluation(config1), str(p1), config1)
        emit_json(run_evaluation(config2), str(p2), config2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(EvaluationError, match="cannot write"):
            emit_json([], str(tmp_path / "no" / "dir" / "out.json"))


class TestEmitMarkdown:
    def test_summary_rows_and_notes(self, mixed_reports, tmp_path):
        config, reports = mixed_reports
        path = tmp_path / "out.md"
        emit_markdown(reports, str(path), config)
        text = path.read_text(encoding="utf-8")
        assert "| identity | 1.00 | 1.00 | 1.00 (safe) | 0.00 |" in text
        assert "(UNSAFE)" in text
        assert "## Worst over-stemming pairs" in text
        assert "## Failed normalizers" in text
        assert "map:/nonexistent/f.tsv" in text
        assert "seed: 0" in text

    def test_consistency_footnote(self, tmp_path):
        gated = safety_gate(irs=0.91, cr=1.61, anld=0.05)
        quiet = AnldResult(
            anld=0.05, pair_count=1, over_unit_pairs=0, worst_pairs=(), weighting="by_occurrence"
        )
        report = NormalizerReport(
            normalizer="external-table",
            compression=compression_ratio(161, 100),
            irs_result=IrsResult(irs=0.91, per_doc=(), zero_vector_docs=0),
            ses_result=gated,
            anld_primary=quiet,
            anld_alternate=AnldResult(
                anld=0.05, pair_count=1, over_unit_pairs=0, worst_pairs=(), weighting="by_type"
            ),
            deltas=(),
            consistency_ok=False,
        )
        path = tmp_path / "out.md"
        emit_markdown([report], str(path))
        assert "SES-consistency flag" in path.read_text(encoding="utf-8")

    def test_empty_stem_rendered_as_placeholder(self, corpus_path, tmp_path):
        mapping = tmp_path / "drop.tsv"
        mapping.write_text("red\t\nblue\t\n", encoding="utf-8")
        config = toy_config(corpus_path, normalizers=(f"map:{mapping}",), classifiers=())
        reports = run_evaluation(config)
        assert reports[0].empty_stems == 2
        path = tmp_path / "out.md"
        emit_markdown(reports, str(path), config)
        text = path.read_text(encoding="utf-8")
        assert "(empty)" in text
        assert "normalized to empty stems" in text


class TestCli:
    def test_evaluate_stdout_json(self, corpus_path, capsys):
        code = main(
            [
                "evaluate",
                "--corpus", corpus_path,
                "--normalizer", "identity",
                "--classifiers", "nb",
                "--k", "3",
                "--seed", "0",
                "--embedder", "hash:64:0",
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["schema"] == "1"
        assert payload["reports"][0]["verdict"] == "safe"

    def test_evaluate_writes_files(self, corpus_path, tmp_path, capsys):
        out_json = tmp_path / "r.json"
        out_md = tmp_path / "r.md"
        code = main(
            [
                "evaluate",
                "--corpus", corpus_path,
                "--normalizer", "identity",
                "--normalizer", "truncate:2",
                "--classifiers", "nb",
                "--k", "3",
                "--seed", "0",
                "--embedder", "hash:64:0",
                "--out-json", str(out_json),
                "--out-md", str(out_md),
            ]
        )
        assert code == 0
        assert capsys.readouterr().out == ""
        assert json.loads(out_json.read_text())["reports"][1]["verdict"] == "unsafe"
        assert out_md.read_text().startswith("# Normalizer evaluation")

    def test_missing_corpus_exits_1(self, capsys):
        code = main(
            ["evaluate", "--corpus", "/nonexistent.tsv", "--normalizer", "identity"]
        )
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_classifier_exits_1(self, corpus_path, capsys):
        code = main(
            [
                "evaluate",
                "--corpus", corpus_path,
                "--normalizer", "identity",
                "--classifiers", "xgboost",
            ]
        )
        assert code == 1
        assert "unknown classifier" in capsys.readouterr().err

    def test_usage_error_exits_1(self, corpus_path):
        with pytest.raises(SystemExit) as exc_info:
            main(["evaluate", "--corpus", corpus_path])
        assert exc_info.value.code == 1

    def test_all_normalizers_failed_exits_2(self, corpus_path, capsys):
        code = main(
            [
                "evaluate",
                "--corpus", corpus_path,
                "--normalizer", "map:/nonexistent/a.tsv",
                "--normalizer", "map:/nonexistent/b.tsv",
                "--classifiers", "nb",
                "--k", "3",
                "--embedder", "hash:64:0",
            ]
        )
        assert code == 2
        err = capsys.readouterr().err
        assert "failed" in err

    def test_one_surviving_normalizer_exits_0(self, corpus_path, capsys):
        code = main(
            [
                "evaluate",
                "--corpus", corpus_path,
                "--normalizer", "map:/nonexistent/a.tsv",
                "--normalizer", "identity",
                "--classifiers", "nb",
                "--k", "3",
                "--embedder", "hash:64:0",
            ]
        )
        assert code == 0
        capsys.readouterr()

    def test_bad_embedder_spec_exits_1(self, corpus_path, capsys):
        code = main(
            [
                "evaluate",
                "--corpus", corpus_path,
                "--normalizer", "identity",
                "--embedder", "bert",
                "--classifiers", "nb",
            ]
        )
        assert code == 1
        assert "unknown embedder" in capsys.readouterr().err

    def test_metrics_subcommand(self, corpus_path, capsys):
        code = main(
            [
                "metrics",
                "--corpus", corpus_path,
                "--normalizer", "truncate:3",
                "--anld-weighting", "type",
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        report = payload["reports"][0]
        assert report["compression"]["cr"] > 1.0
        assert report["anld"]["weighting"] == "by_type"
        assert "downstream" not in report

    def test_anld_pairs_subcommand(self, corpus_path, capsys):
        code = main(
            ["anld-pairs", "--corpus", corpus_path, "--normalizer", "truncate:3", "--worst-n", "5"]
        )
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert 0 < len(lines) <= 5
        for line in lines:
            name, original, stem, distance = line.split("\t")
            # successful entries report under the display name
            assert name == "truncate-3"
            assert original.startswith(stem)
            assert float(distance) >= 0.0
