"""Bundled data files."""

from importlib import resources


def mini_corpus_path() -> str:
    """Filesystem path of the bundled 210-sentence English mini corpus
    (tab-separated, header 'text<TAB>label', three topic labels)."""
    return str(resources.files(__package__) / "mini_corpus.tsv")
