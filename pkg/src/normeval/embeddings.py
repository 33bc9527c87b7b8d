"""Document embedding providers and the information retention score.

Three provider kinds produce mean-pooled document vectors:

* hashed character n-grams: deterministic, language-agnostic, no model
  or download required; the built-in default.
* vector file: word2vec text format lookup table, mean over found tokens.
* HTTP service: delegates embedding (and pooling) of whole documents to
  an external model server via a small JSON protocol.

The information retention score of a normalizer is the mean cosine
similarity between each document's embedding and the embedding of its
normalized form.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .corpus import TokenizedDocument
from .errors import EmbeddingError


@dataclass(frozen=True)
class DocumentEmbedding:
    vector: np.ndarray
    token_count: int


@dataclass(frozen=True)
class IrsResult:
    irs: float
    per_doc: tuple[tuple[str, float], ...]
    zero_vector_docs: int


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; 0 if either vector has zero norm.

    Bitwise-identical non-zero vectors score exactly 1.0 (a vector is at
    angle zero to itself; the shortcut avoids rounding the diagonal).
    """
    value, _ = cosine_with_flag(u, v)
    return value


def cosine_with_flag(u: np.ndarray, v: np.ndarray) -> tuple[float, bool]:
    """Like :func:`cosine`, also reporting whether the zero-vector
    convention fired."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise EmbeddingError(f"cosine dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0, True
    if np.array_equal(u, v):
        return 1.0, False
    value = float(np.dot(u, v) / (nu * nv))
    return max(-1.0, min(1.0, value)), False


class EmbeddingProvider:
    """Base class: subclasses embed token lists into fixed-size vectors."""

    name: str = "provider"

    def embed_documents(self, token_lists: list[list[str]]) -> list[DocumentEmbedding]:
        raise NotImplementedError

    def embed_document(self, tokens: list[str]) -> DocumentEmbedding:
        return self.embed_documents([list(tokens)])[0]


class HashedNgramProvider(EmbeddingProvider):
    """Character n-gram hashing embeddings.

    Tokens are wrapped in boundary markers ('<' token '>'); every n-gram
    for n in [lo, hi] contributes +/-1 on a hashed coordinate, and the
    whole wrapped token always contributes one gram so no non-empty
    token embeds to zero. Token vectors are summed over grams, document
    vectors are the mean of token vectors. Hashing is keyed blake2b, so
    vectors are identical across runs and platforms for a fixed
    (dim, n_range, seed).
    """

    def __init__(self, dim: int = 256, n_range: tuple[int, int] = (3, 5), seed: int = 0):
        if dim < 8:
            raise EmbeddingError(f"hashed n-gram dimension must be >= 8, got {dim}")
        lo, hi = n_range
        if lo < 1 or lo > hi:
            raise EmbeddingError(f"invalid n-gram range {n_range}")
        self.dim = dim
        self.n_range = (lo, hi)
        self.seed = seed
        self.name = f"hash-{dim}"
        self._key = seed.to_bytes(8, "little", signed=True)
        self._token_cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        cached = self._token_cache.get(token)
        if cached is not None:
            return cached
        lo, hi = self.n_range
        wrapped = f"<{token}>"
        grams = {wrapped}
        for n in range(lo, hi + 1):
            for i in range(len(wrapped) - n + 1):
                grams.add(wrapped[i : i + n])
        vec = np.zeros(self.dim, dtype=np.float64)
        for gram in sorted(grams):
            digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=9, key=self._key).digest()
            idx = int.from_bytes(digest[:8], "little") % self.dim
            sign = 1.0 if digest[8] & 1 else -1.0
            vec[idx] += sign
        self._token_cache[token] = vec
        return vec

    def embed_documents(self, token_lists: list[list[str]]) -> list[DocumentEmbedding]:
        out = []
        for tokens in token_lists:
            if not tokens:
                out.append(DocumentEmbedding(np.zeros(self.dim), 0))
                continue
            acc = np.zeros(self.dim, dtype=np.float64)
            for token in tokens:
                acc += self._token_vector(token)
            out.append(DocumentEmbedding(acc / len(tokens), len(tokens)))
        return out


def load_word2vec_text(path: str) -> tuple[dict[str, np.ndarray], int]:
    """Load a word2vec text-format vector file: a '<count> <dim>' header
    line, then one '<token> <dim floats>' line per token."""
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise EmbeddingError(f"cannot open vector file {path!r}: {exc}") from exc
    vectors: dict[str, np.ndarray] = {}
    with fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise EmbeddingError(f"{path}: malformed header line, expected '<count> <dim>'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise EmbeddingError(f"{path}: malformed header line {header!r}") from None
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise EmbeddingError(
                    f"{path}: line {lineno}: expected token plus {dim} values, got {len(parts) - 1}"
                )
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError:
                raise EmbeddingError(f"{path}: line {lineno}: non-numeric vector component") from None
            if not np.all(np.isfinite(vec)):
                raise EmbeddingError(f"{path}: line {lineno}: non-finite vector component")
            vectors[parts[0]] = vec
    if len(vectors) != count:
        raise EmbeddingError(
            f"{path}: header declares {count} vectors but file holds {len(vectors)}"
        )
    return vectors, dim


class VectorFileProvider(EmbeddingProvider):
    """Static lookup-table embeddings; a document embeds to the mean of
    the vectors of its found tokens. Missing tokens are skipped and
    counted; a document with no found tokens embeds to the zero vector."""

    def __init__(self, path: str, name: str | None = None):
        self.vectors, self.dim = load_word2vec_text(path)
        self.name = name or f"vecfile:{path}"
        self.missing_tokens = 0

    def embed_documents(self, token_lists: list[list[str]]) -> list[DocumentEmbedding]:
        out = []
        for tokens in token_lists:
            found = [self.vectors[t] for t in tokens if t in self.vectors]
            self.missing_tokens += len(tokens) - len(found)
            if not found:
                out.append(DocumentEmbedding(np.zeros(self.dim), 0))
            else:
                out.append(DocumentEmbedding(np.mean(found, axis=0), len(found)))
        return out


class HttpServiceProvider(EmbeddingProvider):
    """Remote embedding service client.

    Protocol: POST <url> with JSON {"texts": [...]}; the service replies
    200 with JSON {"vectors": [[...], ...]}, one vector per input text.
    Tokens are joined with single spaces before sending; pooling is the
    service's responsibility. Batches may be issued concurrently up to
    ``max_in_flight``; results are reassembled in request order.
    """

    def __init__(
        self,
        url: str,
        batch_size: int = 32,
        timeout: float = 30.0,
        max_in_flight: int = 4,
        name: str | None = None,
    ):
        if batch_size < 1:
            raise EmbeddingError(f"batch size must be >= 1, got {batch_size}")
        self.url = url
        self.batch_size = batch_size
        self.timeout = timeout
        self.max_in_flight = max(1, max_in_flight)
        self.name = name or f"http:{url}"

    def _post_batch(self, texts: list[str]) -> list[np.ndarray]:
        import requests

        try:
            resp = requests.post(self.url, json={"texts": texts}, timeout=self.timeout)
        except requests.RequestException as exc:
            raise EmbeddingError(f"embedding service {self.url}: transport error: {exc}") from exc
        if resp.status_code != 200:
            raise EmbeddingError(
                f"embedding service {self.url}: status {resp.status_code}: {resp.text[:200]}"
            )
        try:
            payload = resp.json()
            vectors = payload["vectors"]
        except (ValueError, KeyError, TypeError) as exc:
            raise EmbeddingError(f"embedding service {self.url}: malformed reply: {exc}") from exc
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise EmbeddingError(
                f"embedding service {self.url}: expected {len(texts)} vectors, "
                f"got {len(vectors) if isinstance(vectors, list) else type(vectors).__name__}"
            )
        arrays = []
        for vec in vectors:
            arr = np.asarray(vec, dtype=np.float64)
            if arr.ndim != 1 or not np.all(np.isfinite(arr)):
                raise EmbeddingError(f"embedding service {self.url}: bad vector in reply")
            arrays.append(arr)
        return arrays

    def embed_documents(self, token_lists: list[list[str]]) -> list[DocumentEmbedding]:
        texts = [" ".join(tokens) for tokens in token_lists]
        nonempty = [i for i, t in enumerate(texts) if t]
        batches = [
            nonempty[i : i + self.batch_size] for i in range(0, len(nonempty), self.batch_size)
        ]
        results: dict[int, np.ndarray] = {}
        if batches:
            with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
                for idx_batch, vecs in zip(
                    batches, pool.map(lambda b: self._post_batch([texts[i] for i in b]), batches)
                ):
                    dims = {len(v) for v in vecs}
                    if len(dims) != 1:
                        raise EmbeddingError(
                            f"embedding service {self.url}: inconsistent vector dimensions {sorted(dims)}"
                        )
                    for i, vec in zip(idx_batch, vecs):
                        results[i] = vec
        dim = len(next(iter(results.values()))) if results else 1
        out = []
        for i, tokens in enumerate(token_lists):
            if i in results:
                out.append(DocumentEmbedding(results[i], len(tokens)))
            else:
                out.append(DocumentEmbedding(np.zeros(dim), 0))
        return out


def irs(
    provider: EmbeddingProvider,
    original_docs: list[TokenizedDocument],
    normalized_docs: list[TokenizedDocument],
) -> IrsResult:
    """Mean per-document cosine between original and normalized embeddings.

    Documents where either side embeds to the zero vector score 0 under
    the zero-vector convention and are counted in ``zero_vector_docs``.
    """
    ids_a = [d.doc_id for d in original_docs]
    ids_b = [d.doc_id for d in normalized_docs]
    if ids_a != ids_b:
        raise EmbeddingError("original and normalized corpora have different document sequences")
    if not original_docs:
        raise EmbeddingError("cannot compute retention score over an empty corpus")
    emb_a = provider.embed_documents([list(d.tokens) for d in original_docs])
    emb_b = provider.embed_documents([list(d.tokens) for d in normalized_docs])
    per_doc: list[tuple[str, float]] = []
    zero_docs = 0
    total = 0.0
    for doc_id, ea, eb in zip(ids_a, emb_a, emb_b):
        value, zero_flag = cosine_with_flag(ea.vector, eb.vector)
        if zero_flag:
            zero_docs += 1
        per_doc.append((doc_id, value))
        total += value
    return IrsResult(irs=total / len(per_doc), per_doc=tuple(per_doc), zero_vector_docs=zero_docs)
