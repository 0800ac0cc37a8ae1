"""Embedding backends: mean pooling, deterministic hashing, ONNX inference.

Two backends share one API: a hashing fallback whose vectors are a pure
function of (text, dim, seed), so the full pipeline runs with no model
files, and a transformer backend that executes an exported ONNX model
with its tokenizer assets.  Both pool token-level vectors with an
attention-mask-weighted mean and (by default) L2-normalize the result.
"""
from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import dataclass

import numpy as np

from .encode import EncodedMatrix
from .errors import BackendLoadError, EmptyMaskError, TokenizationError

HASH_BACKEND_DIM = 384  # mirrors the smallest published checkpoint

METADATA_FILENAME = "metadata.json"
MODEL_FILENAME = "model.onnx"
TOKENIZER_FILENAME = "tokenizer.json"


def mean_pool(token_embeddings: np.ndarray, attention_mask: np.ndarray) -> np.ndarray:
    """Mask-weighted average of token vectors: sum(mask_i * e_i) / sum(mask_i)."""
    emb = np.asarray(token_embeddings, dtype=np.float64)
    mask = np.asarray(attention_mask, dtype=np.float64)
    if emb.ndim != 2 or mask.ndim != 1 or emb.shape[0] != mask.shape[0]:
        raise ValueError("expected (T, d) embeddings and a length-T mask")
    total = mask.sum()
    if total < 1:
        raise EmptyMaskError("attention mask has no active positions")
    return (emb * mask[:, None]).sum(axis=0) / total


def _gram_hash(gram: bytes, seed_key: bytes) -> int:
    digest = hashlib.blake2b(gram, digest_size=8, key=seed_key).digest()
    return struct.unpack("<Q", digest)[0]


def hash_embed(text: str, dim: int = HASH_BACKEND_DIM, seed: int = 0) -> np.ndarray:
    """Signed character-trigram feature hashing, L2-normalized.

    Deterministic across processes and platforms: bucketing uses a keyed
    blake2b digest rather than Python's salted hash().
    """
    if dim < 8:
        raise ValueError("dim must be >= 8")
    data = text.encode("utf-8")
    if len(data) < 3:
        grams = [data]
    else:
        grams = [data[i:i + 3] for i in range(len(data) - 2)]
    seed_key = struct.pack("<q", seed)
    vec = np.zeros(dim)
    for g in grams:
        h = _gram_hash(g, seed_key)
        bucket = (h >> 1) % dim
        sign = 1.0 if h & 1 else -1.0
        vec[bucket] += sign
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


class HashingBackend:
    """Model-free fallback backend built on hash_embed."""

    def __init__(self, dim: int = HASH_BACKEND_DIM, seed: int = 0, normalizes: bool = True):
        self.dim = dim
        self.seed = seed
        self.normalizes = normalizes
        self.backend_id = f"hash3-d{dim}-s{seed}"

    def embed_texts(self, texts: list[str]) -> np.ndarray:
        return np.array([hash_embed(t, self.dim, self.seed) for t in texts])


class TransformerBackend:
    """ONNX-exported sentence-transformer with mean pooling.

    Loads three sibling assets from a model directory: model.onnx (inputs
    `input_ids` and `attention_mask`, output = last-layer token
    embeddings), tokenizer.json, and metadata.json
    ({dim, max_len, normalizes, model_id}).
    """

    def __init__(self, model_dir: str):
        meta_path = os.path.join(model_dir, METADATA_FILENAME)
        model_path = os.path.join(model_dir, MODEL_FILENAME)
        tok_path = os.path.join(model_dir, TOKENIZER_FILENAME)
        for p in (meta_path, model_path, tok_path):
            if not os.path.exists(p):
                raise BackendLoadError(f"missing backend asset: {p}")
        try:
            with open(meta_path, encoding="utf-8") as fh:
                meta = json.load(fh)
            self.dim = int(meta["dim"])
            self.max_len = int(meta["max_len"])
            self.normalizes = bool(meta["normalizes"])
            self.model_id = str(meta["model_id"])
        except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
            raise BackendLoadError(f"bad metadata {meta_path}: {exc}") from exc
        self.backend_id = f"st-{self.model_id}"

        try:
            import onnxruntime  # noqa: F401  (optional dependency)
        except ImportError as exc:
            raise BackendLoadError(
                "transformer backend requires onnxruntime (pip install ledgerlab[transformer])"
            ) from exc
        try:
            from tokenizers import Tokenizer
        except ImportError as exc:
            raise BackendLoadError(
                "transformer backend requires the tokenizers package"
            ) from exc
        try:
            self._tokenizer = Tokenizer.from_file(tok_path)
            self._tokenizer.enable_truncation(max_length=self.max_len)
            self._session = onnxruntime.InferenceSession(
                model_path, providers=["CPUExecutionProvider"]
            )
        except Exception as exc:
            raise BackendLoadError(f"failed to load backend from {model_dir}: {exc}") from exc

    def embed_texts(self, texts: list[str]) -> np.ndarray:
        try:
            encodings = self._tokenizer.encode_batch(texts)
        except Exception as exc:
            raise TokenizationError(str(exc)) from exc
        out = np.empty((len(texts), self.dim))
        # One text per run keeps results independent of batch partitioning.
        for i, enc in enumerate(encodings):
            ids = np.asarray([enc.ids], dtype=np.int64)
            mask = np.asarray([enc.attention_mask], dtype=np.int64)
            (tokens,) = self._session.run(
                None, {"input_ids": ids, "attention_mask": mask}
            )
            out[i] = mean_pool(tokens[0], mask[0])
        return out


def embed_batch(
    texts: list[str],
    backend,
    row_ids: tuple[str, ...] | None = None,
) -> EncodedMatrix:
    """Embed texts in input order; rows are L2-normalized if the backend says so."""
    if not texts:
        raise ValueError("texts must be non-empty")
    if row_ids is not None and len(row_ids) != len(texts):
        raise ValueError("row_ids length must match texts")
    values = backend.embed_texts(list(texts))
    if backend.normalizes:
        norms = np.linalg.norm(values, axis=1, keepdims=True)
        values = values / np.where(norms > 0, norms, 1.0)
    ids = row_ids if row_ids is not None else tuple(str(i) for i in range(len(texts)))
    return EncodedMatrix(values, tuple(ids), backend.backend_id)
