"""Positional-stress baseline: a linear classifier over averaged subword
embeddings, one independent sigmoid head per metrical position.

Features are word unigrams plus boundary-marked character n-grams
(<so, sol, ol> for "sol" at n=3). Known grams get dense ids from the
vocabulary built on the training set; unseen grams at prediction time
hash into a fixed bucket range. Training is plain per-example SGD on the
summed binary cross-entropy of the 11 heads, with early stopping on
exact-match accuracy over the evaluation set.
"""

from __future__ import annotations

import base64
import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import clean_text
from .errors import CorruptModelFile, EmptyTrainingSet
from .metrics import PATTERN_LENGTH

_FORMAT = "escansion-baseline"
_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    ngram_min: int = 3
    ngram_max: int = 6
    embedding_dim: int = 100
    epochs: int = 10
    learning_rate: float = 0.05
    seed: int = 13
    patience: int = 5
    bucket_count: int = 10000

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if not 1 <= self.ngram_min <= self.ngram_max:
            raise ValueError("need 1 <= ngram_min <= ngram_max")


@dataclass(frozen=True)
class FeatureVocab:
    ngram_to_id: dict[str, int]
    bucket_count: int
    ngram_min: int
    ngram_max: int

    @property
    def size(self) -> int:
        return len(self.ngram_to_id) + self.bucket_count


def _gram_keys(text: str, nmin: int, nmax: int) -> list[str]:
    keys = []
    for word in clean_text(text).split():
        keys.append(word)
        padded = f"<{word}>"
        for n in range(nmin, nmax + 1):
            keys.extend(padded[i:i + n] for i in range(len(padded) - n + 1))
    return keys


def _bucket(key: str, base: int, buckets: int) -> int:
    return base + zlib.crc32(key.encode("utf-8")) % buckets


def build_vocab(texts, config: TrainConfig) -> FeatureVocab:
    ids: dict[str, int] = {}
    for text in texts:
        for key in _gram_keys(text, config.ngram_min, config.ngram_max):
            if key not in ids:
                ids[key] = len(ids)
    return FeatureVocab(ids, config.bucket_count, config.ngram_min, config.ngram_max)


def featurize(line: str, vocab: FeatureVocab) -> list[int]:
    """Feature ids for a line; repeats preserved, unseen grams hashed."""
    base = len(vocab.ngram_to_id)
    out = []
    for key in _gram_keys(line, vocab.ngram_min, vocab.ngram_max):
        known = vocab.ngram_to_id.get(key)
        out.append(known if known is not None else _bucket(key, base, vocab.bucket_count))
    return out


@dataclass
class PositionalStressModel:
    vocab: FeatureVocab
    embeddings: np.ndarray  # (vocab.size, dim) float64
    head_weights: np.ndarray  # (11, dim)
    head_biases: np.ndarray  # (11,)
    train_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.head_weights.shape[0] != PATTERN_LENGTH:
            raise ValueError(f"model needs {PATTERN_LENGTH} heads")
        for arr in (self.embeddings, self.head_weights, self.head_biases):
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite weights")

    @property
    def embedding_dim(self) -> int:
        return self.embeddings.shape[1]


def _pattern_targets(pattern: str) -> np.ndarray:
    return np.array([1.0 if c == "+" else 0.0 for c in pattern])


def _hidden(embeddings: np.ndarray, ids: list[int]) -> np.ndarray:
    if not ids:
        return np.zeros(embeddings.shape[1])
    return embeddings[ids].mean(axis=0)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500, 500)))


def _bce(scores: np.ndarray, targets: np.ndarray) -> float:
    # Stable sum of BCE terms: log sigma(s) = -log1p(exp(-s)).
    return float(np.sum(np.log1p(np.exp(-np.abs(scores)))
                        + np.maximum(scores, 0) - scores * targets))


def loss_and_grads(embeddings, head_weights, head_biases, examples):
    """Mean summed-BCE loss and its analytic gradients over a batch.

    ``examples`` is a list of (feature ids, 11-dim target vector) pairs.
    Exposed so the gradients can be checked against finite differences.
    """
    grad_e = np.zeros_like(embeddings)
    grad_w = np.zeros_like(head_weights)
    grad_b = np.zeros_like(head_biases)
    loss = 0.0
    for ids, targets in examples:
        h = _hidden(embeddings, ids)
        scores = head_weights @ h + head_biases
        loss += _bce(scores, targets)
        g = _sigmoid(scores) - targets
        grad_w += np.outer(g, h)
        grad_b += g
        if ids:
            np.add.at(grad_e, ids, (head_weights.T @ g) / len(ids))
    n = len(examples)
    return loss / n, grad_e / n, grad_w / n, grad_b / n


def _as_pairs(dataset) -> list[tuple[str, str]]:
    pairs = []
    for item in dataset:
        if hasattr(item, "text"):
            pairs.append((item.text, item.gold))
        else:
            text, pattern = item
            pairs.append((text, pattern))
    return pairs


def train(train_set, eval_set, config: TrainConfig | None = None) -> PositionalStressModel:
    """Fit the 11-head linear model by per-example SGD.

    Deterministic for a fixed seed. Early-stops once eval exact-match has
    not improved for ``patience`` consecutive epochs, and keeps the best
    epoch's weights.
    """
    config = config or TrainConfig()
    train_pairs = _as_pairs(train_set)
    if not train_pairs:
        raise EmptyTrainingSet("no training examples")
    eval_pairs = _as_pairs(eval_set) if eval_set else []

    vocab = build_vocab((text for text, _ in train_pairs), config)
    rng = np.random.default_rng(config.seed)
    dim = config.embedding_dim
    embeddings = rng.uniform(-0.5 / dim, 0.5 / dim, size=(vocab.size, dim))
    head_weights = np.zeros((PATTERN_LENGTH, dim))
    head_biases = np.zeros(PATTERN_LENGTH)

    features = [featurize(text, vocab) for text, _ in train_pairs]
    targets = [_pattern_targets(pattern) for _, pattern in train_pairs]
    eval_feats = [(featurize(text, vocab), pattern) for text, pattern in eval_pairs]

    def eval_accuracy() -> float:
        if not eval_feats:
            return float("nan")
        hits = 0
        for ids, pattern in eval_feats:
            scores = head_weights @ _hidden(embeddings, ids) + head_biases
            predicted = _scores_to_pattern(scores)
            hits += predicted == pattern
        return 100.0 * hits / len(eval_feats)

    lr = config.learning_rate
    best = (-1.0, None)
    stale = 0
    history = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_pairs))
        epoch_loss = 0.0
        for idx in order:
            ids, y = features[idx], targets[idx]
            h = _hidden(embeddings, ids)
            scores = head_weights @ h + head_biases
            epoch_loss += _bce(scores, y)
            g = _sigmoid(scores) - y
            grad_h = head_weights.T @ g
            head_weights -= lr * np.outer(g, h)
            head_biases -= lr * g
            if ids:
                np.add.at(embeddings, ids, -lr * grad_h / len(ids))
        acc = eval_accuracy()
        history.append({"epoch": epoch,
                        "train_loss": epoch_loss / len(train_pairs),
                        "eval_exact_match": None if np.isnan(acc) else acc})
        if eval_feats:
            if acc > best[0]:
                best = (acc, (embeddings.copy(), head_weights.copy(),
                              head_biases.copy()))
                stale = 0
            else:
                stale += 1
                if stale >= config.patience:
                    break

    if best[1] is not None:
        embeddings, head_weights, head_biases = best[1]
    meta = {
        "epochs_requested": config.epochs,
        "epochs_run": len(history),
        "learning_rate": config.learning_rate,
        "seed": config.seed,
        "patience": config.patience,
        "history": history,
    }
    return PositionalStressModel(vocab, embeddings, head_weights, head_biases, meta)


def _scores_to_pattern(scores: np.ndarray) -> str:
    fired = scores >= 0.0  # sigmoid(s) >= 0.5 iff s >= 0; ties stress
    if not fired.any():
        fired[int(np.argmax(scores))] = True
    return "".join("+" if f else "-" for f in fired)


def predict_scores(model: PositionalStressModel, line: str) -> np.ndarray:
    ids = featurize(line, model.vocab)
    return _sigmoid(model.head_weights @ _hidden(model.embeddings, ids)
                    + model.head_biases)


def predict(model: PositionalStressModel, line: str) -> str:
    """Always an 11-symbol pattern; the best head is forced on if none fire."""
    ids = featurize(line, model.vocab)
    scores = model.head_weights @ _hidden(model.embeddings, ids) + model.head_biases
    return _scores_to_pattern(scores)


# --- serialization ----------------------------------------------------------

def _encode(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode()


def _decode(blob: str, shape: tuple[int, ...]) -> np.ndarray:
    raw = base64.b64decode(blob.encode())
    expected = 8 * int(np.prod(shape))
    if len(raw) != expected:
        raise CorruptModelFile(f"weight blob has {len(raw)} bytes, wanted {expected}")
    return np.frombuffer(raw, dtype="<f8").reshape(shape).copy()


def save_model(model: PositionalStressModel, path) -> None:
    doc = {
        "format": _FORMAT,
        "version": _VERSION,
        "embedding_dim": model.embedding_dim,
        "bucket_count": model.vocab.bucket_count,
        "ngram_min": model.vocab.ngram_min,
        "ngram_max": model.vocab.ngram_max,
        "vocab": list(model.vocab.ngram_to_id),
        "embeddings": _encode(model.embeddings),
        "head_weights": _encode(model.head_weights),
        "head_biases": _encode(model.head_biases),
        "train_meta": model.train_meta,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path) -> PositionalStressModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptModelFile(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != _FORMAT:
        raise CorruptModelFile(f"{path}: not a {_FORMAT} file")
    if doc.get("version") != _VERSION:
        raise CorruptModelFile(f"{path}: unsupported version {doc.get('version')!r}")
    try:
        vocab = FeatureVocab(
            {key: i for i, key in enumerate(doc["vocab"])},
            doc["bucket_count"], doc["ngram_min"], doc["ngram_max"])
        dim = doc["embedding_dim"]
        model = PositionalStressModel(
            vocab=vocab,
            embeddings=_decode(doc["embeddings"], (vocab.size, dim)),
            head_weights=_decode(doc["head_weights"], (PATTERN_LENGTH, dim)),
            head_biases=_decode(doc["head_biases"], (PATTERN_LENGTH,)),
            train_meta=doc["train_meta"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModelFile(f"{path}: {exc}") from exc
    return model
