"""Gated mention-type classification with a trainable linear model.

Two softmax heads share one hashed feature vector: a binary head deciding
whether the candidate mention is a real entity, and a 6-way head for its
type. Training minimizes the sum of the two cross-entropies (the type
head receives no gradient on non-entity examples), and at prediction time
the binary head can veto the type head entirely. A single-head variant
folds the non-entity outcome into a 7th class instead.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataFormatError
from .representation import Representation
from .storage import MAGIC_MODEL, dump_json, load_json, read_container, write_container


class EntityType(Enum):
    PER = "PER"
    LOC = "LOC"
    GRP = "GRP"
    CORP = "CORP"
    PROD = "PROD"
    CW = "CW"


ENTITY_TYPES: tuple[EntityType, ...] = tuple(EntityType)
TYPE_INDEX = {etype: i for i, etype in enumerate(ENTITY_TYPES)}


class GateDecision(Enum):
    NE = "NE"
    O = "O"


# Binary head column order; argmax ties resolve toward NE (index 0).
GATE_NE = 0
GATE_O = 1

# 7th class of single-head models and the window tagger: "not an entity".
OTHER_CLASS = len(ENTITY_TYPES)

DEFAULT_FEATURE_DIM = 2**18

_TINY = 1e-300


@dataclass(frozen=True)
class SparseVector:
    """Non-negative sparse features: strictly increasing indices."""

    indices: np.ndarray
    values: np.ndarray

    @property
    def nnz(self) -> int:
        return len(self.indices)


def hash_feature(parts: tuple[str, ...], feature_dim: int) -> int:
    """Stable feature hashing; feature_dim must be a power of two."""
    digest = hashlib.blake2b("\x1f".join(parts).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") & (feature_dim - 1)


def sparse_from_counts(counts: dict[int, float]) -> SparseVector:
    """Sorted, L2-normalized sparse vector (zero vector stays zero)."""
    if not counts:
        return SparseVector(np.zeros(0, dtype=np.int64), np.zeros(0))
    indices = np.array(sorted(counts), dtype=np.int64)
    values = np.array([counts[i] for i in indices], dtype=np.float64)
    norm = math.sqrt(float(values @ values))
    if norm > 0.0:
        values = values / norm
    return SparseVector(indices, values)


def featurize(rep: Representation, feature_dim: int = DEFAULT_FEATURE_DIM) -> SparseVector:
    """Hashed counts of (segment, token) and (segment, token-bigram) pairs."""
    _check_dim(feature_dim)
    counts: dict[int, float] = {}
    pos = 0
    n = len(rep.tokens)
    while pos < n:
        segment = rep.segments[pos]
        run_end = pos
        while run_end < n and rep.segments[run_end] is segment:
            run_end += 1
        run = rep.tokens[pos:run_end]
        for token in run:
            idx = hash_feature((segment.value, token), feature_dim)
            counts[idx] = counts.get(idx, 0.0) + 1.0
        for left, right in zip(run, run[1:]):
            idx = hash_feature((segment.value, left, right), feature_dim)
            counts[idx] = counts.get(idx, 0.0) + 1.0
        pos = run_end
    return sparse_from_counts(counts)


def _check_dim(feature_dim: int) -> None:
    if feature_dim <= 0 or feature_dim & (feature_dim - 1):
        raise ValueError(f"feature_dim must be a power of two, got {feature_dim}")


@dataclass
class TrainingConfig:
    learning_rate: float = 1.0
    epochs: int = 150
    batch_size: int = 32
    seed: int = 0


@dataclass
class MentionClassifier:
    """Linear model behind the two heads (or the 7-way single head)."""

    feature_dim: int
    single_head: bool
    W_bin: np.ndarray | None
    b_bin: np.ndarray | None
    W_type: np.ndarray
    b_type: np.ndarray
    epoch_losses: list[float] | None = None

    @classmethod
    def zeros(cls, feature_dim: int, *, single_head: bool = False) -> "MentionClassifier":
        _check_dim(feature_dim)
        n_types = len(ENTITY_TYPES) + (1 if single_head else 0)
        return cls(
            feature_dim=feature_dim,
            single_head=single_head,
            W_bin=None if single_head else np.zeros((2, feature_dim)),
            b_bin=None if single_head else np.zeros(2),
            W_type=np.zeros((n_types, feature_dim)),
            b_type=np.zeros(n_types),
        )


@dataclass(frozen=True)
class TrainExample:
    """A mention representation with its gold gate and type labels."""

    rep: Representation
    gate: GateDecision
    entity_type: EntityType | None

    def __post_init__(self) -> None:
        if self.gate is GateDecision.NE and self.entity_type is None:
            raise ValueError("NE example requires an entity type")
        if self.gate is GateDecision.O and self.entity_type is not None:
            raise ValueError("type label given for a non-entity example")


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    exp = np.exp(shifted)
    return exp / exp.sum()


def _head_logits(W: np.ndarray, b: np.ndarray, x: SparseVector) -> np.ndarray:
    if x.nnz == 0:
        return b.copy()
    return W[:, x.indices] @ x.values + b


def forward(model: MentionClassifier, features: SparseVector) -> tuple[np.ndarray | None, np.ndarray]:
    """Head probabilities for one feature vector.

    Returns (p_bin, p_type); p_bin is None for single-head models, whose
    p_type covers the six entity types plus the non-entity class.
    """
    if features.nnz and int(features.indices[-1]) >= model.feature_dim:
        raise ValueError("feature index exceeds model dimension")
    p_type = softmax(_head_logits(model.W_type, model.b_type, features))
    if model.single_head:
        return None, p_type
    p_bin = softmax(_head_logits(model.W_bin, model.b_bin, features))
    return p_bin, p_type


def cross_entropy(probs: np.ndarray, target: int) -> float:
    return -math.log(max(float(probs[target]), _TINY))


def loss(
    p_bin: np.ndarray,
    p_type: np.ndarray,
    gold_gate: GateDecision,
    gold_type: EntityType | None,
) -> float:
    """Summed two-head loss for one example.

    Entity examples pay both cross-entropies; non-entity examples pay only
    the binary head's (the type head is unsupervised there).
    """
    if gold_gate is GateDecision.O:
        if gold_type is not None:
            raise ValueError("gold_type must be absent when the gate label is O")
        return cross_entropy(p_bin, GATE_O)
    if gold_type is None:
        raise ValueError("gold_type required when the gate label is NE")
    return cross_entropy(p_bin, GATE_NE) + cross_entropy(p_type, TYPE_INDEX[gold_type])


def loss_single_head(p_type: np.ndarray, gold_class: int) -> float:
    """Cross-entropy of the 7-way head (six types plus the other class)."""
    return cross_entropy(p_type, gold_class)


def _example_gradients(
    model: MentionClassifier, x: SparseVector, label: object
) -> tuple[float, np.ndarray | None, np.ndarray | None]:
    """Per-example loss and d(loss)/d(logits) for each head."""
    p_bin, p_type = forward(model, x)
    if model.single_head:
        gold_class = int(label)
        dz_type = p_type.copy()
        dz_type[gold_class] -= 1.0
        return loss_single_head(p_type, gold_class), None, dz_type

    gate, etype = label
    value = loss(p_bin, p_type, gate, etype)
    dz_bin = p_bin.copy()
    dz_bin[GATE_NE if gate is GateDecision.NE else GATE_O] -= 1.0
    dz_type = None
    if gate is GateDecision.NE:
        dz_type = p_type.copy()
        dz_type[TYPE_INDEX[etype]] -= 1.0
    return value, dz_bin, dz_type


def batch_loss(
    model: MentionClassifier, features: Sequence[SparseVector], labels: Sequence[object]
) -> float:
    """Mean per-example loss over a batch."""
    total = 0.0
    for x, label in zip(features, labels):
        total += _example_gradients(model, x, label)[0]
    return total / len(features)


def batch_gradients(
    model: MentionClassifier, features: Sequence[SparseVector], labels: Sequence[object]
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean batch loss plus dense gradients for every parameter array.

    Dense output exists for verification against finite differences; the
    training loop applies the same per-example terms sparsely.
    """
    n = len(features)
    grads = {
        "W_type": np.zeros_like(model.W_type),
        "b_type": np.zeros_like(model.b_type),
    }
    if not model.single_head:
        grads["W_bin"] = np.zeros_like(model.W_bin)
        grads["b_bin"] = np.zeros_like(model.b_bin)
    total = 0.0
    for x, label in zip(features, labels):
        value, dz_bin, dz_type = _example_gradients(model, x, label)
        total += value
        if dz_bin is not None:
            grads["b_bin"] += dz_bin / n
            if x.nnz:
                grads["W_bin"][:, x.indices] += np.outer(dz_bin, x.values) / n
        if dz_type is not None:
            grads["b_type"] += dz_type / n
            if x.nnz:
                grads["W_type"][:, x.indices] += np.outer(dz_type, x.values) / n
    return total / n, grads


def train(
    examples: Sequence[TrainExample],
    config: TrainingConfig,
    *,
    feature_dim: int = DEFAULT_FEATURE_DIM,
    single_head: bool = False,
) -> MentionClassifier:
    """Mini-batch gradient descent on the summed loss, seeded and
    deterministic: the same examples, config, and seed produce bitwise
    identical weights.
    """
    if not examples:
        raise ValueError("cannot train on an empty example list")
    features = [featurize(e.rep, feature_dim) for e in examples]
    if single_head:
        labels: list[object] = [
            OTHER_CLASS if e.entity_type is None else TYPE_INDEX[e.entity_type]
            for e in examples
        ]
    else:
        labels = [(e.gate, e.entity_type) for e in examples]
    model = MentionClassifier.zeros(feature_dim, single_head=single_head)
    model.epoch_losses = _fit(model, features, labels, config)
    return model


def _fit(
    model: MentionClassifier,
    features: Sequence[SparseVector],
    labels: Sequence[object],
    config: TrainingConfig,
) -> list[float]:
    """Shared descent loop; also used by the per-token window tagger."""
    rng = np.random.default_rng(config.seed)
    n = len(features)
    epoch_losses: list[float] = []
    for _ in range(config.epochs):
        order = rng.permutation(n)
        epoch_total = 0.0
        for lo in range(0, n, config.batch_size):
            batch = order[lo : lo + config.batch_size]
            scale = config.learning_rate / len(batch)
            # Gradients come from the pre-update weights for the whole batch.
            terms = [_example_gradients(model, features[i], labels[i]) for i in batch]
            epoch_total += sum(t[0] for t in terms)
            for i, (_, dz_bin, dz_type) in zip(batch, terms):
                x = features[i]
                if dz_bin is not None:
                    model.b_bin -= scale * dz_bin
                    if x.nnz:
                        model.W_bin[:, x.indices] -= scale * np.outer(dz_bin, x.values)
                if dz_type is not None:
                    model.b_type -= scale * dz_type
                    if x.nnz:
                        model.W_type[:, x.indices] -= scale * np.outer(dz_type, x.values)
        epoch_losses.append(epoch_total / n)
    return epoch_losses


def decide(p_bin: np.ndarray | None, p_type: np.ndarray) -> EntityType | None:
    """The gate rule: a binary-head O verdict overrides the type head.

    Returns None for "not an entity". Binary ties resolve toward NE; type
    ties toward the lower type index.
    """
    if p_bin is not None:
        if int(np.argmax(p_bin)) == GATE_O:
            return None
        return ENTITY_TYPES[int(np.argmax(p_type))]
    best = int(np.argmax(p_type))
    return None if best == OTHER_CLASS else ENTITY_TYPES[best]


def predict(model: MentionClassifier, rep: Representation) -> EntityType | None:
    """Classify one mention representation; None means "not an entity"."""
    p_bin, p_type = forward(model, featurize(rep, model.feature_dim))
    return decide(p_bin, p_type)


_KIND_MENTION = "mention_classifier"


def save_model(model: MentionClassifier, path: str | Path) -> None:
    arrays = _model_arrays(model)
    header = {
        "kind": _KIND_MENTION,
        "feature_dim": model.feature_dim,
        "single_head": model.single_head,
        "arrays": [[name, list(arr.shape)] for name, arr in arrays],
    }
    write_container(path, MAGIC_MODEL, dump_json(header) + b"\n" + _pack_arrays(arrays))


def load_model(path: str | Path) -> MentionClassifier:
    header, data = _read_model_container(path, _KIND_MENTION)
    values = _unpack_arrays(header["arrays"], data, path)
    single_head = bool(header["single_head"])
    return MentionClassifier(
        feature_dim=int(header["feature_dim"]),
        single_head=single_head,
        W_bin=None if single_head else values["W_bin"],
        b_bin=None if single_head else values["b_bin"],
        W_type=values["W_type"],
        b_type=values["b_type"],
    )


def _model_arrays(model: MentionClassifier) -> list[tuple[str, np.ndarray]]:
    arrays: list[tuple[str, np.ndarray]] = []
    if not model.single_head:
        arrays.append(("W_bin", model.W_bin))
        arrays.append(("b_bin", model.b_bin))
    arrays.append(("W_type", model.W_type))
    arrays.append(("b_type", model.b_type))
    return arrays


def _pack_arrays(arrays: list[tuple[str, np.ndarray]]) -> bytes:
    return b"".join(np.ascontiguousarray(arr, dtype="<f8").tobytes() for _, arr in arrays)


def _unpack_arrays(
    layout: list, data: bytes, path: str | Path
) -> dict[str, np.ndarray]:
    values: dict[str, np.ndarray] = {}
    offset = 0
    for name, shape in layout:
        count = int(np.prod(shape))
        nbytes = count * 8
        if offset + nbytes > len(data):
            raise DataFormatError(f"{path}: truncated model weights")
        values[name] = (
            np.frombuffer(data[offset : offset + nbytes], dtype="<f8")
            .reshape([int(s) for s in shape])
            .copy()
        )
        offset += nbytes
    if offset != len(data):
        raise DataFormatError(f"{path}: trailing bytes after model weights")
    return values


def _read_model_container(path: str | Path, expected_kind: str) -> tuple[dict, bytes]:
    payload = read_container(path, MAGIC_MODEL)
    sep = payload.find(b"\n")
    if sep < 0:
        raise DataFormatError(f"{path}: model header missing")
    header = load_json(payload[:sep], path)
    if not isinstance(header, dict) or header.get("kind") != expected_kind:
        raise DataFormatError(
            f"{path}: expected a {expected_kind} model, found {header.get('kind')!r}"
            if isinstance(header, dict)
            else f"{path}: malformed model header"
        )
    return header, payload[sep + 1 :]
