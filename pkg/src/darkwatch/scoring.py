"""Threat-relevance scorer: binary logistic regression over TF-IDF vectors.

Loss is mean binary cross-entropy plus an L2 penalty (lambda/2)*||w||^2;
training is full-batch gradient descent from zero initialization, which
makes every run bit-reproducible without touching an RNG (the problem is
convex, there is no symmetry to break). The labeled corpora this tool
sees are tiny, so there is no need for anything fancier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLabelsError, VocabMismatchError
from .textfeat import TermVector, Vocabulary

# Reported scores stay inside the open interval (0, 1).
_SCORE_EPS = 1e-12

DECISION_THRESHOLD = 0.5


@dataclass(frozen=True)
class Hyperparams:
    learning_rate: float = 0.1
    epochs: int = 1000
    l2_lambda: float = 1e-4
    seed: int = 0

    def to_payload(self) -> dict:
        return {"learning_rate": self.learning_rate, "epochs": self.epochs,
                "l2_lambda": self.l2_lambda, "seed": self.seed}


@dataclass
class ThreatModel:
    weights: np.ndarray
    bias: float
    vocab_hash: str
    version: int
    hyperparams: Hyperparams


def _check_binding(model_hash: str, dim: int, vectors) -> None:
    for vec in vectors:
        if vec.vocab_hash is not None and vec.vocab_hash != model_hash:
            raise VocabMismatchError("vector built against a different vocabulary")
        if vec.weights and max(vec.weights) >= dim:
            raise VocabMismatchError("vector index exceeds model dimension")


def _densify(batch, dim: int) -> tuple[np.ndarray, np.ndarray]:
    X = np.zeros((len(batch), dim))
    y = np.zeros(len(batch))
    for row, (vec, label) in enumerate(batch):
        for idx, w in vec.weights.items():
            X[row, idx] = w
        y[row] = label
    return X, y


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _loss_grad(X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float,
               l2_lambda: float) -> tuple[float, np.ndarray, float]:
    z = X @ w + b
    # BCE via softplus keeps log() away from zero: loss_i = softplus(z) - y*z
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    loss += 0.5 * l2_lambda * float(w @ w)
    residual = _sigmoid(z) - y
    grad_w = X.T @ residual / len(y) + l2_lambda * w
    grad_b = float(np.mean(residual))
    return loss, grad_w, grad_b


def loss_and_gradient(model: ThreatModel, batch) -> tuple[float, np.ndarray, float]:
    """Exact loss and analytic gradients on a batch of (TermVector, 0/1 label)."""
    if not batch:
        raise ValueError("empty batch")
    _check_binding(model.vocab_hash, len(model.weights), (vec for vec, _ in batch))
    X, y = _densify(batch, len(model.weights))
    return _loss_grad(X, y, model.weights, model.bias, model.hyperparams.l2_lambda)


def train(corpus_labeled, vocab: Vocabulary, hyperparams: Hyperparams | None = None,
          previous_version: int = 0) -> ThreatModel:
    """Fit the scorer on (TermVector, label) pairs bound to ``vocab``.

    Requires at least one example of each label. Deterministic: same
    inputs and hyperparameters give bit-identical weights.
    """
    hp = hyperparams or Hyperparams()
    labels = {label for _, label in corpus_labeled}
    if labels != {0, 1}:
        raise DegenerateLabelsError(f"need both labels, got {sorted(labels)}")
    vocab_hash = vocab.vocab_hash()
    _check_binding(vocab_hash, len(vocab), (vec for vec, _ in corpus_labeled))

    X, y = _densify(corpus_labeled, len(vocab))
    w = np.zeros(len(vocab))
    b = 0.0
    for _ in range(hp.epochs):
        _, grad_w, grad_b = _loss_grad(X, y, w, b, hp.l2_lambda)
        w = w - hp.learning_rate * grad_w
        b = b - hp.learning_rate * grad_b

    return ThreatModel(weights=w, bias=b, vocab_hash=vocab_hash,
                       version=previous_version + 1, hyperparams=hp)


def predict_score(model: ThreatModel, vec: TermVector) -> float:
    """sigma(w.v + b), clamped to the open interval (0, 1)."""
    _check_binding(model.vocab_hash, len(model.weights), [vec])
    z = vec.dot_dense(model.weights) + model.bias
    p = float(_sigmoid(np.array([z]))[0])
    return min(max(p, _SCORE_EPS), 1.0 - _SCORE_EPS)


def rank_documents(docs) -> list[str]:
    """Doc ids by score descending, ids ascending on ties, unscored last."""
    ordered = sorted(docs, key=lambda d: (d.score is None, -(d.score or 0.0), d.id))
    return [d.id for d in ordered]


# ----------------------------------------------------------------------
# Serialization (model file carries its vocabulary so it loads across runs)
# ----------------------------------------------------------------------
def model_to_payload(model: ThreatModel, vocab: Vocabulary) -> dict:
    if vocab.vocab_hash() != model.vocab_hash:
        raise VocabMismatchError("vocabulary does not match model binding")
    return {
        "version": model.version,
        "hyperparams": model.hyperparams.to_payload(),
        "vocab_hash": model.vocab_hash,
        "bias": model.bias,
        "weights": [float(w) for w in model.weights],
        "vocabulary": vocab.to_payload(),
    }


def model_from_payload(payload: dict) -> tuple[ThreatModel, Vocabulary]:
    vocab = Vocabulary.from_payload(payload["vocabulary"])
    if vocab.vocab_hash() != payload["vocab_hash"]:
        raise VocabMismatchError("stored vocabulary does not match its hash")
    model = ThreatModel(
        weights=np.array(payload["weights"], dtype=float),
        bias=float(payload["bias"]),
        vocab_hash=payload["vocab_hash"],
        version=int(payload["version"]),
        hyperparams=Hyperparams(**payload["hyperparams"]),
    )
    return model, vocab
