"""Biased matrix-factorization model: parameters, prediction rule, the
regularized squared-error objective and its analytic gradient.

A score is predicted as

    yhat_ij = p_i . q_j + u_i + v_j

with user vectors P (rows p_i), item vectors Q (rows q_j) and scalar biases
u, v.  The training objective over an observed rating set X is

    J = (reg / 2) * (||P||_F^2 + ||Q||_F^2) + (1 / |X|) * sum (yhat_ij - r_ij)^2

The bias vectors are deliberately left out of the norm term.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import RatingSet

# Valid penalty selectors for TrainConfig and the fairness module.
PENALTY_KINDS = ("none", "value", "absolute", "under", "over", "nonparity", "under_plus_over")


@dataclass(eq=False)
class ModelParams:
    """Dense model state: (num_users, d) and (num_items, d) factor matrices
    plus one bias per user and per item."""

    user_vectors: np.ndarray
    item_vectors: np.ndarray
    user_bias: np.ndarray
    item_bias: np.ndarray

    def __post_init__(self):
        self.user_vectors = np.ascontiguousarray(self.user_vectors, dtype=np.float64)
        self.item_vectors = np.ascontiguousarray(self.item_vectors, dtype=np.float64)
        self.user_bias = np.ascontiguousarray(self.user_bias, dtype=np.float64)
        self.item_bias = np.ascontiguousarray(self.item_bias, dtype=np.float64)
        self.validate()

    def validate(self):
        if self.user_vectors.ndim != 2 or self.item_vectors.ndim != 2:
            raise ValueError("factor matrices must be 2-d")
        if self.user_vectors.shape[1] != self.item_vectors.shape[1]:
            raise ValueError("user and item vectors must share the latent dimension")
        if self.user_bias.shape != (self.user_vectors.shape[0],):
            raise ValueError("user_bias length must match user_vectors")
        if self.item_bias.shape != (self.item_vectors.shape[0],):
            raise ValueError("item_bias length must match item_vectors")
        for arr in self.arrays():
            if not np.all(np.isfinite(arr)):
                raise ValueError("model parameters must be finite")

    @property
    def num_users(self):
        return int(self.user_vectors.shape[0])

    @property
    def num_items(self):
        return int(self.item_vectors.shape[0])

    @property
    def d(self):
        return int(self.user_vectors.shape[1])

    def arrays(self):
        return (self.user_vectors, self.item_vectors, self.user_bias, self.item_bias)

    def copy(self) -> "ModelParams":
        return ModelParams(*(a.copy() for a in self.arrays()))

    @classmethod
    def zeros(cls, num_users, num_items, d) -> "ModelParams":
        return cls(np.zeros((num_users, d)), np.zeros((num_items, d)),
                   np.zeros(num_users), np.zeros(num_items))


@dataclass(eq=False)
class Gradients:
    """Partial derivatives with the same block structure as ModelParams."""

    user_vectors: np.ndarray
    item_vectors: np.ndarray
    user_bias: np.ndarray
    item_bias: np.ndarray

    def arrays(self):
        return (self.user_vectors, self.item_vectors, self.user_bias, self.item_bias)

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "Gradients":
        return cls(*(np.zeros_like(a) for a in params.arrays()))

    def add(self, other: "Gradients") -> "Gradients":
        return Gradients(*(a + b for a, b in zip(self.arrays(), other.arrays())))


@dataclass
class TrainConfig:
    """Hyperparameters for the full-gradient Adam loop.

    ``penalty`` selects the fairness term added to the objective (one of
    PENALTY_KINDS); ``penalty_weight`` scales it and defaults to equal
    weighting.
    """

    d: int = 2
    lambda_reg: float = 1e-3
    iterations: int = 250
    learning_rate: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    seed: int = 0
    penalty: str = "none"
    penalty_weight: float = 1.0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.d < 1:
            raise ValueError("latent dimension must be >= 1")
        if self.lambda_reg < 0:
            raise ValueError("lambda_reg must be >= 0")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ValueError("adam betas must lie in [0, 1)")
        if self.adam_epsilon <= 0:
            raise ValueError("adam_epsilon must be > 0")
        if self.penalty not in PENALTY_KINDS:
            raise ValueError(f"unknown penalty {self.penalty!r}; valid: {', '.join(PENALTY_KINDS)}")
        if self.penalty_weight < 0:
            raise ValueError("penalty_weight must be >= 0")


def predict(params: ModelParams, user: int, item: int) -> float:
    """Predicted score for a single (user, item) pair."""
    if not 0 <= user < params.num_users:
        raise IndexError(f"user index {user} out of range")
    if not 0 <= item < params.num_items:
        raise IndexError(f"item index {item} out of range")
    return float(params.user_vectors[user] @ params.item_vectors[item]
                 + params.user_bias[user] + params.item_bias[item])


def predict_entries(params: ModelParams, users, items) -> np.ndarray:
    """Predicted scores for parallel index arrays (indices assumed valid)."""
    dots = np.einsum("ij,ij->i", params.user_vectors[users], params.item_vectors[items])
    return dots + params.user_bias[users] + params.item_bias[items]


def predict_matrix(params: ModelParams) -> np.ndarray:
    """Dense (num_users, num_items) prediction matrix."""
    return (params.user_vectors @ params.item_vectors.T
            + params.user_bias[:, None] + params.item_bias[None, :])


def mf_objective(params: ModelParams, ratings: RatingSet, lambda_reg: float) -> float:
    """Regularized mean squared reconstruction error over the observed set."""
    if len(ratings) == 0:
        raise ValueError("cannot evaluate the objective on an empty rating set")
    residual = predict_entries(params, ratings.users, ratings.items) - ratings.values
    reg = 0.5 * lambda_reg * (np.sum(params.user_vectors ** 2) + np.sum(params.item_vectors ** 2))
    return float(reg + np.mean(residual ** 2))


def accumulate_gradient(params: ModelParams, ratings: RatingSet, weights) -> Gradients:
    """Chain per-entry prediction-space derivatives dL/dyhat_k back to the
    parameters.  ``weights`` is aligned with ``ratings`` entries.

    Accumulation uses bincount, which sums in index order, so results are
    reproducible bit-for-bit.
    """
    users, items = ratings.users, ratings.items
    m, n, d = params.num_users, params.num_items, params.d
    gp = np.empty((m, d))
    gq = np.empty((n, d))
    for k in range(d):
        gp[:, k] = np.bincount(users, weights=weights * params.item_vectors[items, k], minlength=m)
        gq[:, k] = np.bincount(items, weights=weights * params.user_vectors[users, k], minlength=n)
    gu = np.bincount(users, weights=weights, minlength=m)
    gv = np.bincount(items, weights=weights, minlength=n)
    return Gradients(gp, gq, gu, gv)


def mf_gradient(params: ModelParams, ratings: RatingSet, lambda_reg: float) -> Gradients:
    """Analytic gradient of mf_objective with respect to every parameter."""
    if len(ratings) == 0:
        raise ValueError("cannot take the gradient on an empty rating set")
    residual = predict_entries(params, ratings.users, ratings.items) - ratings.values
    grad = accumulate_gradient(params, ratings, 2.0 * residual / len(ratings))
    grad.user_vectors += lambda_reg * params.user_vectors
    grad.item_vectors += lambda_reg * params.item_vectors
    return grad


def save_params(params: ModelParams, path):
    """Write parameters as text: a ``num_users num_items d`` header line,
    then one row per user and per item holding the factor vector followed by
    the bias, space-separated with full float precision."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{params.num_users} {params.num_items} {params.d}\n")
        for vecs, bias in ((params.user_vectors, params.user_bias),
                           (params.item_vectors, params.item_bias)):
            for row, b in zip(vecs, bias):
                cells = [repr(float(x)) for x in row] + [repr(float(b))]
                fh.write(" ".join(cells) + "\n")


def load_params(path) -> ModelParams:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: expected 'num_users num_items d' header")
        m, n, d = (int(x) for x in header)
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split()
            if len(cells) != d + 1:
                raise ValueError(f"{path}: line {lineno}: expected {d + 1} values")
            rows.append([float(x) for x in cells])
    if len(rows) != m + n:
        raise ValueError(f"{path}: expected {m + n} entity rows, found {len(rows)}")
    table = np.array(rows, dtype=np.float64)
    return ModelParams(table[:m, :d], table[m:, :d], table[:m, d], table[m:, d])
