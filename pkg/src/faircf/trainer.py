"""Full-gradient Adam training loop for the penalized objective.

Each iteration computes the exact gradient of

    mf_objective(params) + penalty_weight * penalty(kind, params)

over the whole training set (no minibatching) and applies one Adam update.
Parameters are initialized i.i.d. normal with standard deviation 0.1 from
the seeded generator, in the fixed order user vectors, item vectors, user
biases, item biases, so a given (data, config) pair always trains to
bit-identical parameters.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import GroupAssignment, RatingSet
from .fairness import penalty, penalty_gradient
from .model import Gradients, ModelParams, TrainConfig, mf_gradient, mf_objective

INIT_SCALE = 0.1


class DivergenceError(RuntimeError):
    """Raised when the objective stops being finite during training."""

    def __init__(self, iteration: int, value: float):
        super().__init__(f"objective became non-finite at iteration {iteration} (value {value})")
        self.iteration = iteration


@dataclass(eq=False)
class AdamState:
    """First/second moment accumulators plus the step counter."""

    first_moment: Gradients
    second_moment: Gradients
    step_count: int = 0

    @classmethod
    def zeros(cls, params: ModelParams) -> "AdamState":
        return cls(Gradients.zeros_like(params), Gradients.zeros_like(params), 0)


@dataclass(eq=False)
class TrainTrace:
    """Per-iteration objective and penalty values plus the wall-clock cost.

    Entry t holds the values measured right after update t, so the last
    entries match an independent recomputation on the returned parameters.
    """

    objective: np.ndarray
    penalty: np.ndarray
    duration_seconds: float

    def __len__(self):
        return int(self.objective.shape[0])

    def write_csv(self, path):
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write("iteration,objective,penalty\n")
            for t, (obj, pen) in enumerate(zip(self.objective.tolist(), self.penalty.tolist()),
                                           start=1):
                fh.write(f"{t},{obj!r},{pen!r}\n")


def init_params(num_users: int, num_items: int, d: int, rng: np.random.Generator) -> ModelParams:
    """Fresh parameters, every entry drawn N(0, INIT_SCALE**2)."""
    return ModelParams(
        rng.normal(0.0, INIT_SCALE, size=(num_users, d)),
        rng.normal(0.0, INIT_SCALE, size=(num_items, d)),
        rng.normal(0.0, INIT_SCALE, size=num_users),
        rng.normal(0.0, INIT_SCALE, size=num_items),
    )


def adam_step(params: ModelParams, grad: Gradients, state: AdamState,
              config: TrainConfig) -> tuple[ModelParams, AdamState]:
    """One Adam update; returns fresh params and state, inputs untouched."""
    b1, b2 = config.adam_beta1, config.adam_beta2
    t = state.step_count + 1
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    new_params, new_m, new_v = [], [], []
    for theta, g, m, v in zip(params.arrays(), grad.arrays(),
                              state.first_moment.arrays(), state.second_moment.arrays()):
        m_next = b1 * m + (1.0 - b1) * g
        v_next = b2 * v + (1.0 - b2) * g * g
        step = config.learning_rate * (m_next / c1) / (np.sqrt(v_next / c2) + config.adam_epsilon)
        new_params.append(theta - step)
        new_m.append(m_next)
        new_v.append(v_next)
    return (ModelParams(*new_params),
            AdamState(Gradients(*new_m), Gradients(*new_v), t))


def train(ratings: RatingSet, groups: GroupAssignment,
          config: TrainConfig) -> tuple[ModelParams, TrainTrace]:
    """Train a model on ``ratings`` under ``config``.

    Returns the final parameters and the per-iteration trace.  With
    ``iterations == 0`` the seeded initialization is returned unchanged and
    the trace is empty.
    """
    config.validate()
    if len(ratings) == 0:
        raise ValueError("cannot train on an empty rating set")
    groups.check_against(ratings)
    rng = np.random.default_rng(config.seed)
    params = init_params(ratings.num_users, ratings.num_items, config.d, rng)
    state = AdamState.zeros(params)
    objectives = np.empty(config.iterations)
    penalties = np.empty(config.iterations)
    start = time.perf_counter()
    for it in range(config.iterations):
        grad = mf_gradient(params, ratings, config.lambda_reg)
        if config.penalty != "none":
            grad = grad.add(penalty_gradient(config.penalty, params, ratings, groups,
                                             weight=config.penalty_weight))
        params, state = adam_step(params, grad, state, config)
        obj = mf_objective(params, ratings, config.lambda_reg)
        pen = (penalty(config.penalty, params, ratings, groups, weight=config.penalty_weight)
               if config.penalty != "none" else 0.0)
        if not (math.isfinite(obj) and math.isfinite(pen)):
            raise DivergenceError(it + 1, obj + pen)
        objectives[it] = obj
        penalties[it] = pen
    trace = TrainTrace(objectives, penalties, time.perf_counter() - start)
    return params, trace
