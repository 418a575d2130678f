"""Group-conditioned unfairness metrics and their differentiable penalties.

Every metric compares prediction behaviour between the disadvantaged and the
advantaged user group.  The shared statistic is the per-item group average:
for item j and each group, the mean predicted score and the mean observed
score over exactly the (user, item) pairs present in the supplied RatingSet.
With signed per-item errors

    e_g(j)  = avg prediction by disadvantaged raters - avg score they gave
    e_a(j)  = the same for advantaged raters

the five metrics are

    value     mean_j | e_g(j) - e_a(j) |
    absolute  mean_j | |e_g(j)| - |e_a(j)| |
    under     mean_j | max(0, -e_g(j)) - max(0, -e_a(j)) |
    over      mean_j | max(0,  e_g(j)) - max(0,  e_a(j)) |
    nonparity | overall avg prediction (disadvantaged) - overall (advantaged) |

Per-item means run over the items rated by BOTH groups; items seen by only
one group have undefined averages and are skipped.  If no item qualifies the
metric is 0.

For gradient-based training each metric gets a smoothed variant: the outer
absolute value |d| is replaced by d**2 while |d| < 1 and kept as |d|
otherwise, which removes the kink at 0 (the two branches meet at 1).
``penalty`` evaluates that smoothed form from model parameters and
``penalty_gradient`` returns its analytic subgradient, using the |d|-branch
slope sign(d) at |d| = 1 and slope 0 at hinge corners and at inner
absolute-value zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import GroupAssignment, RatingSet
from .model import (Gradients, ModelParams, PENALTY_KINDS, accumulate_gradient,
                    predict_entries)

# Report column order, fixed for every CSV/table writer in the package.
METRIC_NAMES = ("error", "value", "absolute", "under", "over", "nonparity")


@dataclass(eq=False)
class GroupItemAverages:
    """Per-item group means plus the overall per-group prediction means.

    Array slots are NaN wherever the corresponding count is zero; callers
    must consult the counts (or ``both_observed``) before using them.
    """

    avg_pred_dis: np.ndarray
    avg_pred_adv: np.ndarray
    avg_rating_dis: np.ndarray
    avg_rating_adv: np.ndarray
    count_dis: np.ndarray
    count_adv: np.ndarray
    overall_pred_dis: float
    overall_pred_adv: float

    @property
    def both_observed(self) -> np.ndarray:
        """Mask of items rated by at least one user of each group."""
        return (self.count_dis > 0) & (self.count_adv > 0)


@dataclass
class FairnessReport:
    """One evaluation row: squared error plus the five unfairness metrics."""

    error: float
    value: float
    absolute: float
    under: float
    over: float
    nonparity: float

    CSV_HEADER = ",".join(METRIC_NAMES)

    def as_dict(self):
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def to_csv(self) -> str:
        row = ",".join(repr(float(getattr(self, name))) for name in METRIC_NAMES)
        return f"{self.CSV_HEADER}\n{row}\n"

    @classmethod
    def from_csv(cls, text: str) -> "FairnessReport":
        lines = [ln for ln in text.strip().splitlines() if ln]
        if len(lines) != 2 or lines[0] != cls.CSV_HEADER:
            raise ValueError("malformed fairness report CSV")
        cells = lines[1].split(",")
        if len(cells) != len(METRIC_NAMES):
            raise ValueError("malformed fairness report CSV")
        return cls(*(float(c) for c in cells))


def group_item_averages(predictions, ratings: RatingSet, groups: GroupAssignment) -> GroupItemAverages:
    """Per-item and overall group means of predictions and observed scores.

    ``predictions`` is aligned with ``ratings`` entries.
    """
    predictions = np.asarray(predictions, dtype=np.float64)
    if predictions.shape != ratings.values.shape:
        raise ValueError("predictions must align with the rating entries")
    groups.check_against(ratings)
    n = ratings.num_items
    dis = groups.disadvantaged[ratings.users]

    def sums(mask, weights):
        return np.bincount(ratings.items[mask], weights=weights[mask], minlength=n)

    count_dis = np.bincount(ratings.items[dis], minlength=n).astype(np.int64)
    count_adv = np.bincount(ratings.items[~dis], minlength=n).astype(np.int64)
    with np.errstate(invalid="ignore", divide="ignore"):
        avg_pred_dis = sums(dis, predictions) / count_dis
        avg_pred_adv = sums(~dis, predictions) / count_adv
        avg_rating_dis = sums(dis, ratings.values) / count_dis
        avg_rating_adv = sums(~dis, ratings.values) / count_adv
    n_dis = int(dis.sum())
    n_adv = len(ratings) - n_dis
    overall_dis = float(predictions[dis].mean()) if n_dis else float("nan")
    overall_adv = float(predictions[~dis].mean()) if n_adv else float("nan")
    return GroupItemAverages(avg_pred_dis, avg_pred_adv, avg_rating_dis, avg_rating_adv,
                             count_dis, count_adv, overall_dis, overall_adv)


def _signed_errors(avgs: GroupItemAverages):
    with np.errstate(invalid="ignore"):
        return (avgs.avg_pred_dis - avgs.avg_rating_dis,
                avgs.avg_pred_adv - avgs.avg_rating_adv)


def _outer_mean(avgs: GroupItemAverages, per_item) -> float:
    valid = avgs.both_observed
    if not valid.any():
        return 0.0
    return float(np.mean(per_item[valid]))


def metric_value(avgs: GroupItemAverages) -> float:
    """Mean absolute gap between the two groups' signed per-item errors."""
    err_dis, err_adv = _signed_errors(avgs)
    with np.errstate(invalid="ignore"):
        return _outer_mean(avgs, np.abs(err_dis - err_adv))


def metric_absolute(avgs: GroupItemAverages) -> float:
    """Mean absolute gap between the groups' per-item error magnitudes."""
    err_dis, err_adv = _signed_errors(avgs)
    with np.errstate(invalid="ignore"):
        return _outer_mean(avgs, np.abs(np.abs(err_dis) - np.abs(err_adv)))


def metric_under(avgs: GroupItemAverages) -> float:
    """Mean absolute gap between the groups' per-item underestimation."""
    err_dis, err_adv = _signed_errors(avgs)
    with np.errstate(invalid="ignore"):
        return _outer_mean(avgs, np.abs(np.maximum(0.0, -err_dis) - np.maximum(0.0, -err_adv)))


def metric_over(avgs: GroupItemAverages) -> float:
    """Mean absolute gap between the groups' per-item overestimation."""
    err_dis, err_adv = _signed_errors(avgs)
    with np.errstate(invalid="ignore"):
        return _outer_mean(avgs, np.abs(np.maximum(0.0, err_dis) - np.maximum(0.0, err_adv)))


def metric_nonparity(avgs: GroupItemAverages) -> float:
    """Absolute gap between the groups' overall average predictions.

    Returns 0 when either group contributed no entries at all (the overall
    average is then undefined), mirroring the empty-item-set convention.
    """
    if np.isnan(avgs.overall_pred_dis) or np.isnan(avgs.overall_pred_adv):
        return 0.0
    return abs(avgs.overall_pred_dis - avgs.overall_pred_adv)


def smoothed_penalty_term(d):
    """Huber-style surrogate for |d|: d**2 while |d| < 1, else |d|.

    Accepts scalars or arrays and preserves the input shape.
    """
    arr = np.asarray(d, dtype=np.float64)
    out = np.where(np.abs(arr) < 1.0, arr * arr, np.abs(arr))
    return float(out) if np.isscalar(d) or arr.ndim == 0 else out


def _smoothed_slope(d):
    """Derivative of smoothed_penalty_term; sign(d) on |d| >= 1 (the
    |d|-branch wins at the |d| = 1 kink)."""
    arr = np.asarray(d, dtype=np.float64)
    return np.where(np.abs(arr) < 1.0, 2.0 * arr, np.sign(arr))


def _inner_terms(kind: str, avgs: GroupItemAverages):
    """Outer argument d_j per item plus its partials with respect to each
    group's average prediction.  Invalid items yield NaN and are masked by
    the callers."""
    err_dis, err_adv = _signed_errors(avgs)
    with np.errstate(invalid="ignore"):
        if kind == "value":
            d = err_dis - err_adv
            fac_dis = np.ones_like(d)
            fac_adv = -np.ones_like(d)
        elif kind == "absolute":
            d = np.abs(err_dis) - np.abs(err_adv)
            fac_dis = np.sign(err_dis)
            fac_adv = -np.sign(err_adv)
        elif kind == "under":
            d = np.maximum(0.0, -err_dis) - np.maximum(0.0, -err_adv)
            fac_dis = -(err_dis < 0).astype(np.float64)
            fac_adv = (err_adv < 0).astype(np.float64)
        elif kind == "over":
            d = np.maximum(0.0, err_dis) - np.maximum(0.0, err_adv)
            fac_dis = (err_dis > 0).astype(np.float64)
            fac_adv = -(err_adv > 0).astype(np.float64)
        else:
            raise ValueError(f"no per-item form for penalty kind {kind!r}")
    return d, fac_dis, fac_adv


def _check_kind(kind: str):
    if kind not in PENALTY_KINDS:
        raise ValueError(f"unknown penalty {kind!r}; valid: {', '.join(PENALTY_KINDS)}")


def _smoothed_metric(kind: str, avgs: GroupItemAverages) -> float:
    if kind == "nonparity":
        if np.isnan(avgs.overall_pred_dis) or np.isnan(avgs.overall_pred_adv):
            return 0.0
        return float(smoothed_penalty_term(avgs.overall_pred_dis - avgs.overall_pred_adv))
    if kind == "under_plus_over":
        return _smoothed_metric("under", avgs) + _smoothed_metric("over", avgs)
    valid = avgs.both_observed
    if not valid.any():
        return 0.0
    d, _, _ = _inner_terms(kind, avgs)
    return float(np.mean(smoothed_penalty_term(d[valid])))


def penalty(kind: str, params: ModelParams, ratings: RatingSet,
            groups: GroupAssignment, weight: float = 1.0) -> float:
    """Smoothed unfairness penalty of the model on the given rating set."""
    _check_kind(kind)
    if kind == "none":
        return 0.0
    if len(ratings) == 0:
        raise ValueError("cannot evaluate a penalty on an empty rating set")
    preds = predict_entries(params, ratings.users, ratings.items)
    avgs = group_item_averages(preds, ratings, groups)
    return weight * _smoothed_metric(kind, avgs)


def _prediction_weights(kind: str, avgs: GroupItemAverages, ratings: RatingSet,
                        groups: GroupAssignment) -> np.ndarray:
    """d penalty / d yhat_k for every rating entry k."""
    n_entries = len(ratings)
    if kind == "none":
        return np.zeros(n_entries)
    if kind == "under_plus_over":
        return (_prediction_weights("under", avgs, ratings, groups)
                + _prediction_weights("over", avgs, ratings, groups))
    dis = groups.disadvantaged[ratings.users]
    if kind == "nonparity":
        n_dis = int(dis.sum())
        n_adv = n_entries - n_dis
        if n_dis == 0 or n_adv == 0:
            return np.zeros(n_entries)
        slope = float(_smoothed_slope(avgs.overall_pred_dis - avgs.overall_pred_adv))
        return np.where(dis, slope / n_dis, -slope / n_adv)
    valid = avgs.both_observed
    n_valid = int(valid.sum())
    if n_valid == 0:
        return np.zeros(n_entries)
    d, fac_dis, fac_adv = _inner_terms(kind, avgs)
    n_items = ratings.num_items
    # Per-item coefficient = outer slope * inner partial / (|valid| * group count);
    # an entry's weight is just the coefficient of its (item, group) cell.
    coeff_dis = np.zeros(n_items)
    coeff_adv = np.zeros(n_items)
    coeff_dis[valid] = (_smoothed_slope(d[valid]) * fac_dis[valid]
                        / (n_valid * avgs.count_dis[valid]))
    coeff_adv[valid] = (_smoothed_slope(d[valid]) * fac_adv[valid]
                        / (n_valid * avgs.count_adv[valid]))
    return np.where(dis, coeff_dis[ratings.items], coeff_adv[ratings.items])


def penalty_gradient(kind: str, params: ModelParams, ratings: RatingSet,
                     groups: GroupAssignment, weight: float = 1.0) -> Gradients:
    """Analytic (sub)gradient of ``penalty`` with respect to every parameter."""
    _check_kind(kind)
    if kind == "none":
        return Gradients.zeros_like(params)
    if len(ratings) == 0:
        raise ValueError("cannot take a penalty gradient on an empty rating set")
    preds = predict_entries(params, ratings.users, ratings.items)
    avgs = group_item_averages(preds, ratings, groups)
    weights = _prediction_weights(kind, avgs, ratings, groups)
    if weight != 1.0:
        weights = weights * weight
    return accumulate_gradient(params, ratings, weights)
