"""Add a fairness penalty to the training objective and watch the tradeoff.

Each penalty is the smoothed version of one metric (squared near zero,
absolute further out) computed on the training ratings, added to the squared
error with a configurable weight.
"""

from faircf import TrainConfig
from faircf.experiments import evaluate
from faircf.fairness import METRIC_NAMES
from faircf.synthetic import builtin_specs, evaluation_set, generate
from faircf.trainer import train

data = generate(builtin_specs(num_users=200, num_items=150, seed=7)["P+O"])
held_out = evaluation_set(data)

reports = {}
for pen in ("none", "value", "under_plus_over"):
    config = TrainConfig(iterations=250, penalty=pen, penalty_weight=1.0, seed=3)
    params, trace = train(data.observed, data.groups, config)
    reports[pen] = evaluate(params, held_out, data.groups)
    if pen != "none":
        print(f"{pen}: penalty term {trace.penalty[0]:.4f} -> {trace.penalty[-1]:.4f} "
              f"over {len(trace)} iterations")

print()
header = "penalty          " + "".join(f"{m:>10}" for m in METRIC_NAMES)
print(header)
for pen, report in reports.items():
    row = report.as_dict()
    print(f"{pen:16} " + "".join(f"{row[m]:10.3f}" for m in METRIC_NAMES))

print()
value_drop = reports["none"].value - reports["value"].value
error_cost = reports["value"].error - reports["none"].error
print(f"the value penalty removes {value_drop:.3f} value unfairness "
      f"at an error cost of {error_cost:+.3f}")
