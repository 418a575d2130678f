"""Run a full penalty sweep with paired trials and significance marks.

Every trial draws one dataset that all penalties share, so column
differences come from the penalty, not from data luck.  A star in the
rendered table marks the best mean of each column together with every
penalty statistically indistinguishable from it (two-sided paired t-test
at the 5% level).
"""

from faircf import TrainConfig
from faircf.experiments import ExperimentPlan, render, run_experiment

plan = ExperimentPlan(
    scenario="synthetic_PO",
    penalties=("none", "value", "absolute", "under", "over", "nonparity"),
    trials=3,
    num_users=200,
    num_items=150,
    seed=0,
    config=TrainConfig(iterations=250),
)
print(f"scenario {plan.scenario}: {plan.trials} paired trials, "
      f"{len(plan.penalties)} penalties, {plan.num_users} x {plan.num_items} grids")
result = run_experiment(plan)

print()
print(render(result))
print("per-trial data seeds:", result.trial_seeds)
for metric in ("value", "under", "nonparity"):
    members = ", ".join(sorted(result.indistinguishable[metric]))
    print(f"statistically best on {metric}: {members}")
