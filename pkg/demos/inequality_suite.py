"""Run a slice of the inequality suite and print each record.

Run: python3 demos/inequality_suite.py
"""
from convexent.inequalities import Budget, InstanceGenerator, run_suite, summarize

config = InstanceGenerator(dims=(1, 2), checks=("epi", "berwald", "renyi2", "rogers_shephard"),
                           seed=11)
budget = Budget(samples=30_000, inner=64, volume_samples=60_000)
results = run_suite(config, budget, workers=4)

for r in results:
    print(f"{r.verdict:11s} {r.name:30s} {r.instance:34s} "
          f"lhs={r.lhs:9.4f} rhs={r.rhs:9.4f} slack={r.slack:+.4f}")
print(summarize(results))
