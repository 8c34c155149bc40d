#!/usr/bin/env python3
"""
Runs a small element-count sweep through the experiment harness and prints
the aggregate rows. The same config text works with the command line tool:

    python -m irswpt.cli run config.ini --out results.csv
"""
from irswpt.harness import AGGREGATE, parse_config_text, run_experiment

CONFIG = """
[scaling_check]
algorithms = su_fs, no_irs
sweep = 10, 20, 40
trials = 20
seed = 42
n_subcarriers = 16
"""

result = run_experiment(parse_config_text(CONFIG), parallelism=4)

print(f"{'elements':>8}  {'algorithm':<8}  {'mean current (A)':>16}")
for row in result.rows:
    if row.trial != AGGREGATE:
        continue
    print(f"{row.sweep_value:>8}  {row.algorithm:<8}  {row.current_amps:>16.6e}")

slopes = result.metadata.get("loglog_slope", {})
for name, slope in slopes.items():
    print(f"\nlog-log slope for {name}: {slope:.3f}")
