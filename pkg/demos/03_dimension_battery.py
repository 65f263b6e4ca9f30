"""
Viterbo ratios across dimensions.

Runs the batch harness on ``battery.json`` and writes ``battery.csv`` with
``battery.svg`` next to this script.  The same run from the shell is
``symcap run demos/battery.json --plot``.
"""

from pathlib import Path

from symcap.experiments import ExperimentConfig, gamma_svg, run_experiment, write_atomic

here = Path(__file__).parent
cfg = ExperimentConfig.load(here / "battery.json")
cfg.output = str(here / "battery.csv")
report = run_experiment(cfg, workers=2)
write_atomic(str(here / "battery.svg"), gamma_svg(report.rows))

print(f"{'body':<22s} {'gamma':>9s} {'A2':>7s} {'RS ratio':>10s}")
for row in report.rows:
    if row["error"]:
        print(f"{row['body_id']:<22s} error: {row['error']}")
        continue
    print(f"{row['body_id']:<22s} {row['gamma']:9.4f} {row['a2']:7.4f} {row['rs_ratio']:10.4f}")
print("all invariant checks passed:", report.passed)
