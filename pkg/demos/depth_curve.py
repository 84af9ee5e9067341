"""Minimum network depth against decohering power for N = 100, eta = 0.01.

Prints the staircase where the depth changes; the ceiling formula and the
simulated iteration agree at every grid point.
"""
from aqnn.cli import run_experiment

text, summary = run_experiment({"experiment": "fig2_depth_curve",
                                "parameters": {"N": 100, "eta": 0.01, "grid_points": 200}})
rows = [line.split(",") for line in text.strip().splitlines()[1:]]
last = None
for row in rows:
    d, depth = float(row[2]), int(row[5])
    if depth != last:
        print(f"D >= {d:7.3f}  depth {depth}")
        last = depth
print(summary)
