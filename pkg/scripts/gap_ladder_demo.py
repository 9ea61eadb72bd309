#!/usr/bin/env python3
"""Print the relative gap ladder of a weighted interval edge.

Usage: python3 scripts/gap_ladder_demo.py [length] [count]
"""

import math
import sys

from thinlab.gaps import gap_ratios
from thinlab.geometry import EdgeSpec, WeightFn
from thinlab.spectra import solve_edge_spectrum

length = float(sys.argv[1]) if len(sys.argv) > 1 else 1.0
count = int(sys.argv[2]) if len(sys.argv) > 2 else 40

edge = EdgeSpec(0, (0.0, length), WeightFn.constant(1.0, (0.0, length)))
spectrum = solve_edge_spectrum(edge, count, h=length / 2048)
report = gap_ratios(spectrum)
print(f"# edge (0, {length}), {count} modes; expected limit "
      f"{2 * math.pi / length:.5f}")
for nu, ratio in zip(report.nus, report.ratios):
    bar = "#" * int(ratio * 4)
    print(f"nu={nu:3d}  ratio={ratio:8.4f}  {bar}")
print(f"tail max {report.tail_max:.5f}  trend slope {report.trend_slope:+.2e}")
