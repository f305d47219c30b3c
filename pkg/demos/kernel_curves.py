"""Export the sampling-kernel curves and summarize their classical limits.

Writes CSV curves for the first two exponential-phase kernels and the
<C^2> kernel at three local-oscillator phases, then prints how fast each
kernel approaches its classical asymptote.  The CSVs are plottable with
any tool (x, value[, classical] columns).

Usage: python3 demos/kernel_curves.py [output_dir]
"""

import math
import os
import sys

import numpy as np

from homodyne_phase.kernels import (
    KernelSpec,
    export_kernel_csv,
    kernel_exp_phase,
)


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "kernel_curves"
    os.makedirs(out_dir, exist_ok=True)

    export_kernel_csv(os.path.join(out_dir, "exp_phase_1.csv"),
                      KernelSpec.parse("exp_phase:1"), -8.0, 8.0, 0.05)
    export_kernel_csv(os.path.join(out_dir, "exp_phase_2.csv"),
                      KernelSpec.parse("exp_phase:2"), -8.0, 8.0, 0.05)
    export_kernel_csv(os.path.join(out_dir, "trig_sq_plus.csv"),
                      KernelSpec.parse("trig_sq:+"), -8.0, 8.0, 0.05,
                      thetas=[0.0, math.pi / 4, math.pi / 2])
    print(f"wrote 3 kernel curves to {out_dir}/")

    # distance to the classical limit: the step function sign(x)/4 for
    # K_1, the logarithm log|x|/pi for K_2
    print("\n  x     K_1(x)    |K_1 - 1/4|   K_2(x)    |K_2 - log(x)/pi|")
    for x in (1.0, 2.0, 3.0, 4.0, 6.0, 8.0):
        k1 = kernel_exp_phase(1, x)
        k2 = kernel_exp_phase(2, x)
        print(f"  {x:3.0f}   {k1:8.5f}  {abs(k1 - 0.25):11.2e}  "
              f"{k2:8.5f}  {abs(k2 - math.log(x) / math.pi):13.2e}")

    # the three <C^2> slices separate at large |x| in the order of the
    # cos(2 theta) factor: theta = 0 on top, pi/2 at the bottom
    from homodyne_phase.kernels import kernel_trig_sq

    print("\n  K_+(8, theta) for theta = 0, pi/4, pi/2:",
          ", ".join(f"{kernel_trig_sq('+', 8.0, t):.4f}"
                    for t in (0.0, math.pi / 4, math.pi / 2)))


if __name__ == "__main__":
    main()
