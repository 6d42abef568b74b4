"""
Experiment 03 - what does squeezing a wide source into a narrow baseband
cost once the codec runs on top?

A 16-bit source mapped linearly onto [0, R] is quantized with step
q1 = 65535/R. For each R this prints the effective bitdepth and, for a set
of codec steps q2 (in source units), alpha = q2/q1 and the predicted SNR
loss with one and with two baseband quantizers. Small R means a coarse q1,
alpha near 1 and a loss near 3 dB; raising R buys the loss back quickly.

Run from the project root:
    venv/bin/python lab/experiments/exp03_bitdepth_sweep.py
    venv/bin/python lab/experiments/exp03_bitdepth_sweep.py --ranges 255,1023 --q2 256,512
"""

import argparse
import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(os.path.dirname(HERE))
sys.path.insert(0, os.path.join(ROOT, "src"))

from analysis.theory import (GammaEstimator, snr_loss_one_baseband,  # noqa: E402
                             snr_loss_two_baseband)
from coding.quant import baseband_step, effective_bitdepth  # noqa: E402
from coding.transform import make_rotation_2x2  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--source-bits", type=int, default=16)
    ap.add_argument("--ranges", default="300,500,700,900",
                    help="comma-separated baseband value ranges")
    ap.add_argument("--q2", default="250,500,1000,2000",
                    help="comma-separated codec steps in source units")
    ap.add_argument("--samples", type=int, default=50_000)
    args = ap.parse_args()

    ranges = [float(r) for r in args.ranges.split(",")]
    q2s = [float(q) for q in args.q2.split(",")]
    estimator = GammaEstimator(samples=args.samples)
    rot = make_rotation_2x2()

    for r in ranges:
        q1 = baseband_step(args.source_bits, r)
        print(f"\n=== range {r:g}: {effective_bitdepth(r):.1f} bits, q1 = {q1:.2f} ===")
        print(f"  {'q2':>8s} {'alpha':>7s} {'one bb dB':>10s} {'two bb dB':>10s}")
        for q2 in q2s:
            alpha = q2 / q1
            if alpha < 1.0:
                print(f"  {q2:8.1f} {alpha:7.3f}   q2 below q1, codec step has no effect")
                continue
            gammas = estimator.estimate(rot, alpha) if alpha < 2.0 else None
            print(f"  {q2:8.1f} {alpha:7.3f} {snr_loss_one_baseband(alpha):10.3f}"
                  f" {snr_loss_two_baseband(alpha, gammas):10.3f}")


if __name__ == "__main__":
    main()
