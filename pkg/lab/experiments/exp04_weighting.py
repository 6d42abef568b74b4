"""
Experiment 04 - does it matter that every region counts the same?

The centroid-offset formula averages over regions as if each were equally
likely. A real source visits regions near the origin far more often, and at
low rate the offset there is not typical: the origin maps to itself. This
enumerates regions for the 2x2 rotation and compares the uniform average
with the average weighted by Gaussian region probabilities, as sigma/q1
shrinks from high rate to low.

Expected: the two agree while sigma spans many cells and part ways once it
spans only a handful, which is where the formula should no longer be
trusted for a real signal.

Run from the project root:
    venv/bin/python lab/experiments/exp04_weighting.py
    venv/bin/python lab/experiments/exp04_weighting.py --alpha 2 --m-range 100
"""

import argparse
import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(os.path.dirname(HERE))
sys.path.insert(0, os.path.join(ROOT, "src"))

from analysis.oracle import expected_d2_bruteforce  # noqa: E402
from coding.transform import make_rotation_2x2  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha", type=float, default=8.0)
    ap.add_argument("--m-range", type=int, default=200)
    ap.add_argument("--sigmas", default="50,20,10,5,2,1,0.5",
                    help="comma-separated source sigma in units of q1")
    args = ap.parse_args()

    t = make_rotation_2x2()
    uniform = expected_d2_bruteforce(1.0, args.alpha, t, args.m_range)
    print(f"alpha {args.alpha:g}, M = {args.m_range}: uniform E[d^2] = {uniform:.4f}")
    print(f"  {'sigma/q1':>9s} {'gaussian':>10s} {'ratio':>7s}")
    for s in (float(x) for x in args.sigmas.split(",")):
        if 4.0 * s > args.m_range:
            print(f"  {s:9.2f}   skipped: raise --m-range above {4 * s:g}")
            continue
        weighted = expected_d2_bruteforce(1.0, args.alpha, t, args.m_range,
                                          weighting="gaussian", sigma=s)
        print(f"  {s:9.2f} {weighted:10.4f} {weighted / uniform:7.3f}")


if __name__ == "__main__":
    main()
