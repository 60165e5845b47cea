#!/usr/bin/env python3
"""Measure every shipped attack against its soundness ceiling.

Runs each cheating prover for a number of seeded trials and prints the
empirical acceptance rate next to the declared ceiling and the
three-sigma threshold the test suite holds it to.  Useful for checking
new moduli or larger trial counts than the suite runs by default.

    python3 scripts/soundness_sweep.py --trials 20000 --modulus 101
"""

import argparse
import math
import sys
import time

from rankcert.adversaries import ATTACKS, measure
from rankcert.field import PrimeField


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--modulus", type=int, default=101)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=42, help="trial stream seed")
    ap.add_argument("--instance-seed", type=int, default=20260815)
    ap.add_argument("--only", choices=sorted(ATTACKS), default=None)
    args = ap.parse_args(argv)

    field = PrimeField(args.modulus)
    names = [args.only] if args.only else sorted(ATTACKS)

    print(f"p = {field.p}, trials = {args.trials}, seed = {args.seed}")
    print(f"{'attack':<12} {'hits':>6} {'rate':>9} {'ceiling':>9} {'3-sigma':>9}  verdict")
    worst = 0.0
    for name in names:
        attack = ATTACKS[name](field, args.instance_seed)
        t0 = time.perf_counter()
        report = measure(attack, args.trials, args.seed)
        dt = time.perf_counter() - t0
        bound = attack.bound()
        sigma = math.sqrt(bound * (1 - bound) / args.trials)
        ok = report.rate <= bound + 3 * sigma
        worst = max(worst, report.rate / bound if bound else 0.0)
        print(
            f"{name:<12} {report.hits:>6} {report.rate:>9.5f} {bound:>9.5f}"
            f" {bound + 3 * sigma:>9.5f}  {'ok' if ok else 'OVER'} ({dt:.1f}s)"
        )
        if not ok:
            print(f"  {name}: rate exceeds the ceiling, investigate", file=sys.stderr)
            return 1
    print(f"worst rate/ceiling ratio: {worst:.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
