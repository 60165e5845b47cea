#!/usr/bin/env python3
"""Timing and communication table for the determinant certificate.

For each size: how long one elimination takes, how long sealing a
certificate takes (prover side), how long checking it takes (verifier
side), the certificate's element count, and that count's share of the
n^2 elements a shipped factorization would cost.

    python3 scripts/benchmark_table.py --sizes 256 512 1024 --modulus 131071
"""

import argparse
import random
import time

from rankcert.elimination import pluq_crp
from rankcert.field import DEFAULT_MODULUS, PrimeField
from rankcert.matrix import DenseMatrix
from rankcert.protocols import wire


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 512, 1024])
    ap.add_argument("--modulus", type=int, default=DEFAULT_MODULUS)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--protocol", default="det", choices=sorted(wire.PROTOCOL_IDS))
    args = ap.parse_args(argv)

    if wire.COMPANION_COUNT.get(args.protocol):
        ap.error(f"{args.protocol} needs companion matrices; this table is single-matrix")

    field = PrimeField(args.modulus)
    print(f"protocol = {args.protocol}, p = {field.p}")
    print(
        f"{'n':>6} {'eliminate':>10} {'seal':>10} {'check':>10}"
        f" {'check/elim':>11} {'elements':>9} {'vs n^2':>9}"
    )
    for n in args.sizes:
        rng = random.Random(args.seed * 1_000_003 + n)
        a = DenseMatrix.random(field, n, n, rng)

        t0 = time.perf_counter()
        pluq_crp(a)
        t_elim = time.perf_counter() - t0

        t0 = time.perf_counter()
        blob, sealed = wire.seal(args.protocol, a)
        t_seal = time.perf_counter() - t0

        t0 = time.perf_counter()
        _, _, replayed = wire.check(blob)
        t_check = time.perf_counter() - t0
        assert replayed.verdict.accepted

        elems = sealed.meter.communication_total
        print(
            f"{n:>6} {t_elim:>9.3f}s {t_seal:>9.3f}s {t_check:>9.3f}s"
            f" {t_check / t_elim:>11.4f} {elems:>9} {elems / (n * n):>9.5f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
