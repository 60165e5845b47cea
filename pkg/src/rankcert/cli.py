"""Command line front end.

Subcommands:
  gen     write a test matrix in the text format
  run     interactive protocol run with a seeded challenger
  seal    produce a non-interactive certificate file
  check   replay a certificate file
  attack  measure a cheating prover's empirical acceptance rate
  bench   prover vs verifier timing and communication volume

Exit status: 0 accepted, 1 rejected (or attack over budget), 2 aborted
run, unusable input, or a protocol order violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time

import numpy as np

from . import __version__
from .adversaries import ATTACKS, measure
from .elimination import (
    pluq_crp,
    random_nonsingular,
    random_rank_deficient,
    random_unit_lower,
    random_unit_upper,
)
from .field import DEFAULT_MODULUS, PrimeField
from .matrix import (
    DenseMatrix,
    Diagonal,
    Permutation,
    RankProfileMatrix,
    dump_matrix,
    load_matrix,
)
from .protocols.base import (
    CostMeter,
    InteractiveChallenges,
    ProtocolAbort,
    RunResult,
)
from .protocols import wire

EXIT_ACCEPT = 0
EXIT_REJECT = 1
EXIT_ABORT = 2


def _value_json(value):
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, Permutation):
        return {"permutation": list(value.images)}
    if isinstance(value, Diagonal):
        return {"diagonal": list(value.entries)}
    if isinstance(value, RankProfileMatrix):
        return {
            "ones": [list(pos) for pos in value.positions],
            "rank": value.rank,
            "shape": [value.m, value.n],
        }
    if isinstance(value, tuple):
        return [_value_json(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    return repr(value)


def _meter_json(meter: CostMeter):
    return {
        "field_elements": meter.field_elems_total,
        "integers": meter.integers_total,
        "communication": meter.communication_total,
        "messages": meter.messages,
        "verifier_field_ops": meter.verifier_field_ops,
        "verifier_matvecs": meter.verifier_matvecs,
    }


def _result_json(protocol: str, result: RunResult):
    out = {
        "protocol": protocol,
        "accepted": result.verdict.accepted,
        "reason": result.verdict.reason,
        "value": _value_json(result.value),
        "meter": _meter_json(result.meter),
    }
    if result.prologue is not None:
        out["prologue"] = {
            "accepted": result.prologue.verdict.accepted,
            "meter": _meter_json(result.prologue.meter),
        }
    return out


def _emit(payload, as_json: bool) -> None:
    if as_json:
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
        return
    for key, val in payload.items():
        sys.stdout.write(f"{key}: {json.dumps(val, sort_keys=True)}\n")


def _read_matrix(path: str) -> DenseMatrix:
    with open(path, "r", encoding="ascii") as fh:
        return load_matrix(fh.read())


def _digest_rng(a: DenseMatrix) -> random.Random:
    digest = hashlib.sha256(dump_matrix(a).encode("ascii")).digest()
    return random.Random(int.from_bytes(digest[:8], "little"))


def _companions(protocol: str, a: DenseMatrix, given: list[str]) -> tuple[DenseMatrix, ...]:
    """Companion matrices from --with files, or derived from A's digest
    so a bare invocation still demonstrates a true statement."""
    want = wire.COMPANION_COUNT.get(protocol, 0)
    if given:
        if len(given) != want:
            raise SystemExit(f"{protocol} takes {want} --with file(s), got {len(given)}")
        return tuple(_read_matrix(path) for path in given)
    if want == 0:
        return ()
    rng = _digest_rng(a)
    if protocol == "freivalds":
        b = DenseMatrix.random(a.field, a.n, a.n, rng)
        return (b, a @ b)
    if protocol == "tri-equiv-lower":
        return (a @ random_unit_lower(a.field, a.n, rng),)
    if protocol == "tri-equiv-upper":
        return (a @ random_unit_upper(a.field, a.n, rng),)
    raise SystemExit(f"no companion derivation for {protocol}")


# Subcommands -------------------------------------------------------------------


def cmd_gen(args) -> int:
    field = PrimeField(args.modulus)
    rng = random.Random(args.seed)
    n = args.rows
    if args.kind == "random":
        mat = DenseMatrix.random(field, args.rows, args.cols, rng)
    elif args.kind == "identity":
        mat = DenseMatrix(field, np.eye(n, dtype=np.int64))
    elif args.kind == "swap":
        mat = DenseMatrix(field, np.eye(n, dtype=np.int64)[::-1].copy())
    elif args.kind == "rankdef":
        rank = args.rank if args.rank is not None else max(min(args.rows, args.cols) // 2, 1)
        mat = random_rank_deficient(field, args.rows, args.cols, rank, rng)
    else:
        raise SystemExit(f"unknown kind {args.kind}")
    text = dump_matrix(mat)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_ACCEPT


def cmd_run(args) -> int:
    a = _read_matrix(args.matrix)
    mats = (a,) + _companions(args.protocol, a, args.companions)
    challenges = InteractiveChallenges(args.seed)
    result = wire.runner(args.protocol)(mats, challenges, None)
    _emit(_result_json(args.protocol, result) | {"seed": args.seed}, args.json)
    return EXIT_ACCEPT if result.verdict.accepted else EXIT_REJECT


def cmd_seal(args) -> int:
    a = _read_matrix(args.matrix)
    mats = (a,) + _companions(args.protocol, a, args.companions)
    blob, result = wire.seal(args.protocol, *mats)
    with open(args.out, "wb") as fh:
        fh.write(blob)
    _emit(
        {
            "protocol": args.protocol,
            "certificate": args.out,
            "bytes": len(blob),
            "value": _value_json(result.value),
            "meter": _meter_json(result.meter),
        },
        args.json,
    )
    return EXIT_ACCEPT


def cmd_check(args) -> int:
    with open(args.certificate, "rb") as fh:
        blob = fh.read()
    protocol, mats, result = wire.check(blob)
    payload = _result_json(protocol, result)
    if args.matrix:
        stated = _read_matrix(args.matrix)
        if stated != mats[0]:
            payload["accepted"] = False
            payload["reason"] = "instance-mismatch"
            _emit(payload, args.json)
            return EXIT_REJECT
    _emit(payload, args.json)
    return EXIT_ACCEPT if result.verdict.accepted else EXIT_REJECT


def cmd_attack(args) -> int:
    field = PrimeField(args.modulus)
    attack = ATTACKS[args.name](field, seed=args.instance_seed)
    report = measure(attack, args.trials, args.seed)
    _emit(
        {
            "attack": report.name,
            "trials": report.trials,
            "hits": report.hits,
            "rate": report.rate,
            "bound": report.bound,
            "threshold": report.threshold,
            "within_bound": report.within_bound,
        },
        args.json,
    )
    return EXIT_ACCEPT if report.within_bound else EXIT_REJECT


def cmd_bench(args) -> int:
    field = PrimeField(args.modulus)
    rows = []
    for n in args.sizes:
        rng = random.Random(args.seed + n)
        a = random_nonsingular(field, n, rng)
        t0 = time.perf_counter()
        pluq_crp(a)
        t_elim = time.perf_counter() - t0
        t0 = time.perf_counter()
        blob, _ = wire.seal("det", a)
        t_seal = time.perf_counter() - t0
        t0 = time.perf_counter()
        _, _, result = wire.check(blob)
        t_check = time.perf_counter() - t0
        rows.append(
            {
                "n": n,
                "elimination_seconds": round(t_elim, 4),
                "seal_seconds": round(t_seal, 4),
                "check_seconds": round(t_check, 4),
                "check_over_elimination": round(t_check / t_elim, 4) if t_elim else None,
                "communication": result.meter.communication_total,
                "matrix_entries": n * n,
            }
        )
    if args.json:
        sys.stdout.write(json.dumps({"rows": rows}, sort_keys=True) + "\n")
    else:
        hdr = f"{'n':>6} {'elim(s)':>9} {'seal(s)':>9} {'check(s)':>9} {'ratio':>7} {'comm':>8} {'n^2':>10}"
        sys.stdout.write(hdr + "\n")
        for r in rows:
            sys.stdout.write(
                f"{r['n']:>6} {r['elimination_seconds']:>9.3f} {r['seal_seconds']:>9.3f} "
                f"{r['check_seconds']:>9.3f} {r['check_over_elimination']:>7.3f} "
                f"{r['communication']:>8} {r['matrix_entries']:>10}\n"
            )
    return EXIT_ACCEPT


# Parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankcert",
        description="interactive and sealed certificates for exact linear algebra "
        "over a prime field",
    )
    parser.add_argument("--version", action="version", version=f"rankcert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    protocols = sorted(wire.PROTOCOL_IDS)

    g = sub.add_parser("gen", help="write a test matrix")
    g.add_argument("--kind", choices=("random", "identity", "swap", "rankdef"), default="random")
    g.add_argument("--rows", type=int, default=8)
    g.add_argument("--cols", type=int, default=8)
    g.add_argument("--rank", type=int, default=None, help="target rank for rankdef")
    g.add_argument("--modulus", type=int, default=DEFAULT_MODULUS)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None)
    g.set_defaults(fn=cmd_gen)

    r = sub.add_parser("run", help="interactive run with a seeded challenger")
    r.add_argument("protocol", choices=protocols)
    r.add_argument("--matrix", required=True)
    r.add_argument("--with", dest="companions", action="append", default=[],
                   metavar="FILE", help="companion matrix file (repeatable)")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--json", action="store_true")
    r.set_defaults(fn=cmd_run)

    s = sub.add_parser("seal", help="write a non-interactive certificate")
    s.add_argument("protocol", choices=protocols)
    s.add_argument("--matrix", required=True)
    s.add_argument("--with", dest="companions", action="append", default=[],
                   metavar="FILE", help="companion matrix file (repeatable)")
    s.add_argument("--out", required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(fn=cmd_seal)

    c = sub.add_parser("check", help="replay a certificate file")
    c.add_argument("certificate")
    c.add_argument("--matrix", default=None, help="require the certificate to be about this matrix")
    c.add_argument("--json", action="store_true")
    c.set_defaults(fn=cmd_check)

    a = sub.add_parser("attack", help="measure a cheating prover")
    a.add_argument("name", choices=sorted(ATTACKS))
    a.add_argument("--trials", type=int, default=10_000)
    a.add_argument("--seed", type=int, default=42)
    a.add_argument("--instance-seed", type=int, default=20260815)
    a.add_argument("--modulus", type=int, default=101)
    a.add_argument("--json", action="store_true")
    a.set_defaults(fn=cmd_attack)

    b = sub.add_parser("bench", help="timing and communication volume")
    b.add_argument("--sizes", type=lambda s: [int(x) for x in s.split(",")],
                   default=[256, 512, 1024])
    b.add_argument("--modulus", type=int, default=DEFAULT_MODULUS)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--json", action="store_true")
    b.set_defaults(fn=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ProtocolAbort as exc:
        sys.stderr.write(f"aborted: {exc}\n")
        return EXIT_ABORT
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ABORT
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
