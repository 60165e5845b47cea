"""Triangular equivalence: is B = A.T for a unit triangular T?

The challenge vector goes out one entry per round and each response
entry must be computable from the entries revealed so far.  For a unit
lower triangular witness the rounds run with ascending coordinates, for
a unit upper triangular witness they run descending; either way a
response that needs a not-yet-revealed challenge entry is out of reach,
which is the whole soundness story.  The verifier finishes with one
matrix-vector product per side of the identity.
"""

from __future__ import annotations

import numpy as np

from ..elimination import InconsistentSystemError, solve_consistent
from ..field import SampleSet
from ..matrix import DenseMatrix, DimensionError, dot_mod
from .base import (
    Channel,
    ChallengeSource,
    CostMeter,
    Message,
    ProverMachine,
    RunResult,
    VerifierMachine,
    WitnessUnavailable,
    field_part,
    run_session,
)

VARIANTS = ("lower", "upper")


def find_unit_triangular_witness(
    a: DenseMatrix, b: DenseMatrix, variant: str
) -> DenseMatrix:
    """Unit triangular T with A.T = B, or WitnessUnavailable."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    if a.shape != b.shape:
        raise DimensionError("the two matrices must have equal shape")
    n = a.n
    t = np.zeros((n, n), dtype=np.int64)
    rows = tuple(range(a.m))
    for j in range(n):
        t[j, j] = 1
        # column j of T carries the combination giving column j of B
        others = tuple(k for k in range(j + 1, n)) if variant == "lower" else tuple(
            range(j)
        )
        rhs = (b.column(j) - a.column(j)) % a.field.p
        if not others:
            if np.any(rhs):
                raise WitnessUnavailable("no unit triangular witness")
            continue
        try:
            coeffs = solve_consistent(a.submatrix(rows, others), rhs)
        except InconsistentSystemError:
            raise WitnessUnavailable("no unit triangular witness") from None
        for k, col in enumerate(others):
            t[col, j] = coeffs[k]
    return DenseMatrix(a.field, t)


class TriangularEquivalenceProver(ProverMachine):
    def __init__(self, a: DenseMatrix, b: DenseMatrix, variant: str = "lower"):
        super().__init__()
        self.witness = find_unit_triangular_witness(a, b, variant)
        self.variant = variant
        self.n = a.n
        self.xs = np.zeros(self.n, dtype=np.int64)
        self.field = a.field
        self._await_round(0)

    def _coord(self, round_no: int) -> int:
        return round_no if self.variant == "lower" else self.n - 1 - round_no

    def _await_round(self, round_no: int) -> None:
        i = self._coord(round_no)
        self._await("tri-challenge", i, (("field", 1),), self._make_handler(round_no))

    def _make_handler(self, round_no: int):
        def handle(msg: Message) -> None:
            i = self._coord(round_no)
            self.xs[i] = msg.part().values[0]
            row = self.witness.array[i]
            if self.variant == "lower":
                y = dot_mod(self.field, row[: i + 1], self.xs[: i + 1])
            else:
                y = dot_mod(self.field, row[i:], self.xs[i:])
            self._send("tri-response", i, field_part((y,)))
            if round_no + 1 < self.n:
                self._await_round(round_no + 1)

        return handle


class TriangularEquivalenceVerifier(VerifierMachine):
    def __init__(
        self,
        a: DenseMatrix,
        b: DenseMatrix,
        sample_set: SampleSet,
        meter: CostMeter,
        challenges: ChallengeSource,
        variant: str = "lower",
    ):
        super().__init__(meter, challenges)
        if variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if a.shape != b.shape:
            raise DimensionError("the two matrices must have equal shape")
        self.a = a
        self.b = b
        self.sample_set = sample_set
        self.variant = variant
        self.n = a.n
        self.xs = np.zeros(self.n, dtype=np.int64)
        self.ys = np.zeros(self.n, dtype=np.int64)
        self._start_round(0)

    def _coord(self, round_no: int) -> int:
        return round_no if self.variant == "lower" else self.n - 1 - round_no

    def _start_round(self, round_no: int) -> None:
        i = self._coord(round_no)
        self.xs[i] = self.challenges.draw(self.sample_set)
        self._send("tri-challenge", i, field_part((self.xs[i],)))
        self._await("tri-response", i, (("field", 1),), self._make_handler(round_no))

    def _make_handler(self, round_no: int):
        def handle(msg: Message) -> None:
            i = self._coord(round_no)
            self.ys[i] = msg.part().values[0]
            if round_no + 1 < self.n:
                self._start_round(round_no + 1)
                return
            ay = self.a.matvec(self.ys, meter=self.meter)
            bx = self.b.matvec(self.xs, meter=self.meter)
            if np.array_equal(ay, bx):
                self._accept(True)
            else:
                self._reject("final-check")

        return handle


def run_tri_equiv(
    a: DenseMatrix,
    b: DenseMatrix,
    *,
    challenges: ChallengeSource,
    variant: str = "lower",
    sample_set: SampleSet | None = None,
    meter: CostMeter | None = None,
    prover: ProverMachine | None = None,
) -> RunResult:
    sample_set = sample_set or SampleSet(a.field)
    meter = meter or CostMeter()
    channel = Channel(meter, challenges)
    if prover is None:
        prover = TriangularEquivalenceProver(a, b, variant)
    verifier = TriangularEquivalenceVerifier(a, b, sample_set, meter, challenges, variant)
    return run_session(prover, verifier, channel)
