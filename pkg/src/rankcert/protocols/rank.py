"""Rank bounds in both directions.

Upper bound: the prover claims rank(A) <= r.  The verifier sends w = Av
for random v and the prover must return a vector of Hamming weight at
most r with the same image.  Two matrix-vector products, no secrets.

Lower bound: the prover names r columns it says are independent.  The
verifier hides random nonzero coefficients on exactly those columns,
sends the combination, and the prover must recover the coefficients.
Dependent columns leave the coefficients statistically ambiguous.
"""

from __future__ import annotations

import numpy as np

from ..elimination import pluq_crp, solve_on_columns
from ..field import SampleSet
from ..matrix import DenseMatrix
from .base import (
    Channel,
    ChallengeSource,
    CostMeter,
    Message,
    ProverMachine,
    RunResult,
    VerifierMachine,
    claim_part,
    field_part,
    indices_part,
    run_session,
)


# Upper bound -----------------------------------------------------------------


class RankUpperProver(ProverMachine):
    def __init__(self, a: DenseMatrix, claimed_rank: int | None = None):
        super().__init__()
        self.a = a
        self.fact = pluq_crp(a)
        self.claim = self.fact.r if claimed_rank is None else claimed_rank
        self._send("rank-upper-claim", None, claim_part(self.claim))
        self._await("rank-upper-image", None, (("field", a.m),), self._on_image)

    def _on_image(self, msg: Message) -> None:
        w = msg.vector()
        cols = self.fact.pivot_cols()
        beta = solve_on_columns(self.a, cols, w)
        gamma = np.zeros(self.a.n, dtype=np.int64)
        gamma[list(cols)] = beta
        self._send("rank-upper-witness", None, field_part(gamma))


class RankUpperVerifier(VerifierMachine):
    def __init__(
        self,
        a: DenseMatrix,
        sample_set: SampleSet,
        meter: CostMeter,
        challenges: ChallengeSource,
        require_claim_at_most: int | None = None,
    ):
        super().__init__(meter, challenges)
        self.a = a
        self.sample_set = sample_set
        self.require_claim_at_most = require_claim_at_most
        self.claim = None
        self.w = None
        self._await("rank-upper-claim", None, (("claim", 1),), self._on_claim)

    def _on_claim(self, msg: Message) -> None:
        claim = msg.part().values[0]
        if claim < 0 or claim > min(self.a.m, self.a.n):
            self._reject("bad-rank-claim")
            return
        if self.require_claim_at_most is not None and claim > self.require_claim_at_most:
            self._reject("rank-claim-too-high")
            return
        self.claim = claim
        v = self.challenges.draw_vector(self.sample_set, self.a.n)
        self.w = self.a.matvec(v, meter=self.meter)
        self._send("rank-upper-image", None, field_part(self.w))
        self._await(
            "rank-upper-witness", None, (("field", self.a.n),), self._on_witness
        )

    def _on_witness(self, msg: Message) -> None:
        gamma = msg.vector()
        if int(np.count_nonzero(gamma)) > self.claim:
            self._reject("hamming-weight")
            return
        if np.array_equal(self.a.matvec(gamma, meter=self.meter), self.w):
            self._accept(self.claim)
        else:
            self._reject("final-check")


def run_rank_upper(
    a: DenseMatrix,
    *,
    challenges: ChallengeSource,
    claimed_rank: int | None = None,
    sample_set: SampleSet | None = None,
    meter: CostMeter | None = None,
    prover: ProverMachine | None = None,
) -> RunResult:
    sample_set = sample_set or SampleSet(a.field)
    meter = meter or CostMeter()
    channel = Channel(meter, challenges)
    if prover is None:
        prover = RankUpperProver(a, claimed_rank)
    verifier = RankUpperVerifier(a, sample_set, meter, challenges)
    return run_session(prover, verifier, channel)


# Lower bound -----------------------------------------------------------------


class RankLowerProver(ProverMachine):
    def __init__(self, a: DenseMatrix, claimed_cols: tuple[int, ...] | None = None):
        super().__init__()
        self.a = a
        if claimed_cols is None:
            claimed_cols = pluq_crp(a).pivot_cols()
        self.cols = tuple(int(c) for c in claimed_cols)
        self._send("col-claim", None, indices_part(self.cols))
        self._await(
            "rank-lower-combination", None, (("field", a.m),), self._on_combination
        )

    def _on_combination(self, msg: Message) -> None:
        v = msg.vector()
        beta = solve_on_columns(self.a, self.cols, v)
        self._send("rank-lower-coefficients", None, field_part(beta))


class RankLowerVerifier(VerifierMachine):
    def __init__(
        self,
        a: DenseMatrix,
        sample_set: SampleSet,
        meter: CostMeter,
        challenges: ChallengeSource,
    ):
        super().__init__(meter, challenges)
        self.a = a
        self.sample_set = sample_set
        self.cols: tuple[int, ...] = ()
        self.alpha_on_cols = None
        self._await("col-claim", None, None, self._on_claim)

    def _on_claim(self, msg: Message) -> None:
        if len(msg.parts) != 1 or msg.parts[0].tag != "indices":
            self._reject("bad-indices")
            return
        cols = msg.parts[0].values
        if not valid_column_claim(cols, self.a.m, self.a.n):
            self._reject("bad-indices")
            return
        self.cols = cols
        star = self.sample_set.star()
        self.alpha_on_cols = self.challenges.draw_vector(star, len(cols))
        alpha = np.zeros(self.a.n, dtype=np.int64)
        alpha[list(cols)] = self.alpha_on_cols
        v = self.a.matvec(alpha, meter=self.meter)
        self._send("rank-lower-combination", None, field_part(v))
        self._await(
            "rank-lower-coefficients",
            None,
            (("field", len(cols)),),
            self._on_coefficients,
        )

    def _on_coefficients(self, msg: Message) -> None:
        beta = msg.vector()
        if np.array_equal(beta, self.alpha_on_cols):
            self._accept(self.cols)
        else:
            self._reject("alpha-mismatch")


def valid_column_claim(cols: tuple[int, ...], m: int, n: int) -> bool:
    if len(cols) > min(m, n):
        return False
    if any(c < 0 or c >= n for c in cols):
        return False
    return all(a < b for a, b in zip(cols, cols[1:]))


def run_rank_lower(
    a: DenseMatrix,
    *,
    challenges: ChallengeSource,
    claimed_cols: tuple[int, ...] | None = None,
    sample_set: SampleSet | None = None,
    meter: CostMeter | None = None,
    prover: ProverMachine | None = None,
) -> RunResult:
    sample_set = sample_set or SampleSet(a.field)
    meter = meter or CostMeter()
    channel = Channel(meter, challenges)
    if prover is None:
        prover = RankLowerProver(a, claimed_cols)
    verifier = RankLowerVerifier(a, sample_set, meter, challenges)
    return run_session(prover, verifier, channel)
