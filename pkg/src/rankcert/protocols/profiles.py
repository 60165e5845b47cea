"""Rank profile protocols.

Column rank profile: the prover names the pivot columns, proves they
are independent (the embedded rank lower bound), then must show that
every column left of pivot j reduces to a combination of earlier
pivots.  The verifier hides that whole family of claims inside one
random vector: it draws invertible per-column weights v, streams
coefficients x_r..x_1 downward, keeps x_0 to itself, and asks for the
combination coefficients row by row.  One final product A.z == 0 ties
it together.  Row rank profile is the same run on the transpose.

Invertible case: the rank profile matrix of a nonsingular matrix is a
permutation.  The prover commits to it together with the factorization
diagonal, answers an ascending stream against the permuted upper
factor (ascending order is what pins triangularity after conjugation),
and then the factorization protocol runs on the same commitment.  One
extra pair of dot products connects the stream to the factorization's
own final identity.

Full rank profile matrix: column profile, then row profile, then the
invertible-case protocol on the pivot crossing submatrix.
"""

from __future__ import annotations

from bisect import bisect_right

import numpy as np

from ..elimination import (
    SingularPivotError,
    ldup,
    lu_nopivot,
    pluq_crp,
    trsv_lower,
    trsv_upper,
)
from ..field import SampleSet
from ..matrix import (
    DenseMatrix,
    Diagonal,
    DimensionError,
    Permutation,
    RankProfileMatrix,
    dot_mod,
)
from .base import (
    Channel,
    ChallengeSource,
    CostMeter,
    Message,
    ProverMachine,
    RunResult,
    Verdict,
    VerifierMachine,
    WitnessUnavailable,
    field_part,
    indices_part,
    perm_part,
    run_session,
)
from .ldup import LdupProver, LdupVerifier
from .rank import RankLowerProver, RankLowerVerifier, valid_column_claim


# Column rank profile ----------------------------------------------------------


class ColumnClaimProver(ProverMachine):
    """Sends the profile claim and stops; used when independence of the
    claimed columns is already certified elsewhere."""

    def __init__(self, cols: tuple[int, ...]):
        super().__init__()
        self._send("col-claim", None, indices_part(cols))


class ColumnClaimVerifier(VerifierMachine):
    def __init__(self, a, sample_set, meter, challenges):
        super().__init__(meter, challenges)
        self.a = a
        self._await("col-claim", None, None, self._on_claim)

    def _on_claim(self, msg: Message) -> None:
        if len(msg.parts) != 1 or msg.parts[0].tag != "indices":
            self._reject("bad-indices")
            return
        cols = msg.parts[0].values
        if not valid_column_claim(cols, self.a.m, self.a.n):
            self._reject("bad-indices")
            return
        self._accept(cols)


class CrpStreamProver(ProverMachine):
    """Second half of the column profile run: solve for the reduction
    coefficients under the verifier's weights and stream them back."""

    def __init__(self, a: DenseMatrix, cols: tuple[int, ...]):
        super().__init__()
        self.a = a
        self.cols = tuple(int(c) for c in cols)
        self.r = len(self.cols)
        self.field = a.field
        self.xs = np.zeros(self.r + 1, dtype=np.int64)
        self.gamma: np.ndarray | None = None
        self._await("crp-mask", None, (("field", a.n),), self._on_mask)

    def _on_mask(self, msg: Message) -> None:
        v = msg.vector()
        self.gamma = self._solve_gamma(v)
        if self.r > 0:
            self._await_x(self.r)

    def _solve_gamma(self, v: np.ndarray) -> np.ndarray:
        """Strictly upper trapezoid with A_J . gamma = A . diag(v) . W."""
        p = self.field.p
        r, n = self.r, self.a.n
        gamma = np.zeros((r, r + 1), dtype=np.int64)
        if r == 0:
            return gamma
        fact = pluq_crp(self.a)
        rows = fact.pivot_rows()
        # crossing of the pivot rows and the claimed columns; for the honest
        # claim this square block has a generic profile, so prefix solves work
        square = self.a.submatrix(rows, self.cols)
        low, up = lu_nopivot(square)
        asub = self.a.submatrix(rows, tuple(range(n)))
        for j in range(1, r + 1):
            bound = self.cols[j] if j < r else n
            masked = np.where(np.arange(n) < bound, v, 0)
            rhs = asub.matvec(masked)[:j]
            lsub = DenseMatrix(self.field, low.array[:j, :j].copy())
            usub = DenseMatrix(self.field, up.array[:j, :j].copy())
            t = trsv_lower(lsub, rhs, unit=True)
            gamma[:j, j] = trsv_upper(usub, t)
        return gamma

    def _await_x(self, j: int) -> None:
        self._await("crp-x", j, (("field", 1),), self._x_handler(j))

    def _x_handler(self, j: int):
        def handle(msg: Message) -> None:
            self.xs[j] = msg.part().values[0]
            row = self.gamma[j - 1, j:]
            y = dot_mod(self.field, row, self.xs[j:])
            self._send("crp-y", j - 1, field_part((y,)))
            if j > 1:
                self._await_x(j - 1)

        return handle


class CrpStreamVerifier(VerifierMachine):
    def __init__(
        self,
        a: DenseMatrix,
        cols: tuple[int, ...],
        sample_set: SampleSet,
        meter: CostMeter,
        challenges: ChallengeSource,
    ):
        super().__init__(meter, challenges)
        self.a = a
        self.cols = tuple(int(c) for c in cols)
        self.r = len(self.cols)
        self.sample_set = sample_set
        self.v = challenges.draw_vector(sample_set.star(), a.n)
        self.xs = np.zeros(self.r + 1, dtype=np.int64)
        self.ys = np.zeros(max(self.r, 1), dtype=np.int64)
        self._send("crp-mask", None, field_part(self.v))
        if self.r > 0:
            self._start_round(self.r)
        else:
            self._final_check()

    def _start_round(self, j: int) -> None:
        self.xs[j] = self.challenges.draw(self.sample_set)
        self._send("crp-x", j, field_part((self.xs[j],)))
        self._await("crp-y", j - 1, (("field", 1),), self._y_handler(j))

    def _y_handler(self, j: int):
        def handle(msg: Message) -> None:
            self.ys[j - 1] = msg.part().values[0]
            if j > 1:
                self._start_round(j - 1)
            else:
                self._final_check()

        return handle

    def _final_check(self) -> None:
        p = self.a.field.p
        n = self.a.n
        # the coefficient for the rank-zero column never leaves this machine
        self.xs[0] = self.challenges.draw(self.sample_set)
        suffix = np.zeros(self.r + 2, dtype=np.int64)
        for k in range(self.r, -1, -1):
            suffix[k] = (suffix[k + 1] + self.xs[k]) % p
        self.meter.count_vector_op(self.r + 1)
        counts = np.array([bisect_right(self.cols, i) for i in range(n)])
        z = (self.v * suffix[counts]) % p
        self.meter.count_vector_op(n)
        if self.r:
            z[list(self.cols)] = (z[list(self.cols)] - self.ys[: self.r]) % p
            self.meter.count_vector_op(self.r)
        az = self.a.matvec(z, meter=self.meter)
        if np.any(az):
            self._reject("final-check")
        else:
            self._accept(self.cols)


def run_crp(
    a: DenseMatrix,
    *,
    challenges: ChallengeSource,
    claimed_cols: tuple[int, ...] | None = None,
    sample_set: SampleSet | None = None,
    meter: CostMeter | None = None,
    channel: Channel | None = None,
    include_lower_rank: bool = True,
    prover_factory=None,
) -> RunResult:
    """Certify the column rank profile of A.

    prover_factory, when given, maps a phase name ("claim" or "stream")
    to a prover machine; adversarial runs use it to substitute one side.
    """
    sample_set = sample_set or SampleSet(a.field)
    meter = meter or CostMeter()
    if channel is None:
        channel = Channel(meter, challenges)
    if claimed_cols is None:
        claimed_cols = pluq_crp(a).pivot_cols()

    def make(phase: str, default):
        if prover_factory is not None:
            made = prover_factory(phase)
            if made is not None:
                return made
        return default()

    if include_lower_rank:
        claim_prover = make("claim", lambda: RankLowerProver(a, claimed_cols))
        claim_verifier = RankLowerVerifier(a, sample_set, meter, challenges)
    else:
        claim_prover = make("claim", lambda: ColumnClaimProver(claimed_cols))
        claim_verifier = ColumnClaimVerifier(a, sample_set, meter, challenges)
    first = run_session(claim_prover, claim_verifier, channel)
    if not first.verdict.accepted:
        return RunResult(first.verdict, None, meter, tuple(channel.transcript))
    cols = first.value

    stream_prover = make("stream", lambda: CrpStreamProver(a, cols))
    stream_verifier = CrpStreamVerifier(a, cols, sample_set, meter, challenges)
    second = run_session(stream_prover, stream_verifier, channel)
    return RunResult(second.verdict, second.value, meter, tuple(channel.transcript))


def run_rrp(
    a: DenseMatrix,
    *,
    challenges: ChallengeSource,
    claimed_rows: tuple[int, ...] | None = None,
    sample_set: SampleSet | None = None,
    meter: CostMeter | None = None,
    channel: Channel | None = None,
    include_lower_rank: bool = True,
    prover_factory=None,
) -> RunResult:
    """Row rank profile: the column protocol on the transpose."""
    return run_crp(
        a.transpose(),
        challenges=challenges,
        claimed_cols=claimed_rows,
        sample_set=sample_set,
        meter=meter,
        channel=channel,
        include_lower_rank=include_lower_rank,
        prover_factory=prover_factory,
    )


# Invertible case ----------------------------------------------------------------


class RpmInvertibleProver(ProverMachine):
    def __init__(self, a: DenseMatrix):
        super().__init__()
        if a.m != a.n:
            raise DimensionError("this protocol needs a square matrix")
        try:
            fact = ldup(a)
        except SingularPivotError:
            raise WitnessUnavailable("matrix is singular") from None
        self.fact = fact
        self.field = a.field
        self.n = a.n
        self.a = a
        # U = D . U1, conjugated by the committed permutation
        u = (fact.diag.matrix() @ fact.upper).array
        img = fact.perm.images
        self.ubar = np.array(
            [[u[img[k], img[i]] for i in range(self.n)] for k in range(self.n)],
            dtype=np.int64,
        )
        self.es = np.zeros(self.n, dtype=np.int64)
        self.inner: LdupProver | None = None
        self._send(
            "ldup-commit",
            None,
            perm_part(fact.perm.images),
            field_part(fact.diag.entries),
        )
        self._await_e(0)

    def _await_e(self, i: int) -> None:
        self._await("rpm-e", i, (("field", 1),), self._e_handler(i))

    def _e_handler(self, i: int):
        def handle(msg: Message) -> None:
            self.es[i] = msg.part().values[0]
            f = dot_mod(self.field, self.es[: i + 1], self.ubar[: i + 1, i])
            self._send("rpm-f", i, field_part((f,)))
            if i + 1 < self.n:
                self._await_e(i + 1)
            else:
                self.inner = LdupProver(self.a, emit_commit=False, fact=self.fact)

        return handle

    def next_message(self):
        own = super().next_message()
        if own is not None:
            return own
        if self.inner is not None:
            return self.inner.next_message()
        return None

    def receive(self, msg: Message) -> None:
        if self.inner is None or self._outbox or self._expected is not None:
            super().receive(msg)
            return
        self.inner.receive(msg)


class RpmInvertibleVerifier(VerifierMachine):
    def __init__(
        self,
        a: DenseMatrix,
        sample_set: SampleSet,
        meter: CostMeter,
        challenges: ChallengeSource,
    ):
        super().__init__(meter, challenges)
        if a.m != a.n:
            raise DimensionError("this protocol needs a square matrix")
        self.a = a
        self.sample_set = sample_set
        self.n = a.n
        self.perm: Permutation | None = None
        self.diag: Diagonal | None = None
        self.es = np.zeros(self.n, dtype=np.int64)
        self.fs = np.zeros(self.n, dtype=np.int64)
        self.inner: LdupVerifier | None = None
        self._await(
            "ldup-commit",
            None,
            (("perm", self.n), ("field", self.n)),
            self._on_commit,
        )

    def _on_commit(self, msg: Message) -> None:
        if len(msg.parts) != 2:
            self._reject("bad-commit")
            return
        images, dvals = msg.parts[0].values, msg.parts[1].values
        if sorted(images) != list(range(self.n)):
            self._reject("not-a-permutation")
            return
        p = self.a.field.p
        if len(dvals) != self.n or any(not 0 < v < p for v in dvals):
            self._reject("d-not-invertible")
            return
        self.perm = Permutation(images)
        self.diag = Diagonal(self.a.field, dvals)
        self._start_e(0)

    def _start_e(self, i: int) -> None:
        self.es[i] = self.challenges.draw(self.sample_set)
        self._send("rpm-e", i, field_part((self.es[i],)))
        self._await("rpm-f", i, (("field", 1),), self._f_handler(i))

    def _f_handler(self, i: int):
        def handle(msg: Message) -> None:
            self.fs[i] = msg.part().values[0]
            if i + 1 < self.n:
                self._start_e(i + 1)
                return
            self.inner = LdupVerifier(
                self.a,
                self.sample_set,
                self.meter,
                self.challenges,
                external_commit=(self.perm, self.diag),
            )
            self._sync_inner()

        return handle

    def next_message(self):
        own = super().next_message()
        if own is not None:
            return own
        if self.inner is not None:
            return self.inner.next_message()
        return None

    def receive(self, msg: Message) -> None:
        if self.inner is None:
            super().receive(msg)
            return
        self.inner.receive(msg)
        self._sync_inner()

    def _sync_inner(self) -> None:
        assert self.inner is not None
        if not self.inner.done:
            return
        verdict = self.inner.verdict
        assert verdict is not None
        if not verdict.accepted:
            self.done = True
            self.verdict = verdict
            return
        data = self.inner.final_data
        f = self.a.field
        lhs = dot_mod(f, self.es, self.perm.apply_inverse_to_vector(data["dx"]))
        rhs = dot_mod(f, self.fs, self.perm.apply_inverse_to_vector(data["phi"]))
        self.meter.count_dot(self.n)
        self.meter.count_dot(self.n)
        if lhs == rhs:
            self._accept(self.perm)
        else:
            self._reject("profile-check")


def run_rpm_invertible(
    a: DenseMatrix,
    *,
    challenges: ChallengeSource,
    sample_set: SampleSet | None = None,
    meter: CostMeter | None = None,
    channel: Channel | None = None,
    prover: ProverMachine | None = None,
) -> RunResult:
    sample_set = sample_set or SampleSet(a.field)
    meter = meter or CostMeter()
    if channel is None:
        channel = Channel(meter, challenges)
    if prover is None:
        prover = RpmInvertibleProver(a)
    verifier = RpmInvertibleVerifier(a, sample_set, meter, challenges)
    return run_session(prover, verifier, channel)


# Full rank profile matrix -------------------------------------------------------


def run_rpm(
    a: DenseMatrix,
    *,
    challenges: ChallengeSource,
    sample_set: SampleSet | None = None,
    meter: CostMeter | None = None,
    prover_factories: dict | None = None,
) -> RunResult:
    """Certify the full rank profile matrix of A.

    Three sequential certified runs share one channel, one meter and one
    challenge stream: column profile (with the independence check), row
    profile (independence implied by equal rank), and the invertible
    case on the pivot crossing.  prover_factories, when given, may carry
    "crp", "rrp" and "rpm-inv" entries to substitute prover machines.
    """
    sample_set = sample_set or SampleSet(a.field)
    meter = meter or CostMeter()
    channel = Channel(meter, challenges)
    factories = prover_factories or {}

    col_run = run_crp(
        a,
        challenges=challenges,
        sample_set=sample_set,
        meter=meter,
        channel=channel,
        include_lower_rank=True,
        prover_factory=factories.get("crp"),
    )
    if not col_run.verdict.accepted:
        return RunResult(col_run.verdict, None, meter, tuple(channel.transcript))
    cols = col_run.value

    row_run = run_rrp(
        a,
        challenges=challenges,
        sample_set=sample_set,
        meter=meter,
        channel=channel,
        include_lower_rank=False,
        prover_factory=factories.get("rrp"),
    )
    if not row_run.verdict.accepted:
        return RunResult(row_run.verdict, None, meter, tuple(channel.transcript))
    rows = row_run.value

    if len(rows) != len(cols):
        return RunResult(
            Verdict(False, "rank-mismatch"), None, meter, tuple(channel.transcript)
        )
    r = len(cols)
    if r == 0:
        rpm = RankProfileMatrix(a.m, a.n, ())
        return RunResult(Verdict(True), rpm, meter, tuple(channel.transcript))

    crossing = a.submatrix(rows, cols)
    factory = factories.get("rpm-inv")
    sub_prover = factory(crossing) if factory is not None else None
    inv_run = run_rpm_invertible(
        crossing,
        challenges=challenges,
        sample_set=sample_set,
        meter=meter,
        channel=channel,
        prover=sub_prover,
    )
    if not inv_run.verdict.accepted:
        return RunResult(inv_run.verdict, None, meter, tuple(channel.transcript))
    perm: Permutation = inv_run.value
    positions = tuple((rows[perm(j)], cols[j]) for j in range(r))
    rpm = RankProfileMatrix(a.m, a.n, positions)
    return RunResult(Verdict(True), rpm, meter, tuple(channel.transcript))
