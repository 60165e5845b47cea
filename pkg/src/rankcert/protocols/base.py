"""Message-passing engine shared by all interactive protocols.

Both parties are explicit state machines that never call each other.  A
Channel delivers one message at a time, charges its cost to the meter,
appends it to the transcript, and absorbs prover bytes into the
challenge source so the hash-compiled mode sees exactly what the
interactive mode sent.

Turn order is enforced by the machines themselves: a message arriving
while the recipient still has a queued reply, or carrying the wrong
kind or round index, raises ProtocolOrderError.  That is an abort, a
third outcome distinct from accept and reject.
"""

from __future__ import annotations

import hashlib
import random
from collections import deque
from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterable, Optional

import numpy as np

from ..field import SampleSet


PROVER = "prover"
VERIFIER = "verifier"

PART_TAGS = {"field": 1, "perm": 2, "indices": 3, "flag": 4, "claim": 5}
PART_WIDTHS = {"field": 8, "perm": 4, "indices": 4, "flag": 1, "claim": 8}


class ProtocolAbort(Exception):
    """The run ended without reaching a verdict."""


class ProtocolOrderError(ProtocolAbort):
    """A message arrived out of the order the protocol fixes."""


class WitnessUnavailable(ProtocolAbort):
    """The honest prover cannot proceed: a pivot it relies on vanished."""


class MalformedCertificate(ProtocolAbort):
    """A serialized transcript failed structural validation."""


class EngineError(ProtocolAbort):
    """The two machines stalled or ran away; indicates a machine bug."""


@dataclass(frozen=True)
class Part:
    """One typed group of values inside a message.

    field: residues mod p, 8 bytes each on the wire
    perm:  permutation images, 4 bytes each
    indices: column or row indices, 4 bytes each
    flag:  single 0/1 byte
    claim: one 8-byte integer (a rank claim and the like)
    """

    tag: str
    values: tuple[int, ...]

    def __post_init__(self):
        if self.tag not in PART_TAGS:
            raise ValueError(f"unknown part tag {self.tag!r}")

    def encode(self) -> bytes:
        width = PART_WIDTHS[self.tag]
        out = bytearray()
        out.append(PART_TAGS[self.tag])
        out += len(self.values).to_bytes(4, "little")
        for v in self.values:
            out += int(v).to_bytes(width, "little")
        return bytes(out)


def field_part(values: Iterable[int]) -> Part:
    return Part("field", tuple(int(v) for v in values))


def perm_part(images: Iterable[int]) -> Part:
    return Part("perm", tuple(int(v) for v in images))


def indices_part(values: Iterable[int]) -> Part:
    return Part("indices", tuple(int(v) for v in values))


def flag_part(value: bool) -> Part:
    return Part("flag", (1 if value else 0,))


def claim_part(value: int) -> Part:
    return Part("claim", (int(value),))


@dataclass(frozen=True)
class Message:
    sender: str
    kind: Optional[str]
    index: Optional[int]
    parts: tuple[Part, ...]

    def encode_payload(self) -> bytes:
        return b"".join(part.encode() for part in self.parts)

    @property
    def field_count(self) -> int:
        return sum(len(p.values) for p in self.parts if p.tag == "field")

    @property
    def int_count(self) -> int:
        return sum(len(p.values) for p in self.parts if p.tag != "field")

    def shape(self) -> tuple[tuple[str, int], ...]:
        return tuple((p.tag, len(p.values)) for p in self.parts)

    def part(self, i: int = 0) -> Part:
        return self.parts[i]

    def vector(self, i: int = 0) -> np.ndarray:
        return np.array(self.parts[i].values, dtype=np.int64)


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: Optional[str] = None


@dataclass
class CostMeter:
    """Communication and verifier-work accounting.

    Field elements and plain integers (indices, permutation images,
    claims, flags) are counted separately, split by direction.  Verifier
    arithmetic is counted in field operations; every matrix-vector
    product also bumps a dedicated counter since the protocols are
    designed around how few of those the verifier needs.
    """

    field_elems_prover_to_verifier: int = 0
    field_elems_verifier_to_prover: int = 0
    integers_prover_to_verifier: int = 0
    integers_verifier_to_prover: int = 0
    messages: int = 0
    verifier_field_ops: int = 0
    verifier_matvecs: int = 0

    def count_message(self, msg: Message) -> None:
        self.messages += 1
        if msg.sender == PROVER:
            self.field_elems_prover_to_verifier += msg.field_count
            self.integers_prover_to_verifier += msg.int_count
        else:
            self.field_elems_verifier_to_prover += msg.field_count
            self.integers_verifier_to_prover += msg.int_count

    # the verifier charges itself through these three hooks
    def count_matvec(self, m: int, n: int) -> None:
        self.verifier_matvecs += 1
        self.verifier_field_ops += 2 * m * n - m

    def count_dot(self, k: int) -> None:
        if k:
            self.verifier_field_ops += 2 * k - 1

    def count_vector_op(self, k: int) -> None:
        self.verifier_field_ops += k

    @property
    def field_elems_total(self) -> int:
        return self.field_elems_prover_to_verifier + self.field_elems_verifier_to_prover

    @property
    def integers_total(self) -> int:
        return self.integers_prover_to_verifier + self.integers_verifier_to_prover

    @property
    def communication_total(self) -> int:
        return self.field_elems_total + self.integers_total


class ChallengeSource:
    """Where the verifier's random field elements come from."""

    def draw(self, sample_set: SampleSet, forbid: Iterable[int] = ()) -> int:
        raise NotImplementedError

    def draw_vector(
        self, sample_set: SampleSet, k: int, forbid: Iterable[int] = ()
    ) -> np.ndarray:
        return np.array([self.draw(sample_set, forbid) for _ in range(k)], dtype=np.int64)

    def absorb(self, frame: bytes) -> None:
        """Feed one prover frame into the source; no-op when interactive."""


class InteractiveChallenges(ChallengeSource):
    def __init__(self, seed):
        self.rng = seed if isinstance(seed, random.Random) else random.Random(seed)

    def draw(self, sample_set: SampleSet, forbid: Iterable[int] = ()) -> int:
        return sample_set.draw(lambda: self.rng.getrandbits(64), forbid)


class FiatShamirChallenges(ChallengeSource):
    """Deterministic challenges derived by hash-chaining prover frames.

    The state starts from a domain tag plus the instance header (which
    binds the protocol, the modulus, the dimensions and every matrix
    entry).  Each prover frame folds into the state; each draw expands
    the current state and a draw counter into as many 64-bit chunks as
    rejection sampling needs.
    """

    DOMAIN = b"RKC1-FS"

    def __init__(self, header: bytes):
        self._state = hashlib.sha256(self.DOMAIN + header).digest()
        self._counter = 0

    def absorb(self, frame: bytes) -> None:
        self._state = hashlib.sha256(self._state + b"\x01" + frame).digest()

    def draw(self, sample_set: SampleSet, forbid: Iterable[int] = ()) -> int:
        ctr = self._counter
        self._counter += 1
        seed = hashlib.sha256(
            self._state + b"\x02" + ctr.to_bytes(8, "little")
        ).digest()
        pool = seed
        pos = 0
        block = 0

        def bits() -> int:
            nonlocal pool, pos, block
            if pos + 8 > len(pool):
                block += 1
                pool = hashlib.sha256(seed + block.to_bytes(8, "little")).digest()
                pos = 0
            v = int.from_bytes(pool[pos : pos + 8], "little")
            pos += 8
            return v

        return sample_set.draw(bits, forbid)


class Channel:
    def __init__(self, meter: CostMeter, challenges: ChallengeSource):
        self.meter = meter
        self.challenges = challenges
        self.transcript: list[Message] = []

    def deliver(self, msg: Message, recipient: "Machine") -> None:
        self.meter.count_message(msg)
        self.transcript.append(msg)
        if msg.sender == PROVER:
            self.challenges.absorb(msg.encode_payload())
        recipient.receive(msg)


class Machine:
    """Base for both parties: an outbox plus a single expected message."""

    role = "machine"

    def __init__(self):
        self._outbox: deque[Message] = deque()
        self._expected = None  # (kind, index, shape, handler)

    def _send(self, kind: str, index: Optional[int], *parts: Part) -> None:
        self._outbox.append(Message(self.role, kind, index, tuple(parts)))

    def _await(
        self,
        kind: str,
        index: Optional[int],
        shape: Optional[tuple],
        handler: Callable[[Message], None],
    ) -> None:
        if self._expected is not None:
            raise EngineError("machine is already awaiting a message")
        self._expected = (kind, index, tuple(shape) if shape is not None else None, handler)

    def next_message(self) -> Optional[Message]:
        if self._outbox:
            return self._outbox.popleft()
        return None

    def receive(self, msg: Message) -> None:
        if self._outbox:
            raise ProtocolOrderError(
                "message delivered before the pending reply was sent"
            )
        if self._expected is None:
            raise ProtocolOrderError("message delivered to a party that expects none")
        kind, index, shape, handler = self._expected
        if msg.kind is not None and (msg.kind != kind or msg.index != index):
            raise ProtocolOrderError(
                f"expected {kind}[{index}], got {msg.kind}[{msg.index}]"
            )
        if shape is not None and msg.shape() != shape:
            raise MalformedCertificate(
                f"frame shape {msg.shape()} does not match expected {shape}"
            )
        self._expected = None
        handler(msg)


class VerifierMachine(Machine):
    role = VERIFIER

    def __init__(self, meter: CostMeter, challenges: ChallengeSource):
        super().__init__()
        self.meter = meter
        self.challenges = challenges
        self.done = False
        self.verdict: Optional[Verdict] = None
        self.result_value = None

    def _accept(self, value=None) -> None:
        self.result_value = value
        self.done = True
        self.verdict = Verdict(True)

    def _reject(self, reason: str) -> None:
        self.done = True
        self.verdict = Verdict(False, reason)


class ProverMachine(Machine):
    role = PROVER


MESSAGE_LIMIT = 1_000_000


def drive(prover: Machine, verifier: VerifierMachine, channel: Channel) -> Verdict:
    """Run one protocol to its verdict.

    The verifier gets priority so multi-message turns drain in order;
    the prover moves exactly when the verifier has nothing queued.
    """
    steps = 0
    while True:
        msg = verifier.next_message()
        recipient: Machine = prover
        if msg is None:
            if verifier.done:
                break
            msg = prover.next_message()
            recipient = verifier
        if msg is None:
            raise EngineError("both parties stalled before a verdict")
        channel.deliver(msg, recipient)
        steps += 1
        if steps > MESSAGE_LIMIT:
            raise EngineError("message limit exceeded")
    assert verifier.verdict is not None
    return verifier.verdict


@dataclass
class RunResult:
    verdict: Verdict
    value: object
    meter: CostMeter
    transcript: tuple[Message, ...]
    prologue: Optional["RunResult"] = None


def run_session(
    prover: Machine,
    verifier: VerifierMachine,
    channel: Channel,
) -> RunResult:
    verdict = drive(prover, verifier, channel)
    return RunResult(verdict, verifier.result_value, channel.meter, tuple(channel.transcript))
