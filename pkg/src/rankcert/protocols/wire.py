"""Serialized certificates: the hash-compiled non-interactive mode.

A certificate is the instance header followed by the prover's frames in
protocol order.  Challenges are re-derived by hashing the header and
the frames as they are replayed, so the bytes in the file are the only
thing a checker needs; any flipped byte either breaks parsing (abort)
or lands in a frame or the header, changing the challenge stream or the
final identity (reject).

Header layout: magic, protocol id, modulus, then each matrix the
protocol binds (dimensions then row-major entries).  Frames carry a
4-byte length followed by the typed parts encoding used on the channel.
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Optional

import numpy as np

from ..field import PrimeField
from ..matrix import DenseMatrix
from .base import (
    Channel,
    CostMeter,
    FiatShamirChallenges,
    MalformedCertificate,
    Message,
    PART_TAGS,
    PART_WIDTHS,
    Part,
    PROVER,
    ProtocolAbort,
    ProverMachine,
    RunResult,
)
from .equivalence import run_tri_equiv
from .freivalds import run_freivalds
from .grp import run_grp
from .ldup import run_det, run_ldup
from .profiles import run_crp, run_rpm, run_rpm_invertible, run_rrp
from .rank import run_rank_lower, run_rank_upper

MAGIC = b"RKC1"

PROTOCOL_IDS = {
    "freivalds": 1,
    "rank-upper": 2,
    "rank-lower": 3,
    "tri-equiv-lower": 4,
    "tri-equiv-upper": 5,
    "grp": 6,
    "ldup": 7,
    "det": 8,
    "crp": 9,
    "rrp": 10,
    "rpm-inv": 11,
    "rpm": 12,
}
ID_NAMES = {v: k for k, v in PROTOCOL_IDS.items()}

# how many matrices beyond the principal one each protocol binds
COMPANION_COUNT = {
    "freivalds": 2,
    "tri-equiv-lower": 1,
    "tri-equiv-upper": 1,
}


def _encode_matrix(mat: DenseMatrix) -> bytes:
    out = bytearray()
    out += mat.m.to_bytes(4, "little")
    out += mat.n.to_bytes(4, "little")
    for v in mat.array.reshape(-1):
        out += int(v).to_bytes(8, "little")
    return bytes(out)


def _decode_matrix(field: PrimeField, blob: bytes, pos: int) -> tuple[DenseMatrix, int]:
    if pos + 8 > len(blob):
        raise MalformedCertificate("truncated matrix header")
    m = int.from_bytes(blob[pos : pos + 4], "little")
    n = int.from_bytes(blob[pos + 4 : pos + 8], "little")
    pos += 8
    if m < 1 or n < 1 or m > 1 << 20 or n > 1 << 20:
        raise MalformedCertificate("implausible matrix dimensions")
    need = 8 * m * n
    if pos + need > len(blob):
        raise MalformedCertificate("truncated matrix entries")
    vals = np.frombuffer(blob[pos : pos + need], dtype="<i8").astype(np.int64)
    pos += need
    if vals.size and (vals.min() < 0 or vals.max() >= field.p):
        raise MalformedCertificate("matrix entry out of range")
    return DenseMatrix(field, vals.reshape(m, n)), pos


def build_header(protocol: str, matrices: tuple[DenseMatrix, ...]) -> bytes:
    if protocol not in PROTOCOL_IDS:
        raise ValueError(f"unknown protocol {protocol!r}")
    want = 1 + COMPANION_COUNT.get(protocol, 0)
    if len(matrices) != want:
        raise ValueError(f"{protocol} binds {want} matrices, got {len(matrices)}")
    out = bytearray(MAGIC)
    out.append(PROTOCOL_IDS[protocol])
    out += matrices[0].field.p.to_bytes(8, "little")
    for mat in matrices:
        out += _encode_matrix(mat)
    return bytes(out)


def parse_header(blob: bytes) -> tuple[str, tuple[DenseMatrix, ...], int]:
    if blob[:4] != MAGIC:
        raise MalformedCertificate("bad magic")
    if len(blob) < 13:
        raise MalformedCertificate("truncated header")
    proto_id = blob[4]
    if proto_id not in ID_NAMES:
        raise MalformedCertificate(f"unknown protocol id {proto_id}")
    protocol = ID_NAMES[proto_id]
    p = int.from_bytes(blob[5:13], "little")
    try:
        field = PrimeField(p)
    except ValueError as exc:
        raise MalformedCertificate(f"bad modulus: {exc}") from None
    pos = 13
    mats = []
    for _ in range(1 + COMPANION_COUNT.get(protocol, 0)):
        mat, pos = _decode_matrix(field, blob, pos)
        mats.append(mat)
    return protocol, tuple(mats), pos


TAG_NAMES = {v: k for k, v in PART_TAGS.items()}


def _decode_frame(field: PrimeField, payload: bytes) -> tuple[Part, ...]:
    parts = []
    pos = 0
    while pos < len(payload):
        tag_byte = payload[pos]
        if tag_byte not in TAG_NAMES:
            raise MalformedCertificate(f"unknown part tag {tag_byte}")
        tag = TAG_NAMES[tag_byte]
        pos += 1
        if pos + 4 > len(payload):
            raise MalformedCertificate("truncated part count")
        count = int.from_bytes(payload[pos : pos + 4], "little")
        pos += 4
        width = PART_WIDTHS[tag]
        need = width * count
        if pos + need > len(payload):
            raise MalformedCertificate("truncated part values")
        values = tuple(
            int.from_bytes(payload[pos + k * width : pos + (k + 1) * width], "little")
            for k in range(count)
        )
        pos += need
        if tag == "field" and any(v >= field.p for v in values):
            raise MalformedCertificate("field element out of range")
        if tag == "flag" and any(v > 1 for v in values):
            raise MalformedCertificate("flag out of range")
        parts.append(Part(tag, values))
    return tuple(parts)


def split_frames(field: PrimeField, blob: bytes, pos: int) -> list[tuple[Part, ...]]:
    frames = []
    while pos < len(blob):
        if pos + 4 > len(blob):
            raise MalformedCertificate("truncated frame length")
        length = int.from_bytes(blob[pos : pos + 4], "little")
        pos += 4
        if pos + length > len(blob):
            raise MalformedCertificate("truncated frame")
        frames.append(_decode_frame(field, blob[pos : pos + length]))
        pos += length
    return frames


class ReplayProver(ProverMachine):
    """Feeds recorded frames back through the engine, one per turn."""

    def __init__(self, frames: list[tuple[Part, ...]]):
        super().__init__()
        self.frames = deque(frames)

    def next_message(self) -> Optional[Message]:
        if self.frames:
            return Message(PROVER, None, None, self.frames.popleft())
        return None

    def receive(self, msg: Message) -> None:
        # challenges are implicit in the hash chain; nothing to do
        return


RunnerType = Callable[..., RunResult]


def _runner(protocol: str) -> RunnerType:
    if protocol == "freivalds":
        return lambda mats, ch, prover: run_freivalds(mats[0], mats[1], mats[2], challenges=ch)
    if protocol == "rank-upper":
        return lambda mats, ch, prover: run_rank_upper(mats[0], challenges=ch, prover=prover)
    if protocol == "rank-lower":
        return lambda mats, ch, prover: run_rank_lower(mats[0], challenges=ch, prover=prover)
    if protocol == "tri-equiv-lower":
        return lambda mats, ch, prover: run_tri_equiv(
            mats[0], mats[1], challenges=ch, variant="lower", prover=prover
        )
    if protocol == "tri-equiv-upper":
        return lambda mats, ch, prover: run_tri_equiv(
            mats[0], mats[1], challenges=ch, variant="upper", prover=prover
        )
    if protocol == "grp":
        return lambda mats, ch, prover: run_grp(mats[0], challenges=ch, prover=prover)
    if protocol == "ldup":
        return lambda mats, ch, prover: run_ldup(mats[0], challenges=ch, prover=prover)
    if protocol == "det":
        return lambda mats, ch, prover: run_det(mats[0], challenges=ch, prover=prover)
    if protocol == "crp":
        return lambda mats, ch, prover: run_crp(
            mats[0],
            challenges=ch,
            prover_factory=None if prover is None else (lambda phase: prover),
        )
    if protocol == "rrp":
        return lambda mats, ch, prover: run_rrp(
            mats[0],
            challenges=ch,
            prover_factory=None if prover is None else (lambda phase: prover),
        )
    if protocol == "rpm-inv":
        return lambda mats, ch, prover: run_rpm_invertible(mats[0], challenges=ch, prover=prover)
    if protocol == "rpm":
        return lambda mats, ch, prover: run_rpm(
            mats[0],
            challenges=ch,
            prover_factories=None
            if prover is None
            else {
                "crp": lambda phase: prover,
                "rrp": lambda phase: prover,
                "rpm-inv": lambda crossing: prover,
            },
        )
    raise ValueError(f"unknown protocol {protocol!r}")


# public name; the CLI drives interactive runs through the same dispatch
runner = _runner


def seal(protocol: str, *matrices: DenseMatrix) -> tuple[bytes, RunResult]:
    """Run the honest prover non-interactively and serialize its frames."""
    header = build_header(protocol, matrices)
    challenges = FiatShamirChallenges(header)
    result = _runner(protocol)(matrices, challenges, None)
    if not result.verdict.accepted:
        raise ValueError(
            f"honest run was rejected ({result.verdict.reason}); nothing to seal"
        )
    frames = [
        m.encode_payload()
        for m in _all_transcripts(result)
        if m.sender == PROVER
    ]
    blob = header + b"".join(
        len(f).to_bytes(4, "little") + f for f in frames
    )
    return blob, result


def _all_transcripts(result: RunResult):
    if result.prologue is not None:
        yield from result.prologue.transcript
    yield from result.transcript


def check(blob: bytes) -> tuple[str, tuple[DenseMatrix, ...], RunResult]:
    """Re-derive the challenges and replay a serialized certificate."""
    protocol, matrices, pos = parse_header(blob)
    frames = split_frames(matrices[0].field, blob, pos)
    challenges = FiatShamirChallenges(blob[:pos])
    replay = ReplayProver(frames)
    try:
        result = _runner(protocol)(matrices, challenges, replay)
    except ProtocolAbort:
        raise
    except (ValueError, IndexError) as exc:
        # a blob can parse and still bind an impossible statement or carry
        # claims the verifier's own constructors refuse: wrong shape for the
        # protocol, repeated permutation images, index claims past the edge
        raise MalformedCertificate(f"certificate contradicts itself: {exc}") from exc
    if result.verdict.accepted and replay.frames:
        raise MalformedCertificate("certificate has trailing frames")
    return protocol, matrices, result
