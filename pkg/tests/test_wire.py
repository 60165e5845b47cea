"""Sealed certificates: byte format, replay, and tamper resistance."""

import hashlib
import random

import numpy as np
import pytest

from rankcert.bruteforce import oracle_crp, oracle_det, oracle_rpm
from rankcert.elimination import (
    random_grp_matrix,
    random_nonsingular,
    random_rank_deficient,
    random_unit_lower,
)
from rankcert.field import PrimeField
from rankcert.matrix import DenseMatrix
from rankcert.protocols.base import MalformedCertificate, ProtocolAbort
from rankcert.protocols.wire import (
    COMPANION_COUNT,
    PROTOCOL_IDS,
    ReplayProver,
    build_header,
    check,
    parse_header,
    seal,
    split_frames,
)

F = PrimeField(131071)
F101 = PrimeField(101)


def _instances(field, seed=11):
    r = random.Random(seed)
    a = random_nonsingular(field, 4, r)
    adef = random_rank_deficient(field, 5, 4, 2, r)
    agrp = random_grp_matrix(field, 4, r)
    b = DenseMatrix.random(field, 4, 3, r)
    t = random_unit_lower(field, 4, r)
    return {
        "freivalds": (a, b, a @ b),
        "rank-upper": (adef,),
        "rank-lower": (adef,),
        "tri-equiv-lower": (a, a @ t),
        "tri-equiv-upper": (a, a @ t.transpose()),
        "grp": (agrp,),
        "ldup": (a,),
        "det": (a,),
        "crp": (adef,),
        "rrp": (adef,),
        "rpm-inv": (a,),
        "rpm": (adef,),
    }


def test_every_protocol_round_trips_deterministically():
    for name, mats in _instances(F).items():
        blob1, sealed = seal(name, *mats)
        blob2, _ = seal(name, *mats)
        assert blob1 == blob2, name
        proto, parsed, replayed = check(blob1)
        assert proto == name
        assert parsed == mats
        assert replayed.verdict.accepted, (name, replayed.verdict.reason)
        assert replayed.value == sealed.value, name


def test_replay_pays_the_same_bill_as_the_interactive_run():
    for name, mats in _instances(F).items():
        blob, sealed = seal(name, *mats)
        _, _, replayed = check(blob)
        assert replayed.meter.communication_total == sealed.meter.communication_total
        assert replayed.meter.verifier_matvecs == sealed.meter.verifier_matvecs


def test_seal_refuses_false_statements():
    r = random.Random(3)
    a = random_nonsingular(F, 3, r)
    b = random_nonsingular(F, 3, r)
    wrong = (a @ b).array.copy()
    wrong[0, 0] = (wrong[0, 0] + 1) % F.p
    with pytest.raises(ValueError):
        seal("freivalds", a, b, DenseMatrix(F, wrong))


def test_header_layout_and_parse():
    a = DenseMatrix(F101, np.array([[1, 2], [3, 4]], dtype=np.int64))
    header = build_header("ldup", (a,))
    assert header[:4] == b"RKC1"
    assert header[4] == PROTOCOL_IDS["ldup"]
    assert int.from_bytes(header[5:13], "little") == 101
    proto, mats, pos = parse_header(header)
    assert proto == "ldup" and mats == (a,) and pos == len(header)


def test_companion_counts_are_enforced():
    a = DenseMatrix(F101, np.array([[1, 2], [3, 4]], dtype=np.int64))
    with pytest.raises(ValueError):
        build_header("freivalds", (a,))
    with pytest.raises(ValueError):
        build_header("ldup", (a, a))
    with pytest.raises(ValueError):
        build_header("no-such-protocol", (a,))


@pytest.mark.parametrize(
    "mutate",
    [
        lambda b: b"XKC1" + b[4:],                      # magic
        lambda b: b[:4] + bytes([99]) + b[5:],          # unknown protocol id
        lambda b: b[:5] + (100).to_bytes(8, "little") + b[13:],  # composite modulus
        lambda b: b[:40],                               # truncated entries
        lambda b: b + b"\x05",                          # dangling frame length
    ],
)
def test_structurally_broken_blobs_are_malformed(mutate):
    a = DenseMatrix(F101, np.array([[5, 1], [2, 3]], dtype=np.int64))
    blob, _ = seal("ldup", a)
    with pytest.raises(MalformedCertificate):
        check(mutate(blob))


def test_out_of_range_entry_is_malformed():
    a = DenseMatrix(F101, np.array([[5, 1], [2, 3]], dtype=np.int64))
    blob, _ = seal("ldup", a)
    # first matrix entry lives right after the 8-byte dims that follow the modulus
    pos = 13 + 8
    bad = blob[:pos] + (101).to_bytes(8, "little") + blob[pos + 8 :]
    with pytest.raises(MalformedCertificate):
        check(bad)


def test_trailing_frames_are_malformed():
    a = DenseMatrix(F101, np.array([[5, 1], [2, 3]], dtype=np.int64))
    blob, _ = seal("ldup", a)
    with pytest.raises(MalformedCertificate):
        check(blob + (0).to_bytes(4, "little"))


def test_every_single_byte_matters():
    """Exhaustive one-byte corruption of one small certificate: no
    mutation may be accepted."""
    a = DenseMatrix(F101, np.array([[0, 1, 2], [0, 2, 4], [3, 0, 1]], dtype=np.int64))
    blob, _ = seal("crp", a)
    outcomes = {"reject": 0, "abort": 0}
    for i in range(len(blob)):
        mutated = bytearray(blob)
        mutated[i] ^= 0x01
        try:
            _, _, res = check(bytes(mutated))
            assert not res.verdict.accepted, f"byte {i} accepted after mutation"
            outcomes["reject"] += 1
        except ProtocolAbort:
            outcomes["abort"] += 1
    assert outcomes["reject"] + outcomes["abort"] == len(blob)
    # both failure modes occur: value corruption rejects, structure corruption aborts
    assert outcomes["reject"] > 0 and outcomes["abort"] > 0


def test_frame_decoding_validates_residues():
    frames = split_frames(
        F101,
        (13).to_bytes(4, "little") + bytes([1]) + (1).to_bytes(4, "little") + (7).to_bytes(8, "little"),
        0,
    )
    assert len(frames) == 1 and frames[0][0].tag == "field" and frames[0][0].values == (7,)
    overflow = (13).to_bytes(4, "little") + bytes([1]) + (1).to_bytes(4, "little") + (101).to_bytes(8, "little")
    with pytest.raises(MalformedCertificate):
        split_frames(F101, overflow, 0)
    unknown_tag = (6).to_bytes(4, "little") + bytes([9]) + (0).to_bytes(4, "little") + b"\x00"
    with pytest.raises(MalformedCertificate):
        split_frames(F101, unknown_tag, 0)


def test_replay_prover_feeds_frames_in_order():
    replay = ReplayProver([(("x",),), (("y",),)])
    first = replay.next_message()
    assert first.kind is None and first.parts == (("x",),)
    assert replay.next_message().parts == (("y",),)
    assert replay.next_message() is None


# Golden fixtures: these pin the full byte format, including the hash
# derivation of the challenges.  If one of these moves, every certificate
# in the wild silently broke.

GOLDEN_DET = {
    "matrix": [[2, 7, 1], [8, 2, 8], [1, 8, 2]],
    "p": 101,
    "length": 237,
    "sha256": "810e4a09969779ecd039b8e52742383846873cb492359476329e85b4e40040c5",
    "value": 88,
}

GOLDEN_RPM = {
    "matrix": [[3, 0], [4, 9]],
    "p": 101,
    "length": 294,
    "sha256": "1a29af5c81c448efcd408316903514c9b1722b2b377488aca182ec8d7d3ca9ac",
}


def test_golden_det_certificate():
    f = PrimeField(GOLDEN_DET["p"])
    a = DenseMatrix(f, np.array(GOLDEN_DET["matrix"], dtype=np.int64))
    blob, sealed = seal("det", a)
    assert len(blob) == GOLDEN_DET["length"]
    assert hashlib.sha256(blob).hexdigest() == GOLDEN_DET["sha256"]
    assert sealed.value == GOLDEN_DET["value"] == oracle_det(a)
    assert blob[:4] == b"RKC1"
    _, _, replayed = check(blob)
    assert replayed.verdict.accepted and replayed.value == GOLDEN_DET["value"]


def test_golden_rpm_certificate():
    f = PrimeField(GOLDEN_RPM["p"])
    a = DenseMatrix(f, np.array(GOLDEN_RPM["matrix"], dtype=np.int64))
    blob, sealed = seal("rpm", a)
    assert len(blob) == GOLDEN_RPM["length"]
    assert hashlib.sha256(blob).hexdigest() == GOLDEN_RPM["sha256"]
    assert sealed.value == oracle_rpm(a)
