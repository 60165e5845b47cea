"""Prime field scalars and challenge sample sets.

Residues are plain Python ints in [0, p).  ``FieldElement`` wraps one residue
for operator-heavy scalar work; bulk linear algebra keeps raw residues in
numpy arrays (see ``rankcert.matrix``) and goes through ``PrimeField``'s
scalar methods only at pivots and dot-product tails.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterable


class FieldMismatchError(ValueError):
    """Two operands belong to different prime fields."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


# big enough for soundness demos, small enough that a laptop brute-forces
# nothing; also a Mersenne prime, which makes the examples easy to eyeball
DEFAULT_MODULUS = 131071


@dataclass(frozen=True)
class PrimeField:
    """Arithmetic mod a prime p, 2 <= p < 2**31.

    The upper bound keeps any product of two canonical residues inside a
    signed 64-bit integer, which the matrix layer relies on.
    """

    p: int

    def __post_init__(self) -> None:
        if not (2 <= self.p < 2**31):
            raise ValueError(f"modulus must satisfy 2 <= p < 2**31, got {self.p}")
        if not _is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")

    # scalar ops on raw residues ------------------------------------------

    def reduce(self, a: int) -> int:
        return a % self.p

    def add(self, a: int, b: int) -> int:
        s = a + b
        return s - self.p if s >= self.p else s

    def sub(self, a: int, b: int) -> int:
        d = a - b
        return d + self.p if d < 0 else d

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (self.p - a) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ValueError("inverse of zero")
        return pow(a, -1, self.p)

    def element(self, value: int) -> "FieldElement":
        return FieldElement(self, value % self.p)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"PrimeField({self.p})"


@dataclass(frozen=True)
class FieldElement:
    """A canonical residue tied to its field."""

    field: PrimeField
    value: int

    def __post_init__(self) -> None:
        if not (0 <= self.value < self.field.p):
            raise ValueError(f"residue {self.value} not canonical mod {self.field.p}")

    def _check(self, other: "FieldElement") -> None:
        if not isinstance(other, FieldElement):
            raise TypeError(f"expected FieldElement, got {type(other).__name__}")
        if other.field.p != self.field.p:
            raise FieldMismatchError(f"mixed moduli {self.field.p} and {other.field.p}")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.field, self.field.add(self.value, other.value))

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.field, self.field.sub(self.value, other.value))

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.field, self.field.mul(self.value, other.value))

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.field, self.field.neg(self.value))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.value))

    def __bool__(self) -> bool:
        return self.value != 0


# Challenge sampling -------------------------------------------------------

DrawBits = Callable[[], int]
"""Source of independent uniform 64-bit integers."""


@dataclass(frozen=True)
class SampleSet:
    """A subset of the field to draw challenges from: all residues minus
    an exclusion set.  ``star()`` removes zero (written S* elsewhere)."""

    field: PrimeField
    excluded: frozenset = dc_field(default_factory=frozenset)

    def __post_init__(self) -> None:
        for v in self.excluded:
            if not (0 <= v < self.field.p):
                raise ValueError(f"excluded value {v} outside field")
        if self.size < 1:
            raise ValueError("sample set is empty")

    @property
    def size(self) -> int:
        return self.field.p - len(self.excluded)

    def star(self) -> "SampleSet":
        return self.without(0)

    def without(self, *values: int) -> "SampleSet":
        extra = {v % self.field.p for v in values}
        return SampleSet(self.field, self.excluded | frozenset(extra))

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.field.p and v not in self.excluded

    def _nth(self, idx: int, skip: Iterable[int]) -> int:
        # idx-th allowed residue in increasing order; skip is sorted.
        v = idx
        for e in skip:
            if e <= v:
                v += 1
            else:
                break
        return v

    def draw(self, bits: DrawBits, forbid: Iterable[int] = ()) -> int:
        """Uniform draw via rejection sampling on 64-bit chunks.

        ``forbid`` adds per-draw exclusions (already-canonical residues).
        The same routine serves seeded interactive runs and hash-derived
        non-interactive challenges, so transcripts replay bit-exactly.
        """
        skip = sorted(self.excluded | {v % self.field.p for v in forbid})
        k = self.field.p - len(skip)
        if k < 1:
            raise ValueError("every residue excluded from draw")
        limit = (2**64 // k) * k
        while True:
            u = bits()
            if u < limit:
                return self._nth(u % k, skip)
