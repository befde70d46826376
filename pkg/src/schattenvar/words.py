"""Words 2^r s_{i_0} ... s_{i_l} with merge (oplus) and concatenate (otimes).

Letters keep construction order because oplus merges the last letter of the
left word into the first letter of the right one. Equality and hashing use the
sorted multiset, since evaluation ignores letter order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InputError, RangeError
from .spectrum import TracePowerTable


@dataclass(frozen=True, eq=False)
class Word:
    r: int
    letters: tuple[int, ...]

    def __post_init__(self):
        if self.r < 0:
            raise InputError("word exponent must be non-negative")
        if not self.letters:
            raise InputError("a word needs at least one letter")
        if any(i < 0 for i in self.letters):
            raise InputError("letter indices must be non-negative")

    @classmethod
    def letter(cls, i: int) -> "Word":
        return cls(0, (i,))

    def key(self) -> tuple[int, tuple[int, ...]]:
        return self.r, tuple(sorted(self.letters))

    def __eq__(self, other):
        if not isinstance(other, Word):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        body = " ".join(f"s_{i}" for i in self.letters)
        return f"{2 ** self.r}*{body}" if self.r else body


def oplus(w: Word, v: Word) -> Word:
    merged = w.letters[-1] + v.letters[0]
    return Word(w.r + v.r + 1, w.letters[:-1] + (merged,) + v.letters[1:])


def otimes(w: Word, v: Word) -> Word:
    return Word(w.r + v.r, w.letters + v.letters)


def eval_word(w: Word, t: TracePowerTable) -> float:
    for i in w.letters:
        if i > t.k_max:
            raise RangeError(f"letter s_{i} exceeds trace table k_max={t.k_max}")
    return math.ldexp(math.prod(t[i] for i in w.letters), w.r)


def build_word(letters: Sequence[int], mask: int) -> Word:
    """Left-associated word for one assignment; bit j of mask puts oplus in slot j."""
    w = Word.letter(letters[0])
    for j, a in enumerate(letters[1:]):
        nxt = Word.letter(a)
        w = oplus(w, nxt) if (mask >> j) & 1 else otimes(w, nxt)
    return w


def star_words(letters: Sequence[int]) -> list[Word]:
    if not letters:
        raise InputError("star sum needs at least one letter")
    q = len(letters) - 1
    return [build_word(letters, mask) for mask in range(1 << q)]


def star_sum(letters: Sequence[int], t: TracePowerTable) -> float:
    """Sum of Eval over all 2^q choices of oplus/otimes between the letters.

    Evaluates each assignment directly: an oplus run merges consecutive
    letters into one index and contributes a factor 2 per oplus. Same terms,
    same order as summing ``eval_word`` over ``star_words``.
    """
    if not letters:
        raise InputError("star sum needs at least one letter")
    if sum(letters) > t.k_max:
        raise RangeError(f"letters sum to {sum(letters)} beyond trace table k_max={t.k_max}")
    q = len(letters) - 1
    vals = t.values
    terms = []
    for mask in range(1 << q):
        prod = 1.0
        run = letters[0]
        for j in range(q):
            if (mask >> j) & 1:
                run += letters[j + 1]
            else:
                prod *= vals[run]
                run = letters[j + 1]
        terms.append(math.ldexp(prod * vals[run], mask.bit_count()))
    return math.fsum(terms)
