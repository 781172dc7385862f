"""Balls zeta + pi^r o in the ring of integers, encoded by base-q digits.

A ball of radius q**-r is determined by the first r digits of any of its
points, so ``Ball(q, digits)`` with ``len(digits) == r`` is a complete
invariant.  Two balls are either nested or disjoint; for disjoint balls every
pair of points (one in each) is at the same distance q**-k, where k is the
first digit position at which the two balls disagree.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class _Same(enum.Enum):
    SAME = "SAME"

    def __repr__(self):
        return "SAME"


SAME = _Same.SAME


@dataclass(frozen=True, order=True)
class Ball:
    q: int
    digits: tuple[int, ...] = ()

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("q must be at least 2")
        digits = tuple(int(d) for d in self.digits)
        for d in digits:
            if not 0 <= d < self.q:
                raise ValueError(f"digit {d} out of range for q={self.q}")
        object.__setattr__(self, "digits", digits)

    @classmethod
    def whole(cls, q: int) -> "Ball":
        return cls(q, ())

    @property
    def r(self) -> int:
        return len(self.digits)

    @property
    def measure(self) -> Fraction:
        return Fraction(1, self.q**self.r)

    def center(self) -> int:
        """The integer sum d_i q**i, a representative point of the ball."""
        return sum(d * self.q**i for i, d in enumerate(self.digits))

    def contains(self, other: "Ball") -> bool:
        return self.r <= other.r and other.digits[: self.r] == self.digits

    def child(self, j: int) -> "Ball":
        return Ball(self.q, self.digits + (j,))

    def children(self) -> list["Ball"]:
        return [self.child(j) for j in range(self.q)]

    def parent(self) -> "Ball":
        if self.r == 0:
            raise ValueError("the whole ring has no parent ball")
        return Ball(self.q, self.digits[:-1])

    def __str__(self):
        return format_ball(self)


def ball_distance(a: Ball, b: Ball):
    """Exponent k with |alpha - beta| = q**-k for all alpha in a, beta in b; SAME if nested."""
    _same_q(a, b)
    if a.contains(b) or b.contains(a):
        return SAME
    for k, (x, y) in enumerate(zip(a.digits, b.digits)):
        if x != y:
            return k
    raise AssertionError("unreachable: balls neither nested nor separated")


def disjoint(a: Ball, b: Ball) -> bool:
    return ball_distance(a, b) is not SAME


def _same_q(a: Ball, b: Ball) -> None:
    if a.q != b.q:
        raise ValueError(f"balls over different residue fields: q={a.q} vs q={b.q}")


@dataclass(frozen=True)
class BallFamily:
    q: int
    balls: tuple[Ball, ...] = ()

    def __post_init__(self):
        balls = tuple(self.balls)
        object.__setattr__(self, "balls", balls)
        for b in balls:
            if b.q != self.q:
                raise ValueError(f"ball {b} is not over q={self.q}")
        for i in range(len(balls)):
            for j in range(i + 1, len(balls)):
                if not disjoint(balls[i], balls[j]):
                    raise ValueError(f"balls {balls[i]} and {balls[j]} are not disjoint")

    def __len__(self):
        return len(self.balls)

    def __iter__(self):
        return iter(self.balls)

    @property
    def measure(self) -> Fraction:
        return sum((b.measure for b in self.balls), Fraction(0))

    def covers(self, within: Ball | None = None) -> bool:
        within = within or Ball.whole(self.q)
        return self.measure == within.measure and all(within.contains(b) for b in self.balls)


def complement(family: BallFamily, within: Ball | None = None) -> BallFamily:
    """Minimal disjoint family of balls covering ``within`` minus the union of ``family``.

    Recursive descent over the q-ary tree: a node that no family ball touches
    is emitted whole, so siblings never need merging afterwards.
    """
    within = within or Ball.whole(family.q)
    if within.q != family.q:
        raise ValueError("family and enclosing ball have different q")
    for b in family.balls:
        if not within.contains(b):
            raise ValueError(f"ball {b} is not contained in {within}")

    out: list[Ball] = []

    def rec(node: Ball, inside: list[Ball]) -> None:
        if not inside:
            out.append(node)
            return
        if any(b.r == node.r for b in inside):
            return
        for c in node.children():
            rec(c, [b for b in inside if c.contains(b)])

    rec(within, list(family.balls))
    return BallFamily(family.q, tuple(out))


def has_mergeable_siblings(family: BallFamily) -> bool:
    """True if some parent ball has all q of its children in the family."""
    seen: dict[tuple[int, ...], int] = {}
    for b in family.balls:
        if b.r:
            key = b.digits[:-1]
            seen[key] = seen.get(key, 0) + 1
    return any(c == family.q for c in seen.values())


def group_by_coset(family: BallFamily) -> list[BallFamily]:
    """Split a family by leading digit into q sub-families."""
    groups: list[list[Ball]] = [[] for _ in range(family.q)]
    for b in family.balls:
        if b.r == 0:
            raise ValueError("the whole ring cannot be grouped by coset")
        groups[b.digits[0]].append(b)
    return [BallFamily(family.q, tuple(g)) for g in groups]


def descend(b: Ball) -> Ball:
    """Pre-image under alpha -> j + pi alpha: drop the leading digit."""
    if b.r == 0:
        raise ValueError("cannot descend the whole ring")
    return Ball(b.q, b.digits[1:])


def ascend(b: Ball, j: int) -> Ball:
    """Image under alpha -> j + pi alpha: prepend digit j."""
    return Ball(b.q, (j,) + b.digits)


def push_into(b: Ball, prefix: Sequence[int]) -> Ball:
    """Image under alpha -> zeta + pi^r alpha where zeta has digits ``prefix``."""
    return Ball(b.q, tuple(prefix) + b.digits)


def parse_ball(text: str) -> Ball:
    """Parse "q:r:d0.d1...d(r-1)", e.g. "5:2:1.3" for (1 + 3*5) + 25 Z_5."""
    parts = text.strip().split(":")
    if len(parts) != 3:
        raise ValueError(f"ball spec {text!r} is not of the form q:r:digits")
    q, r = int(parts[0]), int(parts[1])
    digits = tuple(int(d) for d in parts[2].split(".")) if parts[2] else ()
    if len(digits) != r:
        raise ValueError(f"ball spec {text!r} declares r={r} but has {len(digits)} digits")
    return Ball(q, digits)


def format_ball(b: Ball) -> str:
    return f"{b.q}:{b.r}:{'.'.join(str(d) for d in b.digits)}"


def family_of(q: int, specs: Iterable[Sequence[int]]) -> BallFamily:
    return BallFamily(q, tuple(Ball(q, tuple(s)) for s in specs))
