"""Exact myopic placement sequence for the uniform measure on [0, 1].

Every interval of a myopic partition has a length 3^-j 2^-h (internal) or
3^-j / 2 (boundary-touching, "external").  External intervals are labelled
(j + 1/2, -1/2); with that labelling the decrease of the cost produced by the
optimal split of *any* interval is ``3^(-2j) 2^(-2h) / 8``, so the split order
is a total order on labels that can be decided with integer arithmetic.

The sequence is generated in batches: the largest-gain label present is split
in every interval carrying it (children always have smaller gain), which is
also what makes the costs independent of tie choices.
"""
from __future__ import annotations

import bisect
import csv
import heapq
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache, total_ordering

import numpy as np

HALF = Fraction(1, 2)


class Kind(Enum):
    INTERNAL = "internal"
    EXTERNAL = "external"


@dataclass(frozen=True)
class IntervalCode:
    j: Fraction
    h: Fraction
    kind: Kind

    def __post_init__(self):
        j, h = Fraction(self.j), Fraction(self.h)
        if self.kind is Kind.INTERNAL:
            if j.denominator != 1 or h.denominator != 1 or j < 1 or h < 0:
                raise ValueError(f"invalid internal code ({j}, {h})")
        else:
            if h != -HALF or (j - HALF).denominator != 1 or j < HALF:
                raise ValueError(f"invalid external code ({j}, {h})")
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "h", h)
        # derived values, fixed for the lifetime of the code
        if self.kind is Kind.EXTERNAL:
            length = Fraction(1, 2 * 3 ** int(j - HALF))
        else:
            length = Fraction(1, 3 ** int(j) * 2 ** int(h))
        object.__setattr__(self, "_length", length)
        object.__setattr__(self, "_doubled", (int(2 * h), int(2 * j)))
        object.__setattr__(self, "_hash", hash((self._doubled, self.kind)))

    def __hash__(self):
        return self._hash

    @classmethod
    def internal(cls, j: int, h: int) -> IntervalCode:
        return cls(Fraction(j), Fraction(h), Kind.INTERNAL)

    @classmethod
    def external(cls, j) -> IntervalCode:
        """External code with first component ``j`` (a half-integer >= 1/2)."""
        return cls(Fraction(j), -HALF, Kind.EXTERNAL)

    @classmethod
    def from_length(cls, length, external: bool) -> IntervalCode:
        length = Fraction(length)
        if external:
            length *= 2
        num, den = length.numerator, length.denominator
        j = h = 0
        while den % 3 == 0:
            den //= 3
            j += 1
        while den % 2 == 0:
            den //= 2
            h += 1
        if num != 1 or den != 1:
            raise ValueError(f"{length} is not of the form 3^-j 2^-h")
        if external:
            if h:
                raise ValueError(f"{length / 2} is not an external length")
            return cls.external(j + HALF)
        return cls.internal(j, h)

    @property
    def is_external(self) -> bool:
        return self.kind is Kind.EXTERNAL

    @property
    def length(self) -> Fraction:
        return self._length

    @property
    def doubled(self) -> tuple[int, int]:
        """(2h, 2j) as integers."""
        return self._doubled

    def __str__(self):
        tag = "E" if self.is_external else "I"
        return f"{tag}({self.j},{self.h})"


def code_order_gt(a: IntervalCode, b: IntervalCode) -> bool:
    """True iff ``a`` precedes ``b``: h_a - h_b + (j_a - j_b) log3/log2 < 0."""
    (ha, ja), (hb, jb) = a.doubled, b.doubled
    x, y = ha - hb, ja - jb
    # 2^x 3^y < 1 with the negative exponents moved to the right-hand side
    lhs = 2 ** max(x, 0) * 3 ** max(y, 0)
    rhs = 2 ** max(-x, 0) * 3 ** max(-y, 0)
    return lhs < rhs


@total_ordering
class _Ranked:
    """Heap wrapper: smaller means split earlier."""

    __slots__ = ("code",)

    def __init__(self, code: IntervalCode):
        self.code = code

    def __lt__(self, other):
        return code_order_gt(self.code, other.code)

    def __eq__(self, other):
        return self.code == other.code


def enumerate_codes(count: int) -> list[IntervalCode]:
    """The first ``count`` labels of D in split order."""
    if count < 1:
        raise ValueError("count must be >= 1")
    start = [IntervalCode.external(HALF), IntervalCode.internal(1, 0)]
    heap = [_Ranked(c) for c in start]
    heapq.heapify(heap)
    seen = set(start)
    out = []
    while len(out) < count:
        c = heapq.heappop(heap).code
        out.append(c)
        if c.is_external:
            succ = [IntervalCode.external(c.j + 1)]
        else:
            succ = [IntervalCode.internal(int(c.j), int(c.h) + 1)]
            if c.h == 0:
                succ.append(IntervalCode.internal(int(c.j) + 1, 0))
        for s in succ:
            if s not in seen:
                seen.add(s)
                heapq.heappush(heap, _Ranked(s))
    return out


@lru_cache(maxsize=None)
def _children(c: IntervalCode) -> tuple[IntervalCode, IntervalCode]:
    if c.is_external:
        return IntervalCode.external(c.j + 1), IntervalCode.internal(int(c.j + HALF), 0)
    child = IntervalCode.internal(int(c.j), int(c.h) + 1)
    return child, child


def split_code(c: IntervalCode) -> list[IntervalCode]:
    """Children of an optimal split, ordered away from the boundary.

    For an external interval the first child is the new (shorter) external
    one; callers mirror the order for the right-hand boundary.
    """
    return list(_children(c))


def gain_of_split(c: IntervalCode) -> Fraction:
    length = c.length
    return length * length / (3 if c.is_external else 8)


def interval_gain(length, external: bool) -> Fraction:
    length = Fraction(length)
    return length * length / (3 if external else 8)


def longterm_cost_uniform(n: int) -> Fraction:
    if n < 1:
        raise ValueError("n must be >= 1")
    return Fraction(1, 4 * n)


def omega_region(j: int) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
    """The pair of boundary-adjacent intervals Omega_j, total length 2/3^(j+1)."""
    if j < 0:
        raise ValueError("j must be >= 0")
    inner, outer = Fraction(1, 2 * 3**j), Fraction(1, 2 * 3 ** (j + 1))
    return (outer, inner), (1 - inner, 1 - outer)


def omega_index(x) -> int:
    """Index of the region owning ``x`` in (0, 1).

    Regions are taken half-open as (lo, hi] in the global coordinate, so every
    point belongs to exactly one region; 1/2 belongs to Omega_0.
    """
    x = Fraction(x)
    if not 0 < x < 1:
        raise ValueError("x must lie in (0, 1)")
    if x <= HALF:
        # left piece (a_{j+1}, a_j] with a_j = 1/(2*3^j)
        t, j = 1 / (2 * x), 0
        while 3 ** (j + 1) <= t:
            j += 1
        return j
    # right piece (1 - a_j, 1 - a_{j+1}]
    t, j = 1 / (2 * (1 - x)), 0
    while 3 ** (j + 1) < t:
        j += 1
    return j


@dataclass(frozen=True)
class Partition1D:
    lengths: tuple[Fraction, ...]
    codes: tuple[IntervalCode, ...]

    @property
    def k(self) -> int:
        return len(self.lengths) - 1

    @property
    def points(self) -> list[Fraction]:
        out, acc = [], Fraction(0)
        for length in self.lengths[:-1]:
            acc += length
            out.append(acc)
        return out

    def validate(self) -> None:
        if sum(self.lengths) != 1:
            raise AssertionError("lengths do not sum to 1")
        if len(self.codes) != len(self.lengths):
            raise AssertionError("codes and lengths misaligned")
        if not (self.codes[0].is_external and self.codes[-1].is_external):
            raise AssertionError("boundary intervals must be external")
        if any(c.is_external for c in self.codes[1:-1]):
            raise AssertionError("interior intervals must be internal")
        for length, c in zip(self.lengths, self.codes):
            if c.length != length:
                raise AssertionError(f"{c} does not encode {length}")


@dataclass(frozen=True)
class Batch:
    """All splits of one label; steps k0+1 .. k0+count."""

    code: IntervalCode
    k0: int
    count: int
    s0: Fraction
    counter: dict  # label multiset of the partition at k0

    @property
    def k1(self) -> int:
        return self.k0 + self.count

    @property
    def gain(self) -> Fraction:
        return gain_of_split(self.code)

    @property
    def region(self) -> int:
        if self.code.is_external:
            return int(self.code.j - HALF)
        return int(self.code.j) - 1


class ExactSequence:
    """Myopic trajectory for the uniform measure, for k = 1 .. n_max.

    Ties are broken by splitting the leftmost interval carrying the maximal
    label.  Queries are read-only.
    """

    def __init__(self, n_max: int, batches: list[Batch]):
        self.n_max = n_max
        self.batches = batches
        self._starts = [b.k0 for b in batches]
        self._s_float = None

    def __len__(self):
        return self.n_max

    def _check(self, k: int) -> None:
        if not 1 <= k <= self.n_max:
            raise IndexError(f"k={k} outside 1..{self.n_max}")

    def batch_of_step(self, k: int) -> Batch | None:
        """Batch containing the split that produced the k-point set (None for k=1)."""
        self._check(k)
        if k == 1:
            return None
        return self.batches[bisect.bisect_left(self._starts, k) - 1]

    def _state(self, k: int) -> tuple[Batch, int]:
        # the batch whose start is <= k, and how many of its splits are done
        i = bisect.bisect_right(self._starts, k) - 1
        b = self.batches[i]
        return b, k - b.k0

    def s(self, k: int) -> Fraction:
        self._check(k)
        b, m = self._state(k)
        return b.s0 - m * b.gain

    @property
    def s_float(self) -> np.ndarray:
        """Float costs, index k - 1."""
        if self._s_float is None:
            out = np.empty(self.n_max)
            for b in self.batches:
                hi = min(b.k1, self.n_max)
                m = np.arange(0, hi - b.k0 + 1)
                out[b.k0 - 1 : hi] = float(b.s0) - m * float(b.gain)
            out.flags.writeable = False
            self._s_float = out
        return self._s_float

    def chosen_code(self, k: int) -> IntervalCode | None:
        b = self.batch_of_step(k)
        return None if b is None else b.code

    def region(self, k: int) -> int | None:
        """Index of the region Omega_j being subdivided at step k."""
        b = self.batch_of_step(k)
        return None if b is None else b.region

    def counter(self, k: int) -> Counter:
        self._check(k)
        b, m = self._state(k)
        out = Counter(b.counter)
        if m:
            out[b.code] -= m
            if out[b.code] == 0:
                del out[b.code]
            for child in _children(b.code):
                out[child] += m
        return out

    def left_external(self, k: int) -> IntervalCode:
        # leftmost-first means the left boundary interval is never the coarser one
        ext = [c for c in self.counter(k) if c.is_external]
        return max(ext, key=lambda c: c.j)

    def partition(self, k: int) -> Partition1D:
        """Ordered partition of the k-point set (replays the batches)."""
        self._check(k)
        codes = [IntervalCode.external(HALF)] * 2
        for b in self.batches:
            if b.k0 >= k:
                break
            todo = min(b.count, k - b.k0)
            new = []
            last = len(codes) - 1
            for i, c in enumerate(codes):
                if todo and c == b.code:
                    todo -= 1
                    children = _children(c)
                    new.extend(children[::-1] if i == last and c.is_external else children)
                else:
                    new.append(c)
            codes = new
        return Partition1D(tuple(c.length for c in codes), tuple(codes))

    def points(self, k: int) -> list[Fraction]:
        return self.partition(k).points

    def __iter__(self):
        for k in range(1, self.n_max + 1):
            yield k, self.s(k), self.counter(k)


def generate_sequence(n_max: int) -> ExactSequence:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    counter = Counter({IntervalCode.external(HALF): 2})
    heap = [_Ranked(IntervalCode.external(HALF))]
    s, k = Fraction(1, 4), 1
    batches = []
    while True:
        code = heapq.heappop(heap).code
        m = counter.pop(code)
        batches.append(Batch(code, k, m, s, {**counter, code: m}))
        if k >= n_max:
            break
        k += m
        s -= m * gain_of_split(code)
        for child in _children(code):
            if child not in counter:
                heapq.heappush(heap, _Ranked(child))
            counter[child] += m
    return ExactSequence(n_max, batches)


def count_points_in_omega(seq: ExactSequence, k: int, j: int) -> int:
    """Number of points of the k-point set lying in Omega_j.

    Uses the half-open convention of :func:`omega_index`.  Internal intervals
    with label (j + 1, h) tile Omega_j, and each one owns its right endpoint;
    the one point not owned that way is the right end of the left external
    interval.
    """
    if j < 0:
        raise ValueError("j must be >= 0")
    counter = seq.counter(k)
    n = sum(v for c, v in counter.items() if not c.is_external and c.j == j + 1)
    if seq.left_external(k).j - HALF == j:
        n += 1
    return n


def count_points_in_omega_bruteforce(seq: ExactSequence, k: int, j: int) -> int:
    return sum(1 for x in seq.points(k) if omega_index(x) == j)


def write_sequence_csv(seq: ExactSequence, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "s_k_num", "s_k_den", "s_k_float", "n_times_s", "ratio_to_longterm"])
        for k in range(1, seq.n_max + 1):
            s = seq.s(k)
            w.writerow([k, s.numerator, s.denominator, repr(float(s)),
                        repr(float(k * s)), repr(float(4 * k * s))])


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0
