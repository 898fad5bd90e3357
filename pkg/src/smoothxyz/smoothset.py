"""Smooth numbers: segmented sieving, exact Psi(x, y), and small arithmetic helpers.

A positive integer is y-smooth when none of its prime factors exceeds y.
By convention 1 is y-smooth for every y >= 2 (its largest prime factor is
taken to be 1).  Everything in this module is exact integer arithmetic.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

DEFAULT_BUDGET = 10**8
DEFAULT_SEGMENT = 1 << 21
JSON_MEMBER_THRESHOLD = 100_000


class BudgetExceeded(ValueError):
    """Raised when a request would sieve or enumerate past the memory budget."""


def _check_budget(n: int, budget: int | None) -> None:
    limit = DEFAULT_BUDGET if budget is None else budget
    if n > limit:
        raise BudgetExceeded(f"{n} exceeds the sieve budget {limit}")


# ----------------------------------------------------------------------------
# primes and factorization


@lru_cache(maxsize=8)
def _prime_table(n: int) -> np.ndarray:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    out = np.nonzero(sieve)[0].astype(np.int64)
    out.setflags(write=False)
    return out


def primes_upto(n: float, budget: int | None = None) -> np.ndarray:
    """All primes p <= n as a read-only int64 array."""
    n = int(math.floor(n))
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    _check_budget(n, budget)
    # round the cache key up so nearby requests share one table
    key = max(1024, 1 << (n - 1).bit_length())
    if key > (DEFAULT_BUDGET if budget is None else budget):
        key = n
    table = _prime_table(key)
    return table[: np.searchsorted(table, n, side="right")]


def prime_pi(n: float) -> int:
    return int(primes_upto(n).size)


def nth_prime(k: int) -> int:
    """The k-th prime (1-indexed)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    bound = 15 if k < 6 else int(k * (math.log(k) + math.log(math.log(k)))) + 3
    return int(primes_upto(bound)[k - 1])


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of n >= 1 by trial division."""
    if n < 1:
        raise ValueError("n must be positive")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    d = 5
    while d * d <= n:
        for p in (d, d + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        d += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def largest_prime_factor(n: int) -> int:
    """Largest prime dividing n; 1 for n = 1."""
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return 1
    return max(factorize(n))


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == {n: 1}


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def totient(n: int) -> int:
    out = n
    for p in factorize(n):
        out -= out // p
    return out


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def smooth_part(q: int, y: float) -> tuple[int, int]:
    """Split q = q0*q1 with q0 y-smooth and every prime of q1 above y."""
    q0 = 1
    for p, e in factorize(q).items():
        if p <= y:
            q0 *= p**e
    return q0, q // q0


def lpf_table(n: int, budget: int | None = None) -> np.ndarray:
    """Largest prime factor of every integer in [0, n] (entries 0, 1 set to 1)."""
    _check_budget(n, budget)
    out = np.ones(n + 1, dtype=np.int64)
    for p in primes_upto(n):
        out[p::p] = p  # increasing p, so the last write is the largest factor
    return out


# ----------------------------------------------------------------------------
# sieving smooth numbers


def _smooth_flags(lo: int, hi: int, ps: np.ndarray) -> np.ndarray:
    """Boolean mask over [lo, hi): True where the integer is smooth over ps."""
    rem = np.arange(lo, hi, dtype=np.int64)
    for p in ps.tolist():
        if p >= hi:
            break
        pk = p
        while pk < hi:
            start = (-lo) % pk
            rem[start::pk] //= p
            pk *= p
    return rem == 1


def _iter_segments(x: int, y: int, segment: int):
    ps = primes_upto(min(y, x))
    for lo in range(1, x + 1, segment):
        hi = min(x + 1, lo + segment)
        yield lo, _smooth_flags(lo, hi, ps)


def _validate(x: int, y: int) -> tuple[int, int]:
    x, y = int(math.floor(x)), int(math.floor(y))
    if x < 1:
        raise ValueError("x must be >= 1")
    if y < 2:
        raise ValueError("y must be >= 2")
    return x, y


def smooth_flags(x: int, y: int, budget: int | None = None,
                 segment: int = DEFAULT_SEGMENT) -> np.ndarray:
    """Indicator array f of length x+1 with f[n] = True iff n >= 1 is y-smooth."""
    x, y = _validate(x, y)
    _check_budget(x, budget)
    out = np.zeros(x + 1, dtype=bool)
    for lo, flags in _iter_segments(x, y, segment):
        out[lo : lo + flags.size] = flags
    return out


@dataclass(frozen=True)
class SmoothSet:
    """The sorted y-smooth integers in [1, x]."""

    x: int
    y: int
    members: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.members.setflags(write=False)

    def __len__(self) -> int:
        return int(self.members.size)

    def __contains__(self, n) -> bool:
        i = bisect.bisect_left(self.members, n)
        return i < len(self) and int(self.members[i]) == n

    def __iter__(self):
        return iter(self.members.tolist())

    @property
    def count(self) -> int:
        return len(self)

    def window(self, lo: float, hi: float) -> np.ndarray:
        """Members n with lo <= n <= hi."""
        a = np.searchsorted(self.members, lo, side="left")
        b = np.searchsorted(self.members, hi, side="right")
        return self.members[a:b]

    def to_dict(self, include_members: bool | None = None) -> dict:
        if include_members is None:
            include_members = len(self) <= JSON_MEMBER_THRESHOLD
        d = {"x": self.x, "y": self.y, "count": len(self)}
        if include_members:
            d["members"] = self.members.tolist()
        return d

    def to_json(self, include_members: bool | None = None) -> str:
        return json.dumps(self.to_dict(include_members))

    def write_text(self, path) -> None:
        Path(path).write_text("".join(f"{n}\n" for n in self.members.tolist()))

    @classmethod
    def read_text(cls, path, x: int, y: int) -> SmoothSet:
        vals = [int(line) for line in Path(path).read_text().split()]
        return cls(x, y, np.asarray(vals, dtype=np.int64))

    @classmethod
    def from_dict(cls, d: dict) -> SmoothSet:
        if "members" not in d:
            return sieve_smooth(d["x"], d["y"])
        return cls(d["x"], d["y"], np.asarray(d["members"], dtype=np.int64))


def sieve_smooth(x: int, y: int, budget: int | None = None,
                 segment: int = DEFAULT_SEGMENT) -> SmoothSet:
    """All y-smooth n in [1, x], by a segmented division sieve."""
    x, y = _validate(x, y)
    _check_budget(x, budget)
    parts = [lo + np.nonzero(flags)[0] for lo, flags in _iter_segments(x, y, segment)]
    members = np.concatenate(parts).astype(np.int64) if parts else np.zeros(0, np.int64)
    return SmoothSet(x, y, members)


def psi_exact(x: float, y: float, budget: int | None = None,
              segment: int = DEFAULT_SEGMENT) -> int:
    """Psi(x, y): the number of y-smooth integers in [1, x]."""
    x, y = _validate(x, y)
    if y >= x:
        return x
    _check_budget(x, budget)
    return sum(int(np.count_nonzero(flags)) for _, flags in _iter_segments(x, y, segment))


def iter_smooth(limit: int, ps) -> list[int]:
    """Every integer in [1, limit] whose prime factors all lie in ps (any size).

    Depth-first over exponent vectors, so this works for huge limits when ps
    is short; output is sorted.
    """
    ps = sorted(int(p) for p in ps)
    out = []

    def rec(i, n):
        if i == len(ps):
            out.append(n)
            return
        p = ps[i]
        while n <= limit:
            rec(i + 1, n)
            n *= p

    rec(0, 1)
    out.sort()
    return out


# ----------------------------------------------------------------------------
# triples


@dataclass(frozen=True)
class Triple:
    X: int
    Y: int
    Z: int

    def __post_init__(self):
        if min(self.X, self.Y, self.Z) < 1:
            raise ValueError("triple entries must be positive")
        if self.X + self.Y != self.Z:
            raise ValueError(f"{self.X} + {self.Y} != {self.Z}")

    @property
    def height(self) -> int:
        return max(self.X, self.Y, self.Z)

    def smoothness(self) -> int:
        """Largest prime dividing XYZ."""
        return max(largest_prime_factor(v) for v in (self.X, self.Y, self.Z))


def is_primitive(t: Triple) -> bool:
    return math.gcd(t.X, t.Y, t.Z) == 1
