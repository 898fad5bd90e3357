"""Exact enumeration of smooth solutions of X + Y = Z and related reports.

Counts are over ordered pairs with X, Y >= 1.  Internally the scan runs over
X <= Y and doubles the off-diagonal part; unordered counts are exposed too.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .saddlepoint import psi_ht_estimate
from .singular import DomainError, relative_density, s_f, s_f_star, s_infinity_weighted
from .smoothset import (
    DEFAULT_BUDGET, BudgetExceeded, Triple, largest_prime_factor, mobius, nth_prime,
    prime_pi, primes_upto, psi_exact, sieve_smooth,
)
from .weightfn import WeightFn

SCHEMA_VERSION = 1
COUNT_BUDGET = 10**7


@dataclass(frozen=True)
class PairCount:
    ordered: int | float
    unordered: int | float  # X <= Y
    diagonal: int | float  # X == Y

    def __post_init__(self):
        if self.ordered != 2 * self.unordered - self.diagonal:
            # float sums may differ by roundoff; integers must match exactly
            if isinstance(self.ordered, int) or not math.isclose(
                self.ordered, 2 * self.unordered - self.diagonal, rel_tol=1e-12, abs_tol=1e-12
            ):
                raise AssertionError("ordering bookkeeping mismatch")


def _members_and_flags(H: int, y: float, budget: int | None):
    limit = COUNT_BUDGET if budget is None else budget
    if H > limit:
        raise BudgetExceeded(f"H = {H} exceeds the enumeration budget {limit}")
    S = sieve_smooth(H, int(math.floor(y))).members if H >= 1 else np.zeros(0, np.int64)
    flags = np.zeros(H + 1, dtype=bool)
    flags[S] = True
    return S, flags


def _pair_scan(H: int, y: float, primitive: bool, budget: int | None) -> PairCount:
    H = int(math.floor(H))
    S, flags = _members_and_flags(H, y, budget)
    off = diag = 0
    for i, X in enumerate(S.tolist()):
        if 2 * X > H:
            break
        Ys = S[i : np.searchsorted(S, H - X, side="right")]
        hit = flags[X + Ys]
        if primitive:
            hit &= np.gcd(Ys, X) == 1
        k = int(hit.sum())
        if k and hit[0]:  # Ys[0] == X
            diag += 1
            k -= 1
        off += k
    return PairCount(2 * off + diag, off + diag, diag)


def count_all(H: int, y: float, ordered: bool = True, budget: int | None = None) -> int:
    """Solutions X + Y = Z <= H with X, Y >= 1 and XYZ y-smooth."""
    pc = _pair_scan(H, y, False, budget)
    return pc.ordered if ordered else pc.unordered


def count_primitive(H: int, y: float, ordered: bool = True, budget: int | None = None) -> int:
    """As count_all, restricted to gcd(X, Y) = 1."""
    pc = _pair_scan(H, y, True, budget)
    return pc.ordered if ordered else pc.unordered


def pair_counts(H: int, y: float, primitive: bool = False, budget: int | None = None) -> PairCount:
    return _pair_scan(H, y, primitive, budget)


def enumerate_solutions(H: int, y: float, primitive: bool = False,
                        budget: int | None = None) -> list[Triple]:
    """All ordered solutions, sorted by (Z, X)."""
    H = int(math.floor(H))
    S, flags = _members_and_flags(H, y, budget)
    out = []
    for X in S.tolist():
        Ys = S[S <= H - X]
        hit = flags[X + Ys]
        if primitive:
            hit &= np.gcd(Ys, X) == 1
        out.extend(Triple(X, Yv, X + Yv) for Yv in Ys[hit].tolist())
    out.sort(key=lambda t: (t.Z, t.X))
    return out


# ----------------------------------------------------------------------------
# weighted counts


def _weighted_scans(x: float, y: float, phi, budget: int | None,
                    absolute: bool = False) -> tuple[PairCount, PairCount]:
    """(all, primitive) weighted pair counts from one scan."""
    a, b = phi.support
    hi = int(math.floor(b * x))
    if hi < 1:
        zero = PairCount(0.0, 0.0, 0.0)
        return zero, zero
    limit = COUNT_BUDGET if budget is None else budget
    if hi > limit:
        raise BudgetExceeded(f"x*b = {hi} exceeds the enumeration budget {limit}")
    S = sieve_smooth(hi, int(math.floor(y))).members
    w = np.zeros(hi + 1)
    vals = phi(S / x)
    w[S] = np.abs(vals) if absolute else vals
    S = S[w[S] != 0]
    off, prim_off = [], []
    diag = prim_diag = 0.0
    for i, X in enumerate(S.tolist()):
        if 2 * X > hi:
            break
        Ys = S[i : np.searchsorted(S, hi - X, side="right")]
        Ys = Ys[w[X + Ys] != 0]
        if Ys.size == 0:
            continue
        terms = w[X] * w[Ys] * w[X + Ys]
        cop = np.gcd(Ys, X) == 1
        if Ys[0] == X:
            diag += float(terms[0])
            prim_diag += float(terms[0]) if X == 1 else 0.0
            terms, cop = terms[1:], cop[1:]
        off.append(float(np.sum(terms)))
        prim_off.append(float(np.sum(terms[cop])))
    o, po = math.fsum(off), math.fsum(prim_off)
    return PairCount(2 * o + diag, o + diag, diag), PairCount(2 * po + prim_diag, po + prim_diag, prim_diag)


def _weighted_scan(x, y, phi, primitive: bool, budget, absolute: bool = False) -> PairCount:
    return _weighted_scans(x, y, phi, budget, absolute)[1 if primitive else 0]


def weighted_count(x: float, y: float, phi, ordered: bool = True,
                   budget: int | None = None) -> float:
    """N(x, y; Phi): sum of Phi(X/x) Phi(Y/x) Phi(Z/x) over smooth solutions."""
    pc = _weighted_scan(x, y, phi, False, budget)
    return pc.ordered if ordered else pc.unordered


def weighted_primitive_count(x: float, y: float, phi, ordered: bool = True,
                             budget: int | None = None) -> float:
    pc = _weighted_scan(x, y, phi, True, budget)
    return pc.ordered if ordered else pc.unordered


class _Abs:
    """|Phi| with the same support."""

    def __init__(self, phi):
        self.phi = phi
        self.support = phi.support

    def __call__(self, t):
        return np.abs(self.phi(t))


@dataclass(frozen=True)
class SieveCheck:
    lhs_gap: float
    rhs_bound: float
    passed: bool
    z: float
    P_z: int
    n_primitive: float
    sieve_sum: float


def sieve_identity_check(x: float, y: float, phi, budget: int | None = None) -> SieveCheck:
    """|N* - sum_{d | P_z} mu(d) N(x/d)| <= sum_{z < p <= y} N(x/p; |Phi|), z = log(y)/2."""
    z = 0.5 * math.log(y)
    small = [int(p) for p in primes_upto(z)] if z >= 2 else []
    P_z = math.prod(small)
    n_star = weighted_primitive_count(x, y, phi, budget=budget)
    parts = []
    for mask in range(1 << len(small)):
        d = math.prod(p for i, p in enumerate(small) if mask >> i & 1)
        parts.append(mobius(d) * weighted_count(x / d, y, phi, budget=budget))
    sieve_sum = math.fsum(parts)
    absphi = _Abs(phi)
    bound = math.fsum(
        weighted_count(x / int(p), y, absphi, budget=budget)
        for p in primes_upto(y) if p > z
    )
    gap = abs(n_star - sieve_sum)
    return SieveCheck(gap, bound, gap <= bound, z, P_z, n_star, sieve_sum)


# ----------------------------------------------------------------------------
# reports


@dataclass
class SolutionReport:
    x: float
    y: float
    kappa: float
    c: float
    n_all: float
    n_primitive: float
    n_all_unordered: float
    n_primitive_unordered: float
    ratio_primitive: float
    psi: float
    psi_source: str
    s_infinity: float | None
    s_f: float | None
    s_f_star: float | None
    main_term_all: float | None
    main_term_primitive: float | None
    predicted_density: float | None
    ordering: str = "ordered"
    counts_source: str = "exact"
    schema_version: int = SCHEMA_VERSION
    version: str = __version__

    def __post_init__(self):
        if self.n_primitive > self.n_all + 1e-9 * max(1.0, abs(self.n_all)):
            raise AssertionError("primitive count exceeds total count")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def main_term_report(x: float, y: float, phi: WeightFn, budget: int | None = None) -> SolutionReport:
    """Exact weighted counts next to the singular-series main terms at c = 1 - 1/kappa.

    Main terms need c > 1/3; below that the singular columns are None.
    """
    kappa = math.log(y) / math.log(math.log(x))
    c = 1 - 1 / kappa
    full, prim = _weighted_scans(x, y, phi, budget)
    limit = DEFAULT_BUDGET if budget is None else budget
    if x <= limit:
        psi, src = float(psi_exact(x, y)), "exact"
    else:
        psi, src = psi_ht_estimate(x, y), "estimate"
    sinf = sf = sfs = mt_all = mt_prim = None
    try:
        sf = s_f(c, y).value
        sfs = s_f_star(c, y).value
        sinf = s_infinity_weighted(c, phi)
        base = sinf * psi**3 / x
        mt_all, mt_prim = base * sf, base * sfs
    except DomainError:
        pass
    dens = relative_density(kappa) if kappa > 3 else None
    ratio = prim.ordered / full.ordered if full.ordered > 0 else 0.0
    return SolutionReport(
        x=x, y=y, kappa=kappa, c=c,
        n_all=full.ordered, n_primitive=prim.ordered,
        n_all_unordered=full.unordered, n_primitive_unordered=prim.unordered,
        ratio_primitive=ratio, psi=psi, psi_source=src,
        s_infinity=sinf, s_f=sf, s_f_star=sfs,
        main_term_all=mt_all, main_term_primitive=mt_prim, predicted_density=dens,
    )


def sunit_count(s: int, H: int, budget: int | None = None) -> int:
    """Primitive solutions up to H whose prime factors lie among the first s primes."""
    if s < 1:
        raise ValueError("s must be >= 1")
    return count_primitive(H, nth_prime(s), budget=budget)


def sunit_reference(s: int, eps: float = 0.01) -> float:
    return math.exp(s ** (1 / 8 - eps))


def smoothness_exponent(t: Triple) -> float:
    """log(largest prime of XYZ) / log log max(X, Y, Z)."""
    h = t.height
    if h <= 2:
        raise ValueError("max(X, Y, Z) must be >= 3")
    return math.log(t.smoothness()) / math.log(math.log(h))


@dataclass(frozen=True)
class Kappa0Row:
    height: int
    triple: Triple
    kappa0: float
    running_min: float


def kappa0_profile(H: int, y: float, budget: int | None = None) -> list[Kappa0Row]:
    """Running minimum of the per-triple smoothness exponent, by increasing height.

    Only triples with height >= 3 and a prime factor (so not 1 + 1 = 2) enter.
    """
    rows, best = [], math.inf
    for t in enumerate_solutions(H, y, primitive=True, budget=budget):
        if t.height < 3 or t.X > t.Y:
            continue
        k = smoothness_exponent(t)
        best = min(best, k)
        rows.append(Kappa0Row(t.height, t, k, best))
    return rows


@dataclass(frozen=True)
class HeuristicEstimate:
    H: float
    kappa: float
    y: float
    P_value: float
    psi: float
    psi_source: str
    K: int
    pi_y: int
    feasible: bool
    binom_lower: int | None
    log_binom_lgamma: float | None


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def heuristic_estimate(H: float, kappa: float, budget: int | None = None) -> HeuristicEstimate:
    """Psi(H, y)^3 / H with y = (log H)^kappa, plus the distinct-primes binomial count."""
    if kappa <= 1:
        raise ValueError("kappa must exceed 1")
    y = math.log(H) ** kappa
    limit = DEFAULT_BUDGET if budget is None else budget
    if H <= limit:
        psi, src = float(psi_exact(H, y)), "exact"
    else:
        psi, src = psi_ht_estimate(H, y), "estimate"
    K = int(math.floor(math.log(H) / (kappa * math.log(math.log(H)))))
    n = prime_pi(y)
    feasible = 3 * K <= n
    binom = log_lg = None
    if feasible:
        binom = math.comb(n, K) * math.comb(n - K, K) * math.comb(n - 2 * K, K)
        log_lg = _log_comb(n, K) + _log_comb(n - K, K) + _log_comb(n - 2 * K, K)
    return HeuristicEstimate(H, kappa, y, psi**3 / H, psi, src, K, n, feasible, binom, log_lg)


# ----------------------------------------------------------------------------
# structural checks


def multiples_lower_bound(H: int, y: float) -> tuple[int, int]:
    """(count_all(H, y), Psi(H/2, y)); the first is never smaller."""
    return count_all(H, y), psi_exact(H // 2, y) if H >= 2 else 0


def gcd_scaling_check(H: int, y: float) -> bool:
    """Every solution is g times a primitive one, with g y-smooth; checked as a bijection."""
    sols = enumerate_solutions(H, y)
    prim = set((t.X, t.Y) for t in enumerate_solutions(H, y, primitive=True))
    rebuilt = set()
    for X, Y, _ in ((t.X, t.Y, t.Z) for t in prim_triples(prim)):
        for g in range(1, H // (X + Y) + 1):
            if largest_prime_factor(g) <= y:
                rebuilt.add((g * X, g * Y))
    return rebuilt == set((t.X, t.Y) for t in sols)


def prim_triples(pairs):
    return [Triple(X, Y, X + Y) for X, Y in sorted(pairs)]
