"""Weighted exponential sums over smooth numbers and their circle-method pieces.

E(x, y; alpha) = sum_{n y-smooth} e(n alpha) Phi(n/x).  The discrete
identity (1/M) sum_m E(m/M)^2 E(-m/M) = #{weighted n1 + n2 = n3} holds
exactly once M exceeds 2 x b, where [a, b] is the support of Phi.  On the
grid m/M, E is a single inverse FFT of the weighted indicator vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .saddlepoint import psi_ht_estimate
from .smoothset import (
    DEFAULT_BUDGET, BudgetExceeded, factorize, mobius, psi_exact, sieve_smooth,
    smooth_part, totient,
)
from .weightfn import WeightFn, phi_transform_line

DEFAULT_DELTA = 0.1


@lru_cache(maxsize=16)
def _smooth_members(limit: int, y: int) -> np.ndarray:
    if limit < 1:
        return np.zeros(0, dtype=np.int64)
    return sieve_smooth(limit, y).members


def weighted_members(x: float, y: float, phi: WeightFn):
    """(n, Phi(n/x)) over y-smooth n in the support window, zeros dropped."""
    a, b = phi.support
    lo, hi = math.ceil(a * x), math.floor(b * x)
    n = _smooth_members(int(hi), int(math.floor(y)))
    n = n[n >= lo]
    w = phi(n / x)
    keep = w != 0
    return n[keep], w[keep]


def _csum(z: np.ndarray) -> complex:
    """Compensated sum of complex terms."""
    return complex(math.fsum(z.real.tolist()), math.fsum(z.imag.tolist()))


def exp_sum(x: float, y: float, alpha: float, phi: WeightFn) -> complex:
    """E(x, y; alpha) by direct compensated summation."""
    n, w = weighted_members(x, y, phi)
    # reduce n * alpha mod 1 before exponentiating to keep the phase accurate
    frac = np.mod(n * (alpha - math.floor(alpha)), 1.0)
    return _csum(w * np.exp(2j * np.pi * frac))


def exp_sum_many(x: float, y: float, alphas, phi: WeightFn, chunk: int = 64) -> np.ndarray:
    """E(x, y; alpha) for an array of alphas (plain pairwise summation)."""
    n, w = weighted_members(x, y, phi)
    alphas = np.asarray(alphas, dtype=float)
    out = np.empty(alphas.shape, dtype=complex)
    flat = alphas.ravel()
    res = out.ravel()
    for i in range(0, flat.size, chunk):
        al = flat[i : i + chunk]
        ph = np.mod(np.outer(al - np.floor(al), n), 1.0)
        res[i : i + chunk] = np.exp(2j * np.pi * ph) @ w
    return out


# ----------------------------------------------------------------------------
# rational approximation


@dataclass(frozen=True)
class RationalApprox:
    a: int
    q: int
    gamma: float
    Q: int
    q0: int = 1
    q1: int = 1

    def __post_init__(self):
        if math.gcd(self.a, self.q) != 1:
            raise ValueError("a and q must be coprime")
        if self.q0 * self.q1 != self.q:
            raise ValueError("q0 * q1 must equal q")


def continued_fraction(alpha: Fraction, max_terms: int = 200) -> list[int]:
    out = []
    r = Fraction(alpha)
    for _ in range(max_terms):
        a = math.floor(r)
        out.append(a)
        r -= a
        if r == 0:
            break
        r = 1 / r
    return out


def dirichlet_approx(alpha, Q: int, y: float | None = None) -> RationalApprox:
    """a/q with q <= Q, (a, q) = 1 and |alpha - a/q| <= 1/(q Q).

    The last continued-fraction convergent with denominator <= Q works: the
    next denominator exceeds Q.  alpha may be a float or a Fraction; with y
    given, q is split as q0 * q1 (q0 y-smooth, q1 free of primes <= y).
    """
    if Q < 2:
        raise ValueError("Q must be >= 2")
    fa = Fraction(alpha)
    h0, h1, k0, k1 = 0, 1, 1, 0  # convergents p_{-2}, p_{-1}, q_{-2}, q_{-1}
    a, q = 0, 1
    for t in continued_fraction(fa):
        h0, h1 = h1, t * h1 + h0
        k0, k1 = k1, t * k1 + k0
        if k1 > Q:
            break
        a, q = h1, k1
    gamma = float(alpha) - a / q
    q0, q1 = smooth_part(q, y) if y is not None else (q, 1)
    return RationalApprox(a, q, gamma, Q, q0, q1)


def best_approx_bruteforce(alpha: float, Q: int):
    """Exhaustive (a, q, gamma) over q <= Q minimizing |alpha - a/q| (oracle)."""
    best = None
    for q in range(1, Q + 1):
        a = round(alpha * q)
        g = alpha - a / q
        if math.gcd(a, q) == 1 and (best is None or abs(g) < abs(best[2])):
            best = (a, q, g)
    return best


# ----------------------------------------------------------------------------
# local main terms


def _mu_phi_ratio(m: int) -> float:
    return mobius(m) / totient(m)


def local_main_term(x: float, y: float, q: int, gamma: float, phi: WeightFn) -> complex:
    """M(x, y; q, gamma) = sum_n mu(q/(q,n))/phi(q/(q,n)) e(n gamma) Phi(n/x)."""
    n, w = weighted_members(x, y, phi)
    g = np.gcd(n, q)
    coef = np.zeros(n.size)
    for d in np.unique(g).tolist():
        coef[g == d] = _mu_phi_ratio(q // d)
    phase = np.mod(n * gamma, 1.0)
    return _csum(coef * w * np.exp(2j * np.pi * phase))


def h_factor(s: complex, q0: int) -> complex:
    """q0^-s prod_{p | q0} (1 - (p^s - 1)/(p - 1))."""
    s = complex(s)
    if s.real <= 0:
        raise ValueError("Re(s) must be positive")
    out = complex(q0) ** -s
    for p in factorize(q0):
        out *= 1 - (p**s - 1) / (p - 1)
    return out


@dataclass(frozen=True)
class Prediction:
    value: complex
    c0: float
    kappa: float
    psi: float
    psi_source: str  # "exact" or "estimate"
    h: complex
    transform: complex
    mu_phi_q1: float


def theorem23_prediction(x: float, y: float, q: int, gamma: float, phi: WeightFn,
                         delta: float = DEFAULT_DELTA, budget: int | None = None) -> Prediction:
    """(mu(q1)/phi(q1)) h(c0; q0) c0 Phi^(c0, gamma x) Psi(x, y), c0 = 1 - 1/kappa."""
    if abs(gamma) > x ** (delta - 1):
        raise ValueError("need |gamma| <= x^(delta - 1)")
    kappa = math.log(y) / math.log(math.log(x))
    c0 = 1 - 1 / kappa
    q0, q1 = smooth_part(q, y)
    mpq = _mu_phi_ratio(q1)
    limit = DEFAULT_BUDGET if budget is None else budget
    if x <= limit:
        psi, src = float(psi_exact(x, y)), "exact"
    else:
        psi, src = psi_ht_estimate(x, y), "estimate"
    h = h_factor(c0, q0) if c0 > 0 else complex(math.nan)
    tr = complex(phi_transform_line(phi, c0, np.array([0.0]), gamma * x)[0])
    value = 0j if mpq == 0 else mpq * h * c0 * tr * psi
    return Prediction(value, c0, kappa, psi, src, h, tr, mpq)


# ----------------------------------------------------------------------------
# arcs


@dataclass(frozen=True)
class Arc:
    a: int
    q: int
    pieces: tuple[tuple[float, float], ...]  # one piece, or two for the 0/1 arc

    @property
    def measure(self) -> float:
        return sum(hi - lo for lo, hi in self.pieces)


@dataclass(frozen=True)
class ArcDecomposition:
    x: float
    delta: float
    Q: int
    halfwidth: float
    major: tuple[Arc, ...]
    minor: tuple[tuple[float, float], ...] = field(repr=False)

    def major_measure(self) -> float:
        return math.fsum(arc.measure for arc in self.major)

    def minor_measure(self) -> float:
        return math.fsum(hi - lo for lo, hi in self.minor)

    def in_major(self, alpha: float) -> bool:
        alpha = alpha - math.floor(alpha)
        for arc in self.major:
            for lo, hi in arc.pieces:
                if lo <= alpha <= hi:
                    return True
        return False

    def sample_minor(self, n: int, rng: np.random.Generator) -> np.ndarray:
        lens = np.array([hi - lo for lo, hi in self.minor])
        pick = rng.choice(len(self.minor), size=n, p=lens / lens.sum())
        lo = np.array([self.minor[i][0] for i in pick])
        return lo + rng.random(n) * lens[pick]


class ArcOverlap(ValueError):
    pass


def arcs_partition(x: float, delta: float = DEFAULT_DELTA) -> ArcDecomposition:
    """Major arcs |alpha - a/q| <= x^(delta-1), q <= x^(1/4), and their complement."""
    if not 0 < delta < 0.25:
        raise ValueError("delta must lie in (0, 1/4)")
    if x < 16:
        raise ValueError("x must be >= 16")
    Q = int(math.floor(x**0.25 + 1e-9))
    h = x ** (delta - 1)
    arcs = [Arc(0, 1, ((0.0, h), (1.0 - h, 1.0)))]
    for q in range(2, Q + 1):
        for a in range(1, q):
            if math.gcd(a, q) == 1:
                arcs.append(Arc(a, q, ((a / q - h, a / q + h),)))
    pieces = sorted(p for arc in arcs for p in arc.pieces)
    for (lo1, hi1), (lo2, hi2) in zip(pieces, pieces[1:]):
        if lo2 <= hi1:
            raise ArcOverlap(f"major arcs overlap near {lo2:.6g}; x too small for delta")
    minor = tuple((hi1, lo2) for (_, hi1), (lo2, _) in zip(pieces, pieces[1:]))
    return ArcDecomposition(x, delta, Q, h, tuple(arcs), minor)


# ----------------------------------------------------------------------------
# discrete circle identity and minor-arc profile


def modulus_for(x: float, phi: WeightFn) -> int:
    """Smallest power of two exceeding 2 x b."""
    need = 2 * x * phi.support[1]
    return 1 << int(math.floor(need)).bit_length()


def circle_identity_discrete(x: float, y: float, phi: WeightFn, M: int | None = None,
                             budget: int | None = None) -> float:
    """(1/M) sum_{m < M} E(m/M)^2 E(-m/M), computed with one inverse FFT."""
    if M is None:
        M = modulus_for(x, phi)
    if M <= 2 * x * phi.support[1]:
        raise ValueError(f"M = {M} must exceed 2 x b = {2 * x * phi.support[1]:g}")
    if M > (DEFAULT_BUDGET if budget is None else budget):
        raise BudgetExceeded(f"modulus {M} exceeds the budget")
    n, w = weighted_members(x, y, phi)
    f = np.zeros(M)
    f[n] = w
    E = np.fft.ifft(f) * M  # E[m] = sum_n f[n] e(n m / M)
    E_neg = np.conj(E)  # f is real
    return float(np.real(np.sum(E * E * E_neg)) / M)


@dataclass(frozen=True)
class MinorProfile:
    x: float
    y: float
    delta: float
    peak: float  # E(x, y; 0)
    rows: list  # (alpha, |E|, x^(3/4), x^(3/4 + 0.05))
    sup: float


def minor_arc_profile(x: float, y: float, phi: WeightFn, delta: float = DEFAULT_DELTA,
                      samples: int = 64, seed: int = 0) -> MinorProfile:
    """|E(x, y; alpha)| at random minor-arc points, against x^(3/4) envelopes."""
    arcs = arcs_partition(x, delta)
    alphas = np.sort(arcs.sample_minor(samples, np.random.default_rng(seed)))
    vals = np.abs(exp_sum_many(x, y, alphas, phi))
    peak = float(np.real(exp_sum(x, y, 0.0, phi)))
    e1, e2 = x**0.75, x**0.8
    rows = [(float(a), float(v), e1, e2) for a, v in zip(alphas, vals)]
    return MinorProfile(x, y, delta, peak, rows, float(vals.max()) if samples else 0.0)
