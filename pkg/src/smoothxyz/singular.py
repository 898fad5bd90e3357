"""Singular integrals and Euler products for X + Y = Z with smooth XYZ.

Notation for the per-prime factors, with w = 1/p, u = p^(1-3c), v = p^(c-1):

    S_f   factor:  1 + u (1-v)^3 / ((1-u)(1-w)^2)
    S_f*  factor:  1 + u ((1-v)^3/(1-w)^2 - 1)
    p > y factor:  1 - 1/(p-1)^2

Infinite products are truncated at a prime cutoff P.  The primes above P
are handled twice.  First, an estimate: log(factor) is expanded as a
finite sum of monomials a_e p^-e, and each sum_{p > P} p^-e comes from
the prime zeta function.  Second, a certified bound built from
|factor - 1| <= K p^-e0 and pi(t) <= 1.3 t / log t.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from ._quad import composite_gl
from .smoothset import mobius, primes_upto

DEFAULT_CUTOFF = 10**6
PI_MAJORANT = 1.3  # pi(t) <= 1.3 t / log t for t > 1


class DomainError(ValueError):
    pass


# ----------------------------------------------------------------------------
# Riemann zeta on the real line and the prime zeta function

_EM_TERMS = 10
_EM_N = 20


@lru_cache(maxsize=1)
def _bernoulli_coeffs():
    b = special.bernoulli(2 * _EM_TERMS)
    return [b[2 * k] / math.factorial(2 * k) for k in range(1, _EM_TERMS + 1)]


def zeta_real(s: float) -> float:
    """Riemann zeta at real s > 0, s != 1, by Euler-Maclaurin summation."""
    s = float(s)
    if s <= 0 or s == 1:
        raise DomainError("zeta_real needs real s > 0, s != 1")
    N = _EM_N
    n = np.arange(1, N, dtype=float)
    head = math.fsum((n ** -s).tolist())
    tail = N ** (1 - s) / (s - 1) + 0.5 * N**-s
    rising = s  # s (s+1) ... (s + 2k - 2)
    corr = []
    for k, bk in enumerate(_bernoulli_coeffs(), start=1):
        corr.append(bk * rising * N ** (-s - 2 * k + 1))
        rising *= (s + 2 * k - 1) * (s + 2 * k)
    return head + tail + math.fsum(corr)


@lru_cache(maxsize=256)
def prime_zeta(e: float) -> float:
    """sum_p p^-e for real e > 1, via sum_k mu(k)/k log zeta(k e)."""
    if e <= 1:
        raise DomainError("prime zeta needs e > 1")
    terms = []
    k = 1
    while k * e <= 64 or k == 1:
        mu = mobius(k)
        if mu:
            terms.append(mu / k * math.log(zeta_real(k * e)))
        k += 1
    return math.fsum(terms)


@lru_cache(maxsize=512)
def prime_power_tail(e: float, P: int) -> float:
    """sum_{p > P} p^-e."""
    head = math.fsum((primes_upto(P).astype(float) ** -e).tolist())
    return prime_zeta(e) - head


def prime_power_tail_bound(e: float, P: int) -> float:
    """Certified upper bound for sum_{p > P} p^-e (e > 1, P >= 2)."""
    if e <= 1:
        raise DomainError("need e > 1")
    return PI_MAJORANT * e * P ** (1 - e) / ((e - 1) * math.log(P))


# ----------------------------------------------------------------------------
# formal sums of monomials p^-e, used for the tail estimates


class _Mono(dict):
    """A finite sum sum_e a_e p^-e, truncated above e_max."""

    def __init__(self, terms=(), e_max: float = 4.0):
        super().__init__()
        self.e_max = e_max
        for e, a in terms:
            self.add_term(e, a)

    def add_term(self, e, a):
        if e > self.e_max + 1e-12 or a == 0:
            return
        key = round(e, 10)
        self[key] = self.get(key, 0.0) + a

    def __add__(self, other):
        out = _Mono(self.items(), self.e_max)
        for e, a in other.items():
            out.add_term(e, a)
        return out

    def __neg__(self):
        return _Mono(((e, -a) for e, a in self.items()), self.e_max)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out = _Mono((), self.e_max)
        for e1, a1 in self.items():
            for e2, a2 in other.items():
                out.add_term(e1 + e2, a1 * a2)
        return out

    def min_exponent(self):
        live = [e for e, a in self.items() if abs(a) > 1e-13]
        return min(live) if live else math.inf

    def power_series(self, coeffs):
        """sum_n coeffs(n) self^n over n >= 0 (self must have no constant term)."""
        e0 = self.min_exponent()
        if e0 <= 0:
            raise ValueError("power series needs positive exponents")
        n_max = int(self.e_max / e0) + 1
        out = _Mono([(0.0, coeffs(0))], self.e_max)
        power = _Mono([(0.0, 1.0)], self.e_max)
        for n in range(1, n_max + 1):
            power = power * self
            out = out + _Mono(((e, coeffs(n) * a) for e, a in power.items()), self.e_max)
        return out


def _mono(e, a=1.0, e_max=4.0):
    return _Mono([(e, a)], e_max)


def _geometric(x: _Mono) -> _Mono:
    return x.power_series(lambda n: 1.0)


def _log1p(z: _Mono) -> _Mono:
    return z.power_series(lambda n: 0.0 if n == 0 else (-1.0) ** (n + 1) / n)


def _cube_term(c: float, e_max: float) -> _Mono:
    """u (1 - v)^3 as a monomial sum, rewritten for c > 1 so exponents stay >= 0."""
    one = _mono(0.0, 1.0, e_max)
    if c <= 1:
        v = _mono(1 - c, 1.0, e_max)
        lead = _mono(3 * c - 1, 1.0, e_max)
    else:
        v = _mono(c - 1, 1.0, e_max)
        lead = _mono(2.0, -1.0, e_max)
    d = one - v
    return lead * d * d * d


def _z_series(kind: str, c: float, e_max: float) -> _Mono:
    w = _mono(1.0, 1.0, e_max)
    inv_w2 = _geometric(w)
    inv_w2 = inv_w2 * inv_w2
    if kind == "outer":
        return -(_mono(2.0, 1.0, e_max) * inv_w2)
    T = _cube_term(c, e_max)
    u = _mono(3 * c - 1, 1.0, e_max)
    if kind == "sf":
        return T * _geometric(u) * inv_w2
    if kind == "sf_star":
        return T * inv_w2 - u
    raise ValueError(kind)


def _tail_estimate(kind: str, c: float, P: int) -> float:
    """Estimate of sum_{p > P} log(factor(p))."""
    e_max = 1.0 + 17.0 / math.log10(P)
    logs = _log1p(_z_series(kind, c, e_max))
    total = []
    for e, a in sorted(logs.items()):
        if abs(a) < 1e-13:
            continue
        if e <= 1:
            raise DomainError(f"tail diverges: monomial p^-{e:g} with coefficient {a:g}")
        if prime_power_tail_bound(e, P) * abs(a) < 1e-20:
            continue
        total.append(a * prime_power_tail(e, P))
    return math.fsum(total)


def _tail_majorant(kind: str, c: float, P: int) -> tuple[float, float]:
    """(K, e0) with |factor(p) - 1| <= K p^-e0 for every prime p > P."""
    gw = 1.0 / (1.0 - 1.0 / P) ** 2
    if kind == "outer":
        return gw, 2.0
    if kind == "sf":
        gu = 1.0 / (1.0 - P ** (1 - 3 * c))
        return (gu * gw, 3 * c - 1) if c <= 1 else (gu * gw, 2.0)
    if kind == "sf_star":
        # |(1-v)^3 - (1-w)^2| <= 3v when w <= v <= 1
        return (3 * gw, 2 * c) if c <= 1 else (gw + P ** (3 - 3 * c), 2.0)
    raise ValueError(kind)


def _log_tail_bound(kind: str, c: float, P: int) -> float:
    """Certified bound on |sum_{p > P} log(factor(p))|."""
    K, e0 = _tail_majorant(kind, c, P)
    zmax = K * P**-e0
    if e0 <= 1 or zmax >= 1:
        raise DomainError("tail bound unavailable at this cutoff")
    return K * prime_power_tail_bound(e0, P) / (1 - zmax)


# ----------------------------------------------------------------------------
# per-prime log factors


def _log_factors(kind: str, c: float, ps: np.ndarray) -> np.ndarray:
    L = np.log(ps.astype(float))
    w = 1.0 / ps.astype(float)
    if kind == "outer":
        return np.log1p(-1.0 / (ps.astype(float) - 1.0) ** 2)
    u = np.exp((1 - 3 * c) * L)
    if c <= 1:
        T = u * (-np.expm1((c - 1) * L)) ** 3
    else:
        T = -(w**2) * (-np.expm1((1 - c) * L)) ** 3
    if kind == "sf":
        return np.log1p(T / ((-np.expm1((1 - 3 * c) * L)) * (1 - w) ** 2))
    if kind == "sf_star":
        return np.log1p(T / (1 - w) ** 2 - u)
    raise ValueError(kind)


def _check_c(c: float, floor: float, name: str):
    if not c > floor:
        raise DomainError(f"{name} needs c > {floor:.6g}, got {c}")


@dataclass(frozen=True)
class SingularValue:
    """A truncated Euler product with its tail correction and certified bound.

    value = truncated * exp(tail_estimate); the true product lies within a
    factor exp(+-tail_log_bound) of `truncated`, i.e. relative distance at
    most tail_bound.
    """

    value: float
    truncated: float
    tail_estimate: float
    tail_log_bound: float
    tail_bound: float
    prime_cutoff: int
    c: float
    y: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def _assemble(c, y, P, log_parts, tail_kind):
    log_trunc = math.fsum(log_parts)
    est = _tail_estimate(tail_kind, c, P)
    B = _log_tail_bound(tail_kind, c, P)
    return SingularValue(
        value=math.exp(log_trunc + est), truncated=math.exp(log_trunc),
        tail_estimate=est, tail_log_bound=B, tail_bound=math.expm1(B),
        prime_cutoff=P, c=c, y=y)


def _cutoff(y, prime_cutoff):
    P = DEFAULT_CUTOFF if prime_cutoff is None else int(prime_cutoff)
    if y is not None:
        P = max(P, int(math.floor(y))) if prime_cutoff is None else P
        if P < int(math.floor(y)):
            raise DomainError("prime_cutoff must be >= y")
    return P


def _finite_y(kind: str, c: float, y: float, prime_cutoff):
    if y < 2:
        raise DomainError("y must be >= 2")
    _check_c(c, 1 / 3, "S_f")
    P = _cutoff(y, prime_cutoff)
    ps = primes_upto(P)
    k = int(np.searchsorted(ps, math.floor(y), side="right"))
    low = _log_factors(kind, c, ps[:k])
    high = _log_factors("outer", c, ps[k:])
    return _assemble(c, y, P, [float(np.sum(low)), float(np.sum(high))], "outer")


def s_f(c: float, y: float, prime_cutoff: int | None = None) -> SingularValue:
    """Non-archimedean singular series S_f(c, y) for c > 1/3."""
    return _finite_y("sf", c, y, prime_cutoff)


def s_f_star(c: float, y: float, prime_cutoff: int | None = None) -> SingularValue:
    """Primitive singular series S_f*(c, y) for c > 1/3."""
    return _finite_y("sf_star", c, y, prime_cutoff)


def smooth_prime_correction(c: float, y: float) -> float:
    """prod_{p <= y} (1 - p^(1-3c)), the ratio S_f*(c, y) / S_f(c, y)."""
    L = np.log(primes_upto(y).astype(float))
    return math.exp(float(np.sum(np.log(-np.expm1((1 - 3 * c) * L)))))


def s_f_limit(c: float, prime_cutoff: int | None = None) -> SingularValue:
    """S_f(c) = prod_p (S_f factor), absolutely convergent for c > 2/3."""
    _check_c(c, 2 / 3, "S_f(c)")
    P = _cutoff(None, prime_cutoff)
    logs = _log_factors("sf", c, primes_upto(P))
    return _assemble(c, None, P, [float(np.sum(logs))], "sf")


def s_f_star_limit(c: float, prime_cutoff: int | None = None) -> SingularValue:
    """S_f*(c) = prod_p (S_f* factor), absolutely convergent for c > 1/2."""
    _check_c(c, 1 / 2, "S_f*(c)")
    P = _cutoff(None, prime_cutoff)
    logs = _log_factors("sf_star", c, primes_upto(P))
    return _assemble(c, None, P, [float(np.sum(logs))], "sf_star")


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    gap: float  # relative
    certified: float  # combined relative tail bound of both sides


def euler_identity_check(c: float, prime_cutoff: int | None = None) -> IdentityCheck:
    """Compare S_f*(c) with S_f(c) / zeta(3c - 1)."""
    _check_c(c, 2 / 3, "euler_identity_check")
    lhs = s_f_star_limit(c, prime_cutoff)
    sf = s_f_limit(c, prime_cutoff)
    rhs = sf.value / zeta_real(3 * c - 1)
    return IdentityCheck(lhs.value, rhs, abs(lhs.value - rhs) / abs(lhs.value),
                         math.expm1(lhs.tail_log_bound + sf.tail_log_bound))


def pole_monitor(cs, prime_cutoff: int | None = None) -> list[dict]:
    """Rows (c, S_f(c), zeta(3c-1), S_f(c)/zeta(3c-1), S_f*(c)) as c -> 2/3+."""
    rows = []
    for c in cs:
        sf = s_f_limit(c, prime_cutoff).value
        z = zeta_real(3 * c - 1)
        rows.append({"c": c, "s_f": sf, "zeta": z, "rhs": sf / z,
                     "s_f_star": s_f_star_limit(c, prime_cutoff).value})
    return rows


def relative_density(kappa: float) -> float:
    """1/zeta(2 - 3/kappa) for kappa > 3, and 0 for kappa <= 3."""
    if kappa <= 3:
        return 0.0
    return 1.0 / zeta_real(2 - 3 / kappa)


def continuity_profile(fn, y: float, cs) -> dict:
    """Measured Lipschitz constant of c -> fn(c, y).value over a grid."""
    cs = list(cs)
    vals = [fn(c, y).value for c in cs]
    slopes = [abs(b - a) / (d - e) for a, b, e, d in zip(vals, vals[1:], cs, cs[1:])]
    return {"c": cs, "values": vals, "lipschitz": max(slopes) if slopes else 0.0}


# ----------------------------------------------------------------------------
# archimedean singular integrals


def s_infinity_closed(c: float) -> float:
    """Polar-coordinate closed form c^3 B(c, c) / (3c - 1)."""
    _check_c(c, 1 / 3, "S_inf")
    return c**3 * math.exp(2 * special.gammaln(c) - special.gammaln(2 * c)) / (3 * c - 1)


def s_infinity_sharp(c: float, half: bool = False, epsrel: float = 1e-11) -> float:
    """c^3 int int_{t1 + t2 <= 1} (t1 t2 (t1 + t2))^(c-1) dt1 dt2, c > 1/3.

    With t = tau^(1/c) the integrand becomes c (tau1^(1/c) + tau2^(1/c))^(c-1)
    on tau1^(1/c) + tau2^(1/c) <= 1.  half=True integrates t1 <= t2 and doubles.
    """
    if not c > 1 / 3 + 1e-3:
        raise DomainError("S_inf diverges at c = 1/3; need c > 1/3 + 1e-3")
    ic = 1.0 / c

    def f(t2, t1):
        s = t1**ic + t2**ic
        return c * s ** (c - 1) if s > 0 else 0.0

    top = lambda t1: max(0.0, 1.0 - t1**ic) ** c  # noqa: E731
    if half:
        val, _ = integrate.dblquad(f, 0.0, 2.0**-c, lambda t1: t1, top,
                                   epsabs=0, epsrel=epsrel)
        return 2 * val
    val, _ = integrate.dblquad(f, 0.0, 1.0, 0.0, top, epsabs=0, epsrel=epsrel)
    return val


def s_infinity_weighted(c: float, phi, panels: int = 40, order: int = 10) -> float:
    """c^3 int int phi(t1) phi(t2) phi(t1+t2) (t1 t2 (t1+t2))^(c-1) dt1 dt2."""
    a, b = phi.support
    t, w = composite_gl(phi.breakpoints, panels, order)
    f = phi(t)
    keep = f != 0
    t, w, f = t[keep], w[keep], f[keep]
    if t.size == 0:
        return 0.0
    t1, t2 = t[:, None], t[None, :]
    s = t1 + t2
    g = phi(np.where(s <= b, s, b))
    g = np.where(s <= b, g, 0.0)
    kern = (t1 * t2 * s) ** (c - 1)
    return float(c**3 * np.einsum("i,j,i,j,ij->", w, w, f, f, g * kern))
