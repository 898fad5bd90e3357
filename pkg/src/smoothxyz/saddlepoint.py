"""Hildebrand-Tenenbaum saddle-point estimates for Psi(x, y).

The partial zeta function zeta(s; y) = prod_{p <= y} (1 - p^-s)^-1 is
evaluated in the log domain.  The saddle point c(x, y) solves
sum_{p <= y} log p / (p^c - 1) = log x; -phi_1 is strictly decreasing
in c with derivative -phi_2, so bisection followed by Newton is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .smoothset import primes_upto

BRACKET = (1e-6, 10.0)


class SaddleError(ValueError):
    pass


class QuadratureError(RuntimeError):
    pass


@lru_cache(maxsize=32)
def _logp(y: int) -> np.ndarray:
    out = np.log(primes_upto(y).astype(float))
    out.setflags(write=False)
    return out


def _check_y(y) -> int:
    y = int(math.floor(y))
    if y < 2:
        raise ValueError("y must be >= 2")
    return y


def log_zeta_partial(s, y: float):
    """log zeta(s; y) = -sum_{p <= y} log(1 - p^-s); s scalar or array."""
    y = _check_y(y)
    s_arr = np.asarray(s)
    if np.any(np.real(s_arr) <= 0):
        raise ValueError("zeta(s; y) needs Re(s) > 0")
    L = _logp(y)
    if np.isrealobj(s_arr):
        z = np.exp(-np.multiply.outer(s_arr, L))
        out = -np.log1p(-z).sum(axis=-1)
    else:
        z = np.exp(-np.multiply.outer(s_arr, L))
        out = -np.log(1.0 - z).sum(axis=-1)
    return out if out.ndim else out[()]


def zeta_partial(s, y: float):
    """zeta(s; y) = prod_{p <= y} (1 - p^-s)^-1 for Re(s) > 0."""
    return np.exp(log_zeta_partial(s, y))


def phi_j(c: float, y: float, j: int) -> float:
    """j-th derivative in c of log zeta(c; y), for j = 1 or 2."""
    if c <= 0:
        raise ValueError("c must be positive")
    L = _logp(_check_y(y))
    em1 = np.expm1(c * L)
    if j == 1:
        return -float(np.sum(L / em1))
    if j == 2:
        return float(np.sum((em1 + 1.0) * L**2 / em1**2))
    raise ValueError("j must be 1 or 2")


@dataclass(frozen=True)
class SaddleData:
    x: float
    y: int
    c: float
    phi1: float
    phi2: float
    zeta_c: float
    psi_estimate: float
    u: float
    kappa: float

    @property
    def log_x(self) -> float:
        return math.log(self.x)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("x", "y", "c", "phi1", "phi2", "zeta_c", "psi_estimate", "u", "kappa")}


def solve_saddle_c(log_x: float, y: float) -> float:
    """The c > 0 with -phi_1(c; y) = log_x."""
    y = _check_y(y)
    lo, hi = BRACKET
    if log_x <= 0:
        raise SaddleError("log x must be positive")
    if -phi_j(lo, y, 1) < log_x:
        raise SaddleError(
            f"log x = {log_x:g} exceeds -phi_1({lo:g}; {y}); widen the bracket")
    if -phi_j(hi, y, 1) > log_x:
        raise SaddleError(f"log x = {log_x:g} is below -phi_1({hi:g}; {y})")
    g = lambda c: -phi_j(c, y, 1) - log_x  # noqa: E731 (decreasing in c)
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    c = 0.5 * (lo + hi)
    for _ in range(5):
        r = g(c)
        if abs(r) <= 1e-12 * log_x:
            break
        c += r / phi_j(c, y, 2)  # g'(c) = -phi_2
    return c


def solve_saddle(x: float, y: float) -> SaddleData:
    y = _check_y(y)
    if x < y:
        raise ValueError("need x >= y")
    log_x = math.log(x)
    c = solve_saddle_c(log_x, y)
    phi1 = phi_j(c, y, 1)
    phi2 = phi_j(c, y, 2)
    log_zc = float(log_zeta_partial(c, y))
    log_psi = c * log_x + log_zc - math.log(c) - 0.5 * math.log(2 * math.pi * phi2)
    llx = math.log(log_x)
    return SaddleData(
        x=x, y=y, c=c, phi1=phi1, phi2=phi2, zeta_c=math.exp(log_zc),
        psi_estimate=math.exp(log_psi), u=log_x / math.log(y),
        kappa=math.log(y) / llx if llx > 0 else math.inf,
    )


def log_psi_ht_estimate(x: float, y: float, *, log_x: float | None = None) -> float:
    """log of the Hildebrand-Tenenbaum main term; accepts log_x for huge x."""
    y = _check_y(y)
    lx = math.log(x) if log_x is None else log_x
    c = solve_saddle_c(lx, y)
    phi2 = phi_j(c, y, 2)
    return c * lx + float(log_zeta_partial(c, y)) - math.log(c) \
        - 0.5 * math.log(2 * math.pi * phi2)


def psi_ht_estimate(x: float, y: float) -> float:
    """x^c zeta(c; y) / (c sqrt(2 pi phi_2(c; y))) at the saddle point c."""
    return solve_saddle(x, y).psi_estimate


# ----------------------------------------------------------------------------
# truncated Perron integral


def adaptive_simpson(f, a: float, b: float, rtol: float = 1e-8,
                     min_nodes: int = 64, max_depth: int = 40) -> float:
    """Adaptive Simpson rule; f maps a float array to a float array."""
    n0 = max(2, (min_nodes + 1) // 2)
    edges = np.linspace(a, b, n0 + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    fe = f(edges)
    fm = f(mids)
    panels = [(edges[i], edges[i + 1], fe[i], fm[i], fe[i + 1], 0) for i in range(n0)]
    coarse = sum((p[1] - p[0]) / 6 * (p[2] + 4 * p[3] + p[4]) for p in panels)
    scale = abs(coarse) or 1.0
    total = 0.0
    stack = panels
    while stack:
        lo, hi, flo, fmid, fhi, depth = stack.pop()
        m = 0.5 * (lo + hi)
        ql, qr = 0.5 * (lo + m), 0.5 * (m + hi)
        fl, fr = f(np.array([ql, qr]))
        whole = (hi - lo) / 6 * (flo + 4 * fmid + fhi)
        left = (m - lo) / 6 * (flo + 4 * fl + fmid)
        right = (hi - m) / 6 * (fmid + 4 * fr + fhi)
        err = left + right - whole
        if abs(err) <= 15 * rtol * scale * (hi - lo) / (b - a):
            total += left + right + err / 15
        elif depth >= max_depth:
            raise QuadratureError(f"adaptive Simpson did not converge on [{lo}, {hi}]")
        else:
            stack.append((lo, m, flo, fl, fmid, depth + 1))
            stack.append((m, hi, fmid, fr, fhi, depth + 1))
    return total


def perron_integrand(t, x: float, y: float, c: float):
    """zeta(c+it; y) x^(it) / (c+it), normalized by x^c zeta(c; y)."""
    t = np.asarray(t, dtype=float)
    s = c + 1j * t
    logz = log_zeta_partial(s, y) - float(log_zeta_partial(c, y))
    return np.exp(logz + 1j * t * math.log(x)) / s


def psi_perron_truncated(x: float, y: float, *, absolute: bool = False,
                         rtol: float = 1e-8) -> float:
    """(1/2 pi i) int_{c - i/log y}^{c + i/log y} zeta(s; y) x^s / s ds at the saddle.

    With absolute=True the modulus of the integrand is integrated against
    |ds| / 2 pi instead.  The integrand at -t is the conjugate of that at t,
    so only [0, 1/log y] is integrated.
    """
    sd = solve_saddle(x, y)
    T = 1.0 / math.log(sd.y)
    if absolute:
        f = lambda t: np.abs(perron_integrand(t, x, sd.y, sd.c))  # noqa: E731
    else:
        f = lambda t: np.real(perron_integrand(t, x, sd.y, sd.c))  # noqa: E731
    val = adaptive_simpson(f, 0.0, T, rtol=rtol) / math.pi
    return val * math.exp(sd.c * math.log(x)) * sd.zeta_c


# ----------------------------------------------------------------------------
# Dickman function

RHO_STEP = 1e-3
RHO_MAX = 20.0


@lru_cache(maxsize=1)
def _rho_table() -> np.ndarray:
    # Trapezoid rule on u rho(u) = int_{u-1}^u rho(t) dt.  The integral form keeps
    # relative accuracy where rho is tiny; the ODE form drifts negative near u = 9.
    h = RHO_STEP
    N = int(round(1.0 / h))
    n = int(round(RHO_MAX / h))
    rho = np.ones(n + 1)
    for i in range(N + 1, n + 1):
        u = i * h
        inner = rho[i - N + 1 : i]
        rho[i] = h * (0.5 * rho[i - N] + inner.sum()) / (u - 0.5 * h)
    rho.setflags(write=False)
    return rho


def dickman_rho(u: float) -> float:
    """Dickman's rho on [0, 20], trapezoidal stepping with step 1e-3."""
    if u < 0:
        raise ValueError("u must be nonnegative")
    if u > RHO_MAX:
        raise ValueError(f"u > {RHO_MAX:g} is outside the tabulated range")
    if u <= 1:
        return 1.0
    return float(np.interp(u, np.arange(_rho_table().size) * RHO_STEP, _rho_table()))


# ----------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class ZetaRatioProfile:
    x: float
    y: int
    c: float
    u: float
    rows: list  # (tau, |zeta(c + i tau; y) / zeta(c; y)|)
    c0_measured: float  # largest c0 with the decay envelope holding on the grid


def zeta_ratio_profile(x: float, y: float, tau_grid) -> ZetaRatioProfile:
    sd = solve_saddle(x, y)
    taus = np.asarray(list(tau_grid), dtype=float)
    ratio = np.abs(np.exp(log_zeta_partial(sd.c + 1j * taus, sd.y)
                          - float(log_zeta_partial(sd.c, sd.y))))
    nz = taus != 0
    if np.any(nz):
        t2 = taus[nz] ** 2
        c0 = float(np.min(-np.log(ratio[nz]) * ((1 - sd.c) ** 2 + t2) / (sd.u * t2)))
    else:
        c0 = math.inf
    rows = [(float(t), float(r)) for t, r in zip(taus, ratio)]
    return ZetaRatioProfile(x, sd.y, sd.c, sd.u, rows, c0)


def log_psi_elementary(x: float, y: float) -> float:
    """Leading term of the uniform elementary asymptotic for log Psi(x, y)."""
    lx, ly = math.log(x), math.log(y)
    return lx / ly * math.log1p(y / lx) + y / ly * math.log1p(lx / y)


def phi2_ratio(x: float, y: float) -> float:
    """phi_2(c(x,y), y) over its predicted size (1 + log x / y) log x log y."""
    sd = solve_saddle(x, y)
    lx = math.log(x)
    return sd.phi2 / ((1 + lx / sd.y) * lx * math.log(sd.y))


def saddle_kappa_gap(x: float, kappa: float, exact_upto: int = 10**7):
    """|c(x, y) - (1 - 1/kappa)| for y = (log x)^kappa, and the constant K
    with gap = K log log y / log y.

    Primes beyond exact_upto are replaced by the density 1/log t, so the
    result is flagged approximate whenever y exceeds exact_upto.
    """
    from scipy import integrate

    lx = math.log(x)
    y = lx**kappa
    y0 = int(min(y, exact_upto))
    L = _logp(y0)
    approximate = y > exact_upto

    def minus_phi1(c):
        val = float(np.sum(L / np.expm1(c * L)))
        if approximate:
            # sum_{y0 < p <= y} log p / (p^c - 1) ~ int dt / (t^c - 1)
            f = lambda v: math.exp(v) / math.expm1(c * v)  # noqa: E731  t = e^v
            val += integrate.quad(f, math.log(y0), math.log(y), limit=200)[0]
        return val

    lo, hi = BRACKET
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if minus_phi1(mid) > lx:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    c = 0.5 * (lo + hi)
    gap = abs(c - (1 - 1 / kappa))
    ly = math.log(y)
    return {"x": x, "kappa": kappa, "y": y, "c": c, "c_limit": 1 - 1 / kappa,
            "gap": gap, "K": gap * ly / math.log(ly), "approximate": approximate}
