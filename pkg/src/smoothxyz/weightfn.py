"""Smooth compactly supported weights and their Mellin-type transform.

The transform is  Phi^(s, lam) = int_0^inf Phi(w) e(lam w) w^(s-1) dw  with
e(x) = exp(2 pi i x).  It is computed in the variable u = log w, where the
integrand is Phi(e^u) e(lam e^u) e^(s u); composite Gauss-Legendre panels
are placed between the weight's breakpoints and refined so that each
period of the phase t u + 2 pi lam e^u gets at least 20 nodes.
"""

from __future__ import annotations

import cmath
import json
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import integrate

from ._quad import composite_gl

NODES_PER_PERIOD = 20
GL_ORDER = 10
CACHE_ENV = "SMOOTHXYZ_CACHE"


# ----------------------------------------------------------------------------
# the mollifier m(s) = exp(-1/(s(1-s))) and the smooth step built from it


def _mollifier_derivs(s: np.ndarray, kmax: int) -> list[np.ndarray]:
    """[m, m', ..., m^(kmax)] on s (zero outside the open unit interval)."""
    s = np.asarray(s, dtype=float)
    inside = (s > 0) & (s < 1)
    # exp(-1/(s(1-s))) underflows long before the pole terms overflow
    live = inside & (s * (1 - s) > 1.2e-3)
    ss = np.where(live, s, 0.5)
    m = np.where(live, np.exp(-1.0 / (ss * (1 - ss))), 0.0)
    # h = log m = -1/s - 1/(1-s);  h^(j) = -(-1)^j j!/s^(j+1) - j!/(1-s)^(j+1)
    h = [None] + [
        -((-1.0) ** j) * math.factorial(j) / ss ** (j + 1)
        - math.factorial(j) / (1 - ss) ** (j + 1)
        for j in range(1, kmax + 1)
    ]
    out = [m]
    for n in range(1, kmax + 1):
        # m^(n) = sum_j C(n-1, j) h^(j+1) m^(n-1-j)  (Leibniz on m' = h' m)
        acc = np.zeros_like(m)
        for j in range(n):
            acc = acc + math.comb(n - 1, j) * h[j + 1] * out[n - 1 - j]
        out.append(np.where(live, acc, 0.0))
    return out


_STEP_NODES = 64


@lru_cache(maxsize=1)
def _step_rule() -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(_STEP_NODES)


@lru_cache(maxsize=1)
def _step_norm() -> float:
    return 2 * _half_integral(np.array([0.5]))[0]


def _half_integral(t: np.ndarray) -> np.ndarray:
    """int_0^t m for 0 <= t <= 1/2 by Gauss-Legendre on [0, t]."""
    x, w = _step_rule()
    s = 0.5 * t[:, None] * (x[None, :] + 1)
    return 0.5 * t * (_mollifier_derivs(s.ravel(), 0)[0].reshape(s.shape) @ w)


def smooth_step(t) -> np.ndarray:
    """S(t) = int_0^t m / int_0^1 m, clamped to 0 below 0 and 1 above 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    flat = t.ravel()
    lo = flat <= 0.5
    out = np.empty_like(flat)
    Z = _step_norm()
    out[lo] = _half_integral(flat[lo]) / Z
    out[~lo] = 1.0 - _half_integral(1.0 - flat[~lo]) / Z
    return out.reshape(t.shape)


def smooth_step_deriv(k: int, t) -> np.ndarray:
    """k-th derivative of S for k >= 1."""
    return _mollifier_derivs(t, k - 1)[k - 1] / _step_norm()


# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightFn:
    """A smooth weight on (0, inf) supported in [a, b].

    family "plateau": rises on [eps, 2 eps] through the smooth step, equals 1
    on [2 eps, 1 - 2 eps], falls on [1 - 2 eps, 1 - eps].
    family "bump": exp(4 - 1/(s(1-s))) with s = (t - a)/(b - a); peak 1.
    """

    family: str
    a: float
    b: float
    epsilon: float | None = None
    scale: float = 1.0

    @property
    def support(self) -> tuple[float, float]:
        return (self.a, self.b)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        if self.family == "plateau":
            e = self.epsilon
            return (e, 2 * e, 1 - 2 * e, 1 - e)
        return (self.a, 0.5 * (self.a + self.b), self.b)

    @property
    def tag(self) -> str:
        if self.family == "plateau":
            return f"plateau:eps={self.epsilon!r}:scale={self.scale!r}"
        return f"bump:a={self.a!r}:b={self.b!r}:scale={self.scale!r}"

    def scaled(self, k: float) -> WeightFn:
        return WeightFn(self.family, self.a, self.b, self.epsilon, self.scale * k)

    def __call__(self, t):
        return self.deriv(0, t)

    def eval(self, t):
        return self.deriv(0, t)

    def deriv(self, k: int, t):
        """k-th derivative (0 <= k <= 8) at t; scalar in, scalar out."""
        if not 0 <= k <= 8:
            raise ValueError("derivative order must be in 0..8")
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.family == "plateau":
            out = self._plateau(k, t)
        else:
            out = self._bump(k, t)
        out = self.scale * out
        return float(out[0]) if scalar else out

    def _plateau(self, k, t):
        e = self.epsilon
        out = np.zeros_like(t)
        up = (t > e) & (t < 2 * e)
        down = (t > 1 - 2 * e) & (t < 1 - e)
        if k == 0:
            out[(t >= 2 * e) & (t <= 1 - 2 * e)] = 1.0
            out[up] = smooth_step((t[up] - e) / e)
            out[down] = smooth_step((1 - e - t[down]) / e)
        else:
            out[up] = smooth_step_deriv(k, (t[up] - e) / e) / e**k
            out[down] = smooth_step_deriv(k, (1 - e - t[down]) / e) * (-1 / e) ** k
        return out

    def _bump(self, k, t):
        L = self.b - self.a
        return math.exp(4.0) * _mollifier_derivs((t - self.a) / L, k)[k] / L**k


def make_plateau(epsilon: float) -> WeightFn:
    """Phi_eps: support [eps, 1 - eps], identically 1 on [2 eps, 1 - 2 eps]."""
    if not 0 < epsilon < 0.125:
        raise ValueError("epsilon must lie in (0, 1/8)")
    return WeightFn("plateau", epsilon, 1 - epsilon, epsilon)


def make_bump(a: float, b: float) -> WeightFn:
    if not 0 < a < b:
        raise ValueError("need 0 < a < b")
    return WeightFn("bump", a, b)


# ----------------------------------------------------------------------------
# the transform


def _u_rule(phi: WeightFn, t_max: float, lam: float):
    """Gauss-Legendre nodes/weights in u = log w resolving the phase rate."""
    ub = np.log(np.asarray(phi.breakpoints))
    rate = t_max + 2 * math.pi * abs(lam) * phi.b
    panels = []
    for lo, hi in zip(ub[:-1], ub[1:]):
        periods = rate * (hi - lo) / (2 * math.pi)
        panels.append(max(8, math.ceil(NODES_PER_PERIOD * periods / GL_ORDER)))
    return composite_gl(ub, panels, GL_ORDER)


def phi_transform_line(phi: WeightFn, c: float, ts, lam: float, chunk: int = 256) -> np.ndarray:
    """Phi^(c + i t, lam) for every t in ts."""
    ts = np.asarray(ts, dtype=float)
    out = np.empty(ts.shape, dtype=complex)
    flat_t = ts.ravel()
    flat_out = out.ravel()
    order = np.argsort(np.abs(flat_t))
    for start in range(0, flat_t.size, chunk):
        idx = order[start : start + chunk]
        tt = flat_t[idx]
        u, w = _u_rule(phi, float(np.max(np.abs(tt))), lam)
        ew = np.exp(u)
        g = phi(ew) * np.exp(c * u + 2j * math.pi * lam * ew) * w
        keep = g != 0
        flat_out[idx] = np.exp(1j * np.outer(tt, u[keep])) @ g[keep]
    return flat_out.reshape(ts.shape)


def phi_transform(phi: WeightFn, s: complex, lam: float) -> complex:
    """Phi^(s, lam) for a single complex s with Re(s) >= 1/4."""
    s = complex(s)
    if s.real < 0.25:
        raise ValueError("Re(s) must be >= 1/4")
    return complex(phi_transform_line(phi, s.real, np.array([s.imag]), lam)[0])


def decay_slope(phi: WeightFn, c: float, lam: float, t_lo=100.0, t_hi=1e4, n=25) -> float:
    """Least-squares slope of log|Phi^(c+it, lam)| against log t on [t_lo, t_hi]."""
    ts = np.geomspace(t_lo, t_hi, n)
    vals = np.abs(phi_transform_line(phi, c, ts, lam))
    vals = np.maximum(vals, 1e-300)
    return float(np.polyfit(np.log(ts), np.log(vals), 1)[0])


def decay_shape(phi: WeightFn, c: float, lam: float, k: int, ts) -> dict:
    """max over ts of |Phi^|(|t|/(1+|lam|))^k versus its value at the grid edge."""
    ts = np.asarray(ts, dtype=float)
    vals = np.abs(phi_transform_line(phi, c, ts, lam)) * (np.abs(ts) / (1 + abs(lam))) ** k
    return {"k": k, "max": float(vals.max()), "edge": float(vals[np.argmin(np.abs(ts))]),
            "values": vals.tolist()}


# ----------------------------------------------------------------------------
# truncation of t-integrals via a measured k = 3 envelope

ENVELOPE_K = 3


def _cache_path() -> Path | None:
    root = os.environ.get(CACHE_ENV)
    return Path(root) / "envelopes.json" if root else None


def _load_cache() -> dict:
    p = _cache_path()
    if p and p.exists():
        try:
            return json.loads(p.read_text())
        except (OSError, json.JSONDecodeError):
            return {}
    return {}


def _store_cache(data: dict) -> None:
    p = _cache_path()
    if p is None:
        return
    p.parent.mkdir(parents=True, exist_ok=True)
    tmp = p.with_suffix(".tmp")
    tmp.write_text(json.dumps(data, sort_keys=True, indent=1))
    tmp.replace(p)


@dataclass(frozen=True)
class Envelope:
    """|Phi^(c+it, lam)| <= C (1+|lam|)^k / |t|^k measured on T <= |t| <= 2T."""

    c: float
    lam: float
    T: float
    C: float
    k: int = ENVELOPE_K

    def l1_tail(self, delta: float = 0.0) -> float:
        """Envelope bound for int_{|t| > T} |Phi^| (1+|t|)^delta dt."""
        p = self.k - delta
        return 2 * self.C * (1 + abs(self.lam)) ** self.k * 2**delta * self.T ** (1 - p) / (p - 1)

    def l2_tail(self) -> float:
        """Envelope bound for int_{|t| > T} |Phi^|^2 dt."""
        return 2 * self.C**2 * (1 + abs(self.lam)) ** (2 * self.k) * self.T ** (1 - 2 * self.k) / (
            2 * self.k - 1)


def _measure_envelope(phi, c, lam, T) -> Envelope:
    ts = np.linspace(T, 2 * T, 65)
    ts = np.concatenate([-ts, ts])
    vals = np.abs(phi_transform_line(phi, c, ts, lam)) * (np.abs(ts) / (1 + abs(lam))) ** ENVELOPE_K
    return Envelope(c, lam, T, float(vals.max()))


def calibrate(phi: WeightFn, c: float, lam: float, tol: float, kind: str = "l1",
              delta: float = 0.0, T0: float = 32.0, T_max: float = 2**16) -> Envelope:
    """Smallest T = T0 * 2^(j/2) whose measured envelope puts the tail below tol.

    Results are cached in a JSON sidecar when $SMOOTHXYZ_CACHE is set.
    """
    key = f"{phi.tag}|c={c!r}|lam={lam!r}|tol={tol!r}|{kind}|delta={delta!r}"
    cache = _load_cache()
    if key in cache:
        return Envelope(**cache[key])
    T = max(T0, 4 * (1 + abs(lam)))
    while True:
        env = _measure_envelope(phi, c, lam, T)
        tail = env.l2_tail() if kind == "l2" else env.l1_tail(delta)
        if tail < tol or T >= T_max:
            break
        T = float(round(T * math.sqrt(2)))
    cache[key] = {"c": env.c, "lam": env.lam, "T": env.T, "C": env.C, "k": env.k}
    _store_cache(cache)
    return env


U_PERIOD = 64.0  # u-period of the FFT grid; t-sums alias at multiples of it


@lru_cache(maxsize=32)
def _line_values(phi: WeightFn, c: float, lam: float, T: float):
    """Nodes, weights and transform values on Re(s) = c, |t| <= T.

    g(u) = Phi(e^u) e(lam e^u) e^(cu) is smooth with compact support, so the
    trapezoid sum on a uniform u-grid is spectrally accurate and one FFT gives
    Phi^ on the whole t-grid of step 2 pi / U_PERIOD.  With that step the
    t-trapezoid rule is exact up to aliases of g shifted by U_PERIOD, which
    fall outside the support.
    """
    ua = math.log(phi.a)
    period = max(U_PERIOD, 8 * (math.log(phi.b) - ua))
    band = T + 2 * math.pi * abs(lam) * phi.b + 256
    N = 1 << math.ceil(math.log2(2 * period * band / math.pi))
    du = period / N
    u = ua + du * np.arange(N)
    g = phi(np.exp(u)) * np.exp(c * u + 2j * math.pi * lam * np.exp(u))
    G = np.fft.ifft(g) * N  # G[k] = sum_j g_j e(jk/N)
    dt = 2 * math.pi / period
    K = int(math.floor(T / dt))
    k = np.arange(-K, K + 1)
    t = k * dt
    vals = du * np.exp(1j * t * ua) * G[k % N]
    w = np.full(t.size, dt)
    w[0] = w[-1] = 0.5 * dt
    return t, w, vals


# ----------------------------------------------------------------------------
# identities


@dataclass(frozen=True)
class CheckResult:
    lhs: complex
    rhs: complex
    gap: float
    T: float = math.nan
    remainder: float = math.nan


def weight_l2_moment(phi: WeightFn, c: float) -> float:
    """int_0^inf Phi(w)^2 w^(2c-1) dw."""
    u, w = composite_gl(np.log(phi.breakpoints), 40, GL_ORDER)
    return float(np.sum(phi(np.exp(u)) ** 2 * np.exp(2 * c * u) * w))


def plancherel_check(phi: WeightFn, c: float, lam: float, tol: float = 1e-7) -> CheckResult:
    """(1/2 pi) int |Phi^(c+it, lam)|^2 dt against int Phi(w)^2 w^(2c-1) dw."""
    rhs = weight_l2_moment(phi, c)
    env = calibrate(phi, c, lam, tol * rhs, kind="l2")
    t, w, vals = _line_values(phi, c, lam, env.T)
    lhs = float(np.sum(np.abs(vals) ** 2 * w)) / (2 * math.pi)
    return CheckResult(lhs, rhs, abs(lhs - rhs) / rhs, env.T, env.l2_tail() / (2 * math.pi))


def mellin_inversion_check(phi: WeightFn, c: float, lam: float, n_over_x: float,
                           tol: float = 5e-5) -> CheckResult:
    """(1/2 pi i) int Phi^(s, lam) w^-s ds on Re(s) = c, against e(lam w) Phi(w)."""
    if c <= 0:
        raise ValueError("c must be positive")
    wv = float(n_over_x)
    env = calibrate(phi, c, lam, tol * 2 * math.pi * wv**c, kind="l1")
    t, w, vals = _line_values(phi, c, lam, env.T)
    recon = complex(np.sum(vals * np.exp(-(c + 1j * t) * math.log(wv)) * w)) / (2 * math.pi)
    direct = cmath.exp(2j * math.pi * lam * wv) * phi(wv)
    return CheckResult(recon, direct, abs(recon - direct), env.T,
                       env.l1_tail() * wv**-c / (2 * math.pi))


@dataclass(frozen=True)
class L1Bound:
    c: float
    delta: float
    lam: float
    integral: float
    reference: float  # (1+|lam|)^(1/2 + delta + 0.01)
    ratio: float
    T: float


def l1_transform_bound(phi: WeightFn, c: float, delta: float, lam: float,
                       tol: float = 1e-3) -> L1Bound:
    """int |Phi^(c+it, lam)| (1+|t|)^delta dt and its ratio to (1+|lam|)^(1/2+delta+0.01)."""
    if c < 0.25 or delta < 0:
        raise ValueError("need c >= 1/4 and delta >= 0")
    env = calibrate(phi, c, lam, tol, kind="l1", delta=delta)
    t, w, vals = _line_values(phi, c, lam, env.T)
    val = float(np.sum(np.abs(vals) * (1 + np.abs(t)) ** delta * w))
    ref = (1 + abs(lam)) ** (0.5 + delta + 0.01)
    return L1Bound(c, delta, lam, val, ref, val / ref, env.T)


def stationary_phase_profile(phi: WeightFn, c: float, lams, t_max: float = 200.0) -> list[dict]:
    """max_t |Phi^(c+it, lam)| (1+|lam|)^(1/2) for each lam (diagnostic only)."""
    rows = []
    for lam in lams:
        ts = np.linspace(-t_max - 2 * math.pi * abs(lam), t_max + 2 * math.pi * abs(lam), 801)
        m = float(np.max(np.abs(phi_transform_line(phi, c, ts, lam))))
        rows.append({"lam": lam, "sup": m, "scaled": m * math.sqrt(1 + abs(lam))})
    return rows


# ----------------------------------------------------------------------------
# sharp cutoff: incomplete gamma and Kummer's function

SERIES_LAMBDA_LIMIT = 50.0


class SeriesDivergence(ValueError):
    pass


def _series(term_ratio, first, tol=1e-18, max_terms=5000):
    terms = [first]
    biggest = abs(first)
    for k in range(max_terms):
        r = term_ratio(k)
        terms.append(terms[-1] * r)
        biggest = max(biggest, abs(terms[-1]))
        if abs(r) < 0.5 and abs(terms[-1]) <= tol * biggest:
            break
    else:
        raise SeriesDivergence("series did not converge")
    re = math.fsum(complex(x).real for x in terms)
    im = math.fsum(complex(x).imag for x in terms)
    return complex(re, im)


def lower_incomplete_gamma(s: complex, z: float) -> complex:
    """gamma(s, z) = z^s e^-z sum_k z^k / (s (s+1) ... (s+k)), z > 0."""
    s = complex(s)
    return z**s * math.exp(-z) * _series(lambda k: z / (s + k + 1), 1 / s)


def kummer_m(a: complex, b: complex, z: float) -> complex:
    """M(a, b, z) = sum_k (a)_k / (b)_k z^k / k!."""
    return _series(lambda k: (a + k) / (b + k) * z / (k + 1), complex(1.0))


def sharp_cutoff_transform(s: complex, lam: float) -> complex:
    """int_0^1 e^(lam x) x^(s-1) dx by adaptive quadrature after x = v^m."""
    s = complex(s)
    m = max(1, math.ceil(1.0 / s.real))

    def f(v, part):
        val = m * cmath.exp(lam * v**m) * v ** (m * s - 1) if v > 0 else (
            m if abs(m * s - 1) < 1e-15 else 0.0)
        return val.real if part == 0 else complex(val).imag

    re = integrate.quad(f, 0.0, 1.0, args=(0,), epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    im = integrate.quad(f, 0.0, 1.0, args=(1,), epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    return complex(re, im)


@dataclass(frozen=True)
class GammaIdentity:
    s: complex
    lam: float
    lhs: complex  # quadrature
    rhs: complex  # (-lam)^-s gamma(s, -lam)
    gap: float
    m_direct: complex  # M(s, s+1, lam)
    m_scaled: complex  # s (-lam)^-s gamma(s, -lam)
    m_kummer: complex  # e^lam M(1, s+1, -lam)
    kummer_gap: float  # max of the two pairwise gaps


def incomplete_gamma_identity(s: complex, lam: float) -> GammaIdentity:
    """Check the sharp-cutoff transform against incomplete gamma and Kummer series."""
    s = complex(s)
    if lam >= 0:
        raise ValueError("lam must be negative")
    if s.real <= 0:
        raise ValueError("Re(s) must be positive")
    if abs(lam) > SERIES_LAMBDA_LIMIT:
        raise SeriesDivergence(f"|lam| > {SERIES_LAMBDA_LIMIT:g}: series cancellation too severe")
    lhs = sharp_cutoff_transform(s, lam)
    z = -lam
    rhs = z**-s * lower_incomplete_gamma(s, z)
    m1 = kummer_m(s, s + 1, lam)
    m2 = cmath.exp(lam) * kummer_m(1.0, s + 1, -lam)
    scaled = s * rhs
    return GammaIdentity(s, lam, lhs, rhs, abs(lhs - rhs), m1, scaled, m2,
                         max(abs(m1 - scaled), abs(m1 - m2)))
