"""Dirichlet characters, Gauss sums and partial L-functions.

Characters mod q are labelled by exponent vectors against fixed generators
of the factors of (Z/qZ)^* given by the Chinese remainder theorem: the
smallest primitive root for odd prime powers, -1 for 4, and the pair
(-1, 5) for 2^k with k >= 3.  Values are exact roots of unity of order
dividing the group exponent L and are stored as integer phases mod L;
complex tables are materialized on demand.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .smoothset import divisors, factorize, mobius, primes_upto, totient

MAX_MODULUS = 10**6


def _order_mod(g: int, n: int, phi: int, prime_factors) -> int:
    order = phi
    for r in prime_factors:
        while order % r == 0 and pow(g, order // r, n) == 1:
            order //= r
    return order


def primitive_root(n: int) -> int:
    """Smallest primitive root mod n (n an odd prime power or 2, 4)."""
    if n in (1, 2):
        return 1
    if n == 4:
        return 3
    phi = totient(n)
    rs = list(factorize(phi))
    for g in range(2, n):
        if math.gcd(g, n) == 1 and _order_mod(g, n, phi, rs) == phi:
            return g
    raise ValueError(f"no primitive root mod {n}")


@dataclass(frozen=True)
class _Factor:
    modulus: int
    gens: tuple[int, ...]
    orders: tuple[int, ...]
    logs: np.ndarray  # shape (modulus, len(gens)); -1 on non-units


def _factor_tables(p: int, k: int) -> _Factor:
    n = p**k
    if p == 2 and k == 1:
        return _Factor(2, (), (), np.zeros((2, 0), dtype=np.int64))
    if p == 2:
        e = 2 if k == 2 else 2 ** (k - 2)
        gens = (n - 1,) if k == 2 else (n - 1, 5)
        orders = (2,) if k == 2 else (2, e)
        logs = -np.ones((n, len(gens)), dtype=np.int64)
        five = 1
        for b in range(e if k >= 3 else 1):
            for a in range(2):
                r = five if a == 0 else (n - five) % n
                logs[r, 0] = a
                if k >= 3:
                    logs[r, 1] = b
            five = five * 5 % n
        return _Factor(n, gens, orders, logs)
    g = primitive_root(n)
    phi = n - n // p
    logs = -np.ones((n, 1), dtype=np.int64)
    r = 1
    for j in range(phi):
        logs[r, 0] = j
        r = r * g % n
    return _Factor(n, (g,), (phi,), logs)


class CharacterGroup:
    """The dual group of (Z/qZ)^*, with a discrete-log table."""

    def __init__(self, q: int):
        if q < 1:
            raise ValueError("modulus must be a positive integer")
        if q > MAX_MODULUS:
            raise ValueError(f"modulus above {MAX_MODULUS}")
        self.q = q
        self.factors = [_factor_tables(p, k) for p, k in sorted(factorize(q).items())]
        self.orders = tuple(o for f in self.factors for o in f.orders)
        self.exponent = math.lcm(*self.orders) if self.orders else 1
        n = np.arange(q)
        cols = [f.logs[n % f.modulus] for f in self.factors if f.logs.shape[1]]
        logs = np.concatenate(cols, axis=1) if cols else np.zeros((q, 0), dtype=np.int64)
        self.unit = np.gcd(n, q) == 1
        logs[~self.unit] = 0
        self.logs = logs
        self.logs.setflags(write=False)
        self.unit.setflags(write=False)
        self.roots = np.exp(2j * np.pi * np.arange(self.exponent) / self.exponent)

    @property
    def size(self) -> int:
        return int(np.prod(self.orders)) if self.orders else 1

    def indices(self):
        """All exponent vectors, in lexicographic order."""
        if not self.orders:
            yield ()
            return
        for flat in range(self.size):
            idx = []
            for o in reversed(self.orders):
                idx.append(flat % o)
                flat //= o
            yield tuple(reversed(idx))

    def phases(self, index) -> np.ndarray:
        """Integer phases mod exponent for every n mod q (garbage off units)."""
        if not self.orders:
            return np.zeros(self.q, dtype=np.int64)
        scale = np.array([idx * (self.exponent // o) for idx, o in zip(index, self.orders)],
                         dtype=np.int64)
        return (self.logs @ scale) % self.exponent


@lru_cache(maxsize=256)
def character_group(q: int) -> CharacterGroup:
    return CharacterGroup(q)


class DirichletCharacter:
    """A Dirichlet character mod q, given by its exponent vector."""

    def __init__(self, group: CharacterGroup, index: tuple[int, ...]):
        self.group = group
        self.index = tuple(int(i) for i in index)

    def __repr__(self):
        return f"DirichletCharacter(q={self.q}, index={self.index})"

    def __eq__(self, other):
        return (isinstance(other, DirichletCharacter) and self.q == other.q
                and self.index == other.index)

    def __hash__(self):
        return hash((self.q, self.index))

    @property
    def q(self) -> int:
        return self.group.q

    @property
    def modulus(self) -> int:
        return self.group.q

    @cached_property
    def phases(self) -> np.ndarray:
        out = self.group.phases(self.index)
        out.setflags(write=False)
        return out

    @cached_property
    def values(self) -> np.ndarray:
        """chi(n) for n = 0..q-1."""
        v = np.where(self.group.unit, self.group.roots[self.phases], 0)
        v.setflags(write=False)
        return v

    def __call__(self, n):
        """chi(n) for an integer or integer array."""
        r = np.asarray(n) % self.q
        out = self.values[r]
        return complex(out) if np.ndim(out) == 0 else out

    @property
    def principal(self) -> bool:
        return all(i == 0 for i in self.index)

    @property
    def parity(self) -> int:
        return 1 if abs(self(-1) - 1) < 1e-12 else -1

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.values.imag) < 1e-12))

    def conj(self) -> DirichletCharacter:
        inv = tuple((-i) % o for i, o in zip(self.index, self.group.orders))
        return DirichletCharacter(self.group, inv)

    @cached_property
    def conductor(self) -> int:
        """Smallest d | q such that chi(n) = 1 for every unit n = 1 mod d."""
        q = self.q
        ph = self.phases
        unit = self.group.unit
        for d in divisors(q):
            n = np.arange(1 % q if q > 1 else 0, q, d) if d < q else np.array([1 % q])
            n = n[unit[n]]
            if np.all(ph[n] == 0):
                return d
        return q

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.q

    def primitive_character(self) -> DirichletCharacter:
        """The primitive character mod the conductor inducing this one."""
        qp = self.conductor
        target = np.zeros(qp, dtype=complex)
        unit_p = np.gcd(np.arange(qp), qp) == 1
        for m in np.nonzero(unit_p)[0]:
            n = int(m) if qp > 1 else 1
            while math.gcd(n, self.q) != 1:
                n += qp
            target[m] = self(n)
        for chi in characters_mod(qp):
            if np.allclose(chi.values, target, atol=1e-9):
                return chi
        raise RuntimeError("inducing character not found")


def characters_mod(q: int) -> list[DirichletCharacter]:
    """All phi(q) characters mod q; index () is the principal one for q <= 2."""
    if q == 0:
        raise ValueError("q = 0 is not a modulus")
    g = character_group(int(q))
    return [DirichletCharacter(g, idx) for idx in g.indices()]


def principal_character(q: int) -> DirichletCharacter:
    g = character_group(q)
    return DirichletCharacter(g, (0,) * len(g.orders))


# ----------------------------------------------------------------------------
# Gauss sums


@dataclass(frozen=True)
class GaussSumValue:
    chi: DirichletCharacter
    tau: complex

    @property
    def modulus(self) -> float:
        return abs(self.tau)


def _e(x):
    return np.exp(2j * np.pi * x)


def gauss_sum(chi: DirichletCharacter) -> GaussSumValue:
    """tau(chi) = sum_{b mod q} chi(b) e(b/q)."""
    q = chi.q
    b = np.arange(q)
    return GaussSumValue(chi, complex(np.sum(chi.values * _e(b / q))))


@dataclass(frozen=True)
class Gap:
    lhs: complex
    rhs: complex
    gap: float


def additive_decomposition_check(n: int, a: int, q: int) -> Gap:
    """e(an/q) against (1/phi(q/d)) sum_{chi mod q/d} tau(conj chi) chi(m a)."""
    if math.gcd(a, q) != 1:
        raise ValueError("a must be coprime to q")
    d = math.gcd(n, q)
    m, Q = n // d, q // d
    lhs = cmath.exp(2j * math.pi * ((a * n) % q) / q)
    V, tau_conj = _character_matrix(Q)
    rhs = complex(tau_conj @ V[:, (m * a) % Q]) / totient(Q)
    return Gap(lhs, rhs, abs(lhs - rhs))


@lru_cache(maxsize=512)
def _character_matrix(Q: int):
    """Value table (one row per character mod Q) and tau(conj chi) per row."""
    chars = characters_mod(Q)
    V = np.array([c.values for c in chars])
    tau_conj = np.array([gauss_sum(c.conj()).tau for c in chars])
    V.setflags(write=False)
    tau_conj.setflags(write=False)
    return V, tau_conj


def gauss_norm_identity(q: int, d: int) -> float:
    """(1/phi(q/d)^2) sum_{chi mod q/d} |tau(chi)|^2, which should be 1."""
    if q % d:
        raise ValueError("d must divide q")
    Q = q // d
    s = math.fsum(abs(gauss_sum(chi).tau) ** 2 for chi in characters_mod(Q))
    return s / totient(Q) ** 2


def induced_gauss_check(chi: DirichletCharacter) -> Gap:
    """tau(chi) against mu(q/q') chi'(q/q') tau(chi') for the inducing chi'."""
    prim = chi.primitive_character()
    r = chi.q // prim.q
    rhs = mobius(r) * prim(r) * gauss_sum(prim).tau
    lhs = gauss_sum(chi).tau
    return Gap(lhs, rhs, abs(lhs - rhs))


def orthogonality_defects(q: int) -> tuple[float, float]:
    """Max deviations of the row and column orthogonality relations mod q."""
    chars = characters_mod(q)
    V = np.array([c.values for c in chars])  # (phi(q), q)
    phi = totient(q)
    rows = V @ V.conj().T
    row_dev = float(np.max(np.abs(rows - phi * np.eye(len(chars)))))
    cols = V.T @ V.conj()  # sum_chi chi(m) conj chi(n)
    unit = character_group(q).unit
    target = phi * np.diag(unit.astype(float))
    col_dev = float(np.max(np.abs(cols - target)))
    return row_dev, col_dev


# ----------------------------------------------------------------------------
# partial L-functions and twisted prime sums


def partial_L(s: complex, chi: DirichletCharacter, y: float) -> complex:
    """prod_{p <= y} (1 - chi(p) p^-s)^-1 for Re(s) > 0."""
    s = complex(s)
    if s.real <= 0:
        raise ValueError("Re(s) must be positive")
    ps = primes_upto(y)
    z = chi(ps) * np.exp(-s * np.log(ps.astype(float)))
    return complex(np.exp(-np.sum(np.log1p(-z))))


def twisted_lambda_sum(u: float, chi: DirichletCharacter, t: float,
                       budget: int | None = None) -> complex:
    """sum_{n <= u} Lambda(n) chi(n) n^-it over prime powers n."""
    if u < 2:
        return 0j
    ps = primes_upto(u, budget).astype(np.int64)
    ns, logs = [], []
    pk = ps.copy()
    while pk.size:
        ns.append(pk)
        logs.append(np.log(ps[: pk.size].astype(float)))
        nxt = pk * ps[: pk.size]
        keep = nxt <= u
        pk = nxt[keep]  # ps is sorted, so survivors form a prefix
    n = np.concatenate(ns)
    lam = np.concatenate(logs)
    terms = lam * chi(n) * np.exp(-1j * t * np.log(n.astype(float)))
    return complex(np.sum(terms))


def twisted_sum_diagnostic(us, ts) -> list[dict]:
    """Ratio |S - u^(1-it)/(1-it)| / (sqrt(u) log u log(u(|t|+2))), principal chi."""
    chi = principal_character(1)
    rows = []
    for u in us:
        for t in ts:
            S = twisted_lambda_sum(u, chi, t)
            main = u ** (1 - 1j * t) / (1 - 1j * t)
            scale = math.sqrt(u) * math.log(u) * math.log(u * (abs(t) + 2))
            rows.append({"u": u, "t": t, "sum": S, "ratio": abs(S - main) / scale})
    return rows


def lindelof_diagnostic(chi: DirichletCharacter, y: float, s_grid) -> list[dict]:
    """|L(s, chi; y)| next to (q|s|)^0.1 and the principal-character envelope."""
    rows = []
    ly = math.log(y)
    for s in s_grid:
        s = complex(s)
        if s.real < 0.6:
            raise ValueError("grid must satisfy Re(s) >= 0.6")
        val = abs(partial_L(s, chi, y))
        env = math.exp(y ** (1 - s.real) / ((1 + abs(s.imag)) * ly)) * abs(s) ** 0.1
        rows.append({"q": chi.q, "index": chi.index, "s": s, "abs_L": val,
                     "reference": (chi.q * abs(s)) ** 0.1, "envelope": env})
    return rows
