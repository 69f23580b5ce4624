"""Arithmetic in F_q = F_{p^ell} with additive and quadratic characters.

Elements are integers in ``[0, q)``: the base-p digits of an element are the
coefficients (lowest degree first) of its polynomial representative modulo
the field's defining polynomial. All arithmetic goes through lookup tables,
so every operation accepts Python ints or integer numpy arrays.
"""
from __future__ import annotations

import math
from functools import cached_property, lru_cache

import numpy as np

from .errors import EvenCharacteristic, NonPrime, SizeLimitExceeded, ZeroLeadingCoefficient

MAX_ORDER = 4096


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _poly_divides(divisor: list[int], poly: list[int], p: int) -> bool:
    """True iff the monic ``divisor`` divides ``poly`` over F_p (coeffs low->high)."""
    rem = list(poly)
    dd = len(divisor) - 1
    for top in range(len(rem) - 1, dd - 1, -1):
        c = rem[top] % p
        if c:
            for k in range(dd + 1):
                rem[top - dd + k] = (rem[top - dd + k] - c * divisor[k]) % p
    return not any(c % p for c in rem[:dd])


def _monic_polys(p: int, degree: int):
    """Monic polynomials of ``degree`` in encoding order of the lower coefficients."""
    for code in range(p**degree):
        coeffs = []
        for _ in range(degree):
            coeffs.append(code % p)
            code //= p
        yield coeffs + [1]


def is_irreducible(poly: list[int], p: int) -> bool:
    """Exhaustive trial division by every monic polynomial of degree <= deg/2."""
    n = len(poly) - 1
    if n == 1:
        return True
    for k in range(1, n // 2 + 1):
        for div in _monic_polys(p, k):
            if _poly_divides(div, poly, p):
                return False
    return True


class FiniteField:
    """Immutable arithmetic context for F_{p^ell}.

    Use :func:`make_field` rather than constructing directly; it validates the
    parameters and caches instances.
    """

    def __init__(self, p: int, ell: int):
        self.p = p
        self.ell = ell
        self.q = p**ell
        self.modulus = next(m for m in _monic_polys(p, ell) if is_irreducible(m, p))
        self._powers = p ** np.arange(ell, dtype=np.int64)
        self.primitive = self._find_primitive()
        exp = np.empty(self.q - 1, dtype=np.int64)
        x = 1
        for k in range(self.q - 1):
            exp[k] = x
            x = self._poly_mul(x, self.primitive)
        log = np.full(self.q, -1, dtype=np.int64)
        log[exp] = np.arange(self.q - 1)
        self.exp_table = exp
        self.log_table = log
        for arr in (exp, log):
            arr.setflags(write=False)

    def __repr__(self) -> str:
        return f"FiniteField(p={self.p}, ell={self.ell}, modulus={self.modulus})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteField) and (self.p, self.ell) == (other.p, other.ell)

    def __hash__(self) -> int:
        return hash((self.p, self.ell))

    # -- construction helpers (polynomial arithmetic, used only at build time)

    def _digits(self, a: int) -> list[int]:
        out = []
        for _ in range(self.ell):
            out.append(a % self.p)
            a //= self.p
        return out

    def _encode(self, digits) -> int:
        return int(sum(int(c) * self.p**k for k, c in enumerate(digits)))

    def _poly_mul(self, a: int, b: int) -> int:
        p, n = self.p, self.ell
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * n - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
        for top in range(2 * n - 2, n - 1, -1):
            c = prod[top]
            if c:
                for k in range(n + 1):
                    prod[top - n + k] = (prod[top - n + k] - c * self.modulus[k]) % p
        return self._encode(prod[:n])

    def _find_primitive(self) -> int:
        for cand in range(1, self.q):
            x, order = cand, 1
            while x != 1:
                x = self._poly_mul(x, cand)
                order += 1
            if order == self.q - 1:
                return cand
        raise AssertionError("multiplicative group is cyclic; unreachable")

    # -- tables

    @cached_property
    def digit_table(self) -> np.ndarray:
        codes = np.arange(self.q, dtype=np.int64)
        return (codes[:, None] // self._powers[None, :]) % self.p

    @cached_property
    def add_table(self) -> np.ndarray:
        dig = self.digit_table
        summed = (dig[:, None, :] + dig[None, :, :]) % self.p
        return (summed @ self._powers).astype(np.int64)

    @cached_property
    def neg_table(self) -> np.ndarray:
        return ((-self.digit_table) % self.p) @ self._powers

    @cached_property
    def mul_table(self) -> np.ndarray:
        logs = self.log_table
        a = logs[:, None]
        b = logs[None, :]
        out = self.exp_table[(a + b) % (self.q - 1)]
        out[(a < 0) | (b < 0)] = 0
        return out

    @cached_property
    def inv_table(self) -> np.ndarray:
        inv = np.zeros(self.q, dtype=np.int64)
        inv[1:] = self.exp_table[(-self.log_table[1:]) % (self.q - 1)]
        return inv

    @cached_property
    def square_table(self) -> np.ndarray:
        sq = np.zeros(self.q, dtype=np.int64)
        sq[1:] = self.exp_table[(2 * self.log_table[1:]) % (self.q - 1)]
        return sq

    @cached_property
    def trace_table(self) -> np.ndarray:
        # Tr is F_p-linear: evaluate it on the monomial basis X^k, then extend.
        basis_traces = np.zeros(self.ell, dtype=np.int64)
        for k in range(self.ell):
            x = self.p**k
            total = 0
            for _ in range(self.ell):
                total = int(self.add_table[total, x])
                x = self.pow(x, self.p)
            assert total < self.p, "trace must land in the prime subfield"
            basis_traces[k] = total
        return (self.digit_table @ basis_traces) % self.p

    @cached_property
    def chi_table(self) -> np.ndarray:
        return np.exp(2j * np.pi * self.trace_table / self.p)

    @cached_property
    def eta_table(self) -> np.ndarray:
        eta = np.zeros(self.q, dtype=np.int64)
        eta[1:] = np.where(self.log_table[1:] % 2 == 0, 1, -1)
        return eta

    @cached_property
    def char_matrix(self) -> np.ndarray:
        """``C[x, m] = chi(x * m)``, the q x q character table of F_q."""
        return self.chi_table[self.mul_table]

    # -- element arithmetic (scalars or arrays)

    @property
    def elements(self) -> range:
        return range(self.q)

    def add(self, a, b):
        return _out(self.add_table[a, b])

    def neg(self, a):
        return _out(self.neg_table[a])

    def sub(self, a, b):
        return _out(self.add_table[a, self.neg_table[b]])

    def mul(self, a, b):
        return _out(self.mul_table[a, b])

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise ZeroDivisionError("0 has no inverse in F_q")
        return _out(self.inv_table[a])

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a: int, n: int) -> int:
        if a == 0:
            return 0 if n > 0 else 1
        return int(self.exp_table[(int(self.log_table[a]) * n) % (self.q - 1)])

    def element(self, n: int) -> int:
        """The image of the integer ``n`` in the prime subfield."""
        return n % self.p

    def sqrt(self, a: int) -> int | None:
        """Smallest-encoding square root of ``a`` by exhaustive scan, or None."""
        for x in range(self.q):
            if self.square_table[x] == a:
                return x
        return None

    def is_square(self, a: int) -> bool:
        return a == 0 or self.eta_table[a] == 1

    @cached_property
    def nonsquare(self) -> int:
        """The fixed non-square used in normal forms (the primitive element)."""
        return self.primitive


def _out(v):
    return int(v) if np.ndim(v) == 0 else v


@lru_cache(maxsize=None)
def make_field(p: int, ell: int = 1) -> FiniteField:
    """Build (and cache) the field with ``p**ell`` elements.

    The defining polynomial is the first monic irreducible in encoding order,
    and the primitive element is the smallest encoding of order q - 1.
    """
    if not is_prime(p):
        raise NonPrime(f"{p} is not prime")
    if p == 2:
        raise EvenCharacteristic("characteristic 2 is not supported")
    if ell < 1:
        raise SizeLimitExceeded(f"extension degree must be >= 1, got {ell}")
    if p**ell > MAX_ORDER:
        raise SizeLimitExceeded(f"q = {p}^{ell} exceeds {MAX_ORDER}")
    return FiniteField(p, ell)


def field_of_order(q: int) -> FiniteField:
    """Field with ``q`` elements, ``q`` an odd prime power."""
    if q < 3:
        raise NonPrime(f"{q} is not an odd prime power")
    for p in range(2, q + 1):
        if q % p == 0:
            break
    ell, n = 0, q
    while n % p == 0:
        n //= p
        ell += 1
    if n != 1:
        raise NonPrime(f"{q} is not a prime power")
    return make_field(p, ell)


def trace(f: FiniteField, x):
    """Absolute trace x + x^p + ... + x^(p^(ell-1)), an element of F_p."""
    return _out(f.trace_table[x])


def add_char(f: FiniteField, x):
    """The canonical additive character exp(2 pi i Tr(x) / p)."""
    v = f.chi_table[x]
    return complex(v) if np.ndim(v) == 0 else v


def quad_char(f: FiniteField, x):
    """Quadratic character: 0 at 0, +1 on nonzero squares, -1 otherwise."""
    return _out(f.eta_table[x])


def gauss_sum(f: FiniteField) -> complex:
    """G1 = sum over s != 0 of eta(s) chi(s), by direct summation."""
    return complex(np.sum(f.eta_table[1:] * f.chi_table[1:]))


def gauss_closed_form(f: FiniteField) -> complex:
    sign = (-1) ** (f.ell - 1)
    root = math.sqrt(f.q)
    if f.p % 4 == 1:
        return complex(sign * root)
    return sign * (1j**f.ell) * root


def gauss_quadratic(f: FiniteField, u: int, v: int) -> complex:
    """Direct sum over s in F_q of chi(u s^2 + v s)."""
    if u == 0:
        raise ZeroLeadingCoefficient("u must be nonzero")
    s = np.arange(f.q)
    args = f.add_table[f.mul_table[u, f.square_table[s]], f.mul_table[v, s]]
    return complex(np.sum(f.chi_table[args]))


def gauss_quadratic_closed(f: FiniteField, u: int, v: int) -> complex:
    """eta(u) G1 chi(v^2 / (-4u)), the completed-square evaluation."""
    if u == 0:
        raise ZeroLeadingCoefficient("u must be nonzero")
    minus_four_u = f.neg(f.mul(f.element(4), u))
    arg = f.div(f.square_table[v], minus_four_u)
    return f.eta_table[u] * gauss_sum(f) * complex(f.chi_table[arg])


def odd_prime_powers(limit: int) -> list[int]:
    out = []
    for q in range(3, limit + 1, 2):
        p = next(k for k in range(2, q + 1) if q % k == 0)
        n = q
        while n % p == 0:
            n //= p
        if n == 1:
            out.append(q)
    return out

