"""Exact arithmetic in Z/p^N and in unramified extensions truncated at p^N.

A :class:`PadicCtx` fixes an odd prime ``p``, a precision exponent ``N`` and
an extension degree ``m``.  Ring elements are plain integers in ``[0, p**N)``
when ``m == 1``, and tuples of ``m`` such integers (coordinates with respect
to the basis ``1, x, ..., x**(m-1)`` of ``(Z/p^N)[x]/(modulus)``) when
``m >= 2``.  The modulus is a deterministically chosen monic lift of the
lexicographically smallest irreducible polynomial over F_p, so contexts are
reproducible without external tables.

Contexts and elements are immutable; every operation is a pure function, so
values can be shared freely between concurrent workers.
"""

from __future__ import annotations

from .errors import (
    NotAUnit,
    NotPrime,
    OddPrimeRequired,
    SearchExhausted,
)

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for w in _MR_WITNESSES:
        if n == w:
            return True
        if n % w == 0:
            return False
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for w in _MR_WITNESSES:
        x = pow(w, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# F_p[x] helpers for the irreducible-modulus search (dense lists, low first).


def _fp_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_rem(a, f, p):
    # remainder of a modulo monic f
    a = list(a)
    df = len(f) - 1
    while len(a) - 1 >= df and a:
        c = a[-1] % p
        if c:
            shift = len(a) - 1 - df
            for i, fc in enumerate(f):
                a[shift + i] = (a[shift + i] - c * fc) % p
        a.pop()
    return _fp_trim([c % p for c in a])


def _fp_mulmod(a, b, f, p):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _fp_rem(out, f, p)


def _fp_pow_x(e, f, p):
    # x^e modulo monic f over F_p, by binary exponentiation
    result = [1]
    base = _fp_rem([0, 1], f, p)
    while e:
        if e & 1:
            result = _fp_mulmod(result, base, f, p)
        base = _fp_mulmod(base, base, f, p)
        e >>= 1
    return result


def _fp_gcd(a, b, p):
    a, b = list(a), list(b)
    while b:
        inv = pow(b[-1], -1, p)
        bm = [(c * inv) % p for c in b]
        a, b = b, _fp_rem(a, bm, p)
    return a


def _is_irreducible_mod_p(coeffs, p):
    """Exact irreducibility test for a monic polynomial over F_p."""
    f = [c % p for c in coeffs]
    m = len(f) - 1
    if m == 1:
        return True
    # x^(p^m) must equal x mod f, and x^(p^(m/l)) - x must be coprime to f
    # for every prime divisor l of m.
    top = _fp_pow_x(p**m, f, p)
    x = _fp_rem([0, 1], f, p)
    if _fp_trim([(a - b) % p for a, b in _zip_pad(top, x)]):
        return False
    for ell in _prime_divisors(m):
        g = _fp_pow_x(p ** (m // ell), f, p)
        diff = _fp_trim([(a - b) % p for a, b in _zip_pad(g, x)])
        gcd = _fp_gcd(f, diff, p) if diff else f
        if len(gcd) - 1 > 0:
            return False
    return True


def _zip_pad(a, b):
    la, lb = len(a), len(b)
    n = max(la, lb)
    for i in range(n):
        yield (a[i] if i < la else 0), (b[i] if i < lb else 0)


def _prime_divisors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------


class PadicCtx:
    """Modulus data governing all coefficient arithmetic.

    Attributes:
        p: odd prime.
        N: precision exponent, arithmetic is exact modulo p**N.
        m: extension degree; m == 1 is the plain residue ring.
        modulus: monic degree-m polynomial, coefficient tuple low -> high,
            irreducible modulo p (for m == 1 it is the variable itself).
    """

    __slots__ = ("p", "N", "m", "modulus", "q", "_tail")

    def __init__(self, p, N, m, modulus):
        self.p = p
        self.N = N
        self.m = m
        self.modulus = tuple(modulus)
        self.q = p**N
        self._tail = self.modulus[:-1]

    # -- identity ----------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, PadicCtx)
            and (self.p, self.N, self.m, self.modulus)
            == (other.p, other.N, other.m, other.modulus)
        )

    def __hash__(self):
        return hash((self.p, self.N, self.m, self.modulus))

    def __repr__(self):
        return f"PadicCtx(p={self.p}, N={self.N}, m={self.m})"

    # -- element constructors ----------------------------------------------

    def zero(self):
        return 0 if self.m == 1 else (0,) * self.m

    def one(self):
        return 1 if self.m == 1 else (1,) + (0,) * (self.m - 1)

    def from_int(self, v):
        if self.m == 1:
            return v % self.q
        return (v % self.q,) + (0,) * (self.m - 1)

    def from_coeffs(self, coeffs):
        """Element from a basis-coefficient sequence (length <= m)."""
        cs = [c % self.q for c in coeffs]
        if self.m == 1:
            return cs[0] if cs else 0
        cs += [0] * (self.m - len(cs))
        return tuple(cs[: self.m])

    def coeffs(self, x):
        return (x,) if self.m == 1 else x

    def rand(self, rng):
        if self.m == 1:
            return rng.randrange(self.q)
        return tuple(rng.randrange(self.q) for _ in range(self.m))

    def rand_unit(self, rng):
        while True:
            x = self.rand(rng)
            if self.is_unit(x):
                return x

    # -- ring operations -----------------------------------------------------

    def add(self, a, b):
        if self.m == 1:
            return (a + b) % self.q
        q = self.q
        return tuple((x + y) % q for x, y in zip(a, b))

    def sub(self, a, b):
        if self.m == 1:
            return (a - b) % self.q
        q = self.q
        return tuple((x - y) % q for x, y in zip(a, b))

    def neg(self, a):
        if self.m == 1:
            return -a % self.q
        q = self.q
        return tuple(-x % q for x in a)

    def mul(self, a, b):
        if self.m == 1:
            return a * b % self.q
        return self._tuple_mul(a, b, self.q)

    def scal_int(self, a, k):
        """Multiply an element by a plain integer."""
        if self.m == 1:
            return a * k % self.q
        q = self.q
        return tuple(x * k % q for x in a)

    def _tuple_mul(self, a, b, q):
        m = self.m
        prod = [0] * (2 * m - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        tail = self._tail
        for k in range(2 * m - 2, m - 1, -1):
            ck = prod[k]
            if ck:
                base = k - m
                for t, mt in enumerate(tail):
                    if mt:
                        prod[base + t] -= ck * mt
        return tuple(c % q for c in prod[:m])

    def pow(self, a, e):
        if e < 0:
            return self.pow(self.inv(a), -e)
        if self.m == 1:
            return pow(a, e, self.q)
        result = self.one()
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def frob(self, a, k=1):
        """Frobenius on points: a -> a**(p**k), never a coefficient map."""
        return self.pow(a, self.p**k)

    # -- valuation and units -------------------------------------------------

    def is_zero(self, a):
        if self.m == 1:
            return a == 0
        return not any(a)

    def val(self, a):
        """Largest k <= N with a = 0 mod p^k; N stands for "at least N"."""
        if self.m == 1:
            return self._int_val(a)
        return min((self._int_val(c) for c in a), default=self.N)

    def _int_val(self, c):
        if c == 0:
            return self.N
        v = 0
        p = self.p
        while c % p == 0:
            c //= p
            v += 1
        return v

    def val_label(self, v):
        return f">={self.N}" if v >= self.N else str(v)

    def is_unit(self, a):
        return self.val(a) == 0

    def inv(self, a):
        """Inverse of a unit: invert in the residue field, then Hensel-double."""
        if not self.is_unit(a):
            raise NotAUnit(f"element has valuation {self.val(a)} > 0")
        p = self.p
        if self.m == 1:
            y = pow(a % p, -1, p)
        else:
            ap = tuple(c % p for c in a)
            # Fermat inverse in F_{p^m}
            y = self._field_pow(ap, p**self.m - 2)
        steps = max(1, (self.N - 1).bit_length())
        two = self.from_int(2)
        for _ in range(steps):
            y = self.mul(y, self.sub(two, self.mul(a, y)))
        return y

    def _field_pow(self, a, e):
        p = self.p
        result = (1,) + (0,) * (self.m - 1)
        base = a
        while e:
            if e & 1:
                result = self._tuple_mul(result, base, p)
            base = self._tuple_mul(base, base, p)
            e >>= 1
        return tuple(c % self.q for c in result)

    # -- Teichmueller lift ---------------------------------------------------

    def teichmueller(self, a):
        """The unique x with x^(p^m) = x mod p^N and x = a mod p.

        Computed by iterating x <- x^(p^m); each step gains at least one
        p-adic digit, so N iterations always suffice.  Zero maps to zero.
        """
        if self.m == 1:
            if a % self.p == 0:
                return 0
        elif all(c % self.p == 0 for c in a):
            return self.zero()
        e = self.p**self.m
        x = a
        for _ in range(self.N):
            nxt = self.pow(x, e)
            if nxt == x:
                break
            x = nxt
        return x

    # -- context conversions --------------------------------------------------

    def embed(self, other_ctx, x):
        """Map an element of a context with the same p, m and lower N here."""
        if (other_ctx.p, other_ctx.m) != (self.p, self.m):
            raise ValueError("incompatible contexts")
        return self.from_coeffs(other_ctx.coeffs(x))

    def reduce_to(self, other_ctx, x):
        """Reduce an element into a context with the same p, m and lower N."""
        return other_ctx.from_coeffs(self.coeffs(x))

    # -- serialization ---------------------------------------------------------

    def elem_to_json(self, x):
        return [str(c) for c in self.coeffs(x)]

    def elem_from_json(self, data):
        if isinstance(data, (int, str)):
            return self.from_int(int(data))
        return self.from_coeffs([int(c) for c in data])

    def to_json(self):
        return {"p": self.p, "N": self.N, "m": self.m, "modulus": list(self.modulus)}

    @classmethod
    def from_json(cls, data):
        return cls(int(data["p"]), int(data["N"]), int(data["m"]),
                   tuple(int(c) for c in data["modulus"]))


def ctx_new(p, N, m=1):
    """Build a context with the deterministic smallest irreducible modulus.

    The degree-m modulus is the lexicographically smallest monic irreducible
    polynomial over F_p (coefficients compared high degree first), lifted
    with coefficients in [0, p).
    """
    if p == 2:
        raise OddPrimeRequired("p = 2 is not supported")
    if p < 2 or not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if N < 1:
        raise ValueError("precision N must be >= 1")
    if m < 1:
        raise ValueError("extension degree m must be >= 1")
    if m == 1:
        return PadicCtx(p, N, 1, (0, 1))
    for k in range(p**m):
        digits = []
        kk = k
        for _ in range(m):
            digits.append(kk % p)
            kk //= p
        coeffs = tuple(digits) + (1,)
        if _is_irreducible_mod_p(coeffs, p):
            return PadicCtx(p, N, m, coeffs)
    raise SearchExhausted(f"no irreducible monic polynomial of degree {m} found")


def teichmueller(x, ctx):
    return ctx.teichmueller(x)


def valuation(x, ctx):
    return ctx.val(x)


def unit_inverse(x, ctx):
    return ctx.inv(x)
