"""Sparse multivariate Laurent polynomials over a PadicCtx.

Variables come in two blocks: r "t" variables followed by n "z" variables.
A polynomial is a map from exponent vectors (tuples of r + n signed ints) to
nonzero coefficients.  Master-polynomial shapes additionally carry a factored
form, a multiset of monic linear factors (t - z_i) or (t - c); the factored
form is load-bearing: products, powers, synthetic division and derivatives of
master polynomials never expand symbolically, and specialization at a point
drops into the dense univariate kernels.

Symbolic expansion is guarded by a soft term cap; configurations beyond it
must use the pointwise pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import dense
from .errors import (
    CtxMismatch,
    NonUnitAtNegativeExponent,
    NotDivisible,
    NotFactored,
    SizeCapExceeded,
    UnsupportedArity,
    ZeroPolynomial,
)

SOFT_TERM_CAP = 10_000_000
PAIR_CAP = 60_000_000


@dataclass(frozen=True)
class TBox:
    """Bounding box of the t-support; the exact Newton polytope for r = 1."""

    lo: tuple
    hi: tuple

    def __add__(self, other):
        return TBox(
            tuple(a + b for a, b in zip(self.lo, other.lo)),
            tuple(a + b for a, b in zip(self.hi, other.hi)),
        )

    def scale(self, k):
        return TBox(tuple(a * k for a in self.lo), tuple(a * k for a in self.hi))

    def contains(self, other):
        return all(a <= b for a, b in zip(self.lo, other.lo)) and all(
            a >= b for a, b in zip(self.hi, other.hi)
        )


class LaurentPoly:
    __slots__ = ("ctx", "r", "n", "_terms", "factored")

    def __init__(self, ctx, r, n, terms=None, factored=None):
        self.ctx = ctx
        self.r = r
        self.n = n
        self._terms = terms
        self.factored = factored  # tuple of ((kind, value), mult)

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, ctx, r, n):
        return cls(ctx, r, n, {})

    @classmethod
    def const(cls, ctx, r, n, c):
        if isinstance(c, int):
            c = ctx.from_int(c)
        if ctx.is_zero(c):
            return cls.zero(ctx, r, n)
        return cls(ctx, r, n, {(0,) * (r + n): c})

    @classmethod
    def one(cls, ctx, r, n):
        return cls.const(ctx, r, n, 1)

    @classmethod
    def t_var(cls, ctx, r, n, j=1):
        key = [0] * (r + n)
        key[j - 1] = 1
        return cls(ctx, r, n, {tuple(key): ctx.one()})

    @classmethod
    def z_var(cls, ctx, r, n, i):
        key = [0] * (r + n)
        key[r + i - 1] = 1
        return cls(ctx, r, n, {tuple(key): ctx.one()})

    @classmethod
    def from_int_terms(cls, ctx, r, n, int_terms):
        terms = {}
        for key, c in int_terms.items():
            v = ctx.from_int(c) if isinstance(c, int) else c
            if not ctx.is_zero(v):
                terms[tuple(key)] = v
        return cls(ctx, r, n, terms)

    @classmethod
    def from_factors(cls, ctx, n, factors):
        """Monic product of linear factors in the single t variable.

        ``factors`` is an iterable of ((kind, value), mult) with kind "z"
        (value a 1-based z index) or "c" (value a ring element).
        """
        fac = tuple(((k, v), e) for (k, v), e in factors if e > 0)
        return cls(ctx, 1, n, None, fac)

    # -- expansion ------------------------------------------------------------

    @property
    def terms(self):
        if self._terms is None:
            self._terms = self._expand_factored()
        return self._terms

    def is_expanded(self):
        return self._terms is not None

    def _expand_factored(self):
        ctx = self.ctx
        scalar = [(v, e) for (k, v), e in self.factored if k == "c"]
        zfac = [(i, e) for (k, i), e in self.factored if k == "z"]
        est = 1 + sum(e for _, e in scalar)
        for _, e in zfac:
            est *= e + 1
            if est > SOFT_TERM_CAP:
                raise SizeCapExceeded(
                    f"factored expansion would exceed {SOFT_TERM_CAP} terms"
                )
        width = self.r + self.n
        acc = None
        if scalar:
            co = dense.dense_from_roots(ctx, scalar)
            acc = {}
            for k, c in enumerate(co):
                if not ctx.is_zero(c):
                    key = [0] * width
                    key[0] = k
                    acc[tuple(key)] = c
        for i, e in zfac:
            fac_terms = {}
            neg = ctx.neg(ctx.one())
            pw = ctx.one()
            for k in range(e, -1, -1):
                c = ctx.scal_int(pw, math.comb(e, k))
                if not ctx.is_zero(c):
                    key = [0] * width
                    key[0] = k
                    key[self.r + i - 1] = e - k
                    fac_terms[tuple(key)] = c
                pw = ctx.mul(pw, neg)
            acc = fac_terms if acc is None else _convolve(ctx, acc, fac_terms)
        if acc is None:
            acc = {(0,) * width: ctx.one()}
        return acc

    # -- basics -----------------------------------------------------------------

    def _check_compatible(self, other):
        if (
            self.ctx != other.ctx
            or self.r != other.r
            or self.n != other.n
        ):
            raise CtxMismatch("operands live in different rings")

    def is_zero(self):
        return not self.terms

    def term_count(self):
        return len(self.terms)

    def copy_with(self, terms):
        return LaurentPoly(self.ctx, self.r, self.n, terms)

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return (
            self.ctx == other.ctx
            and self.r == other.r
            and self.n == other.n
            and self.terms == other.terms
        )

    __hash__ = None

    def __repr__(self):
        k = "..." if self._terms is None else len(self._terms)
        return f"LaurentPoly(r={self.r}, n={self.n}, terms={k})"

    # -- ring ops ------------------------------------------------------------------

    def __add__(self, other):
        self._check_compatible(other)
        ctx = self.ctx
        out = dict(self.terms)
        for key, c in other.terms.items():
            cur = out.get(key)
            v = c if cur is None else ctx.add(cur, c)
            if ctx.is_zero(v):
                out.pop(key, None)
            else:
                out[key] = v
        return self.copy_with(out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        ctx = self.ctx
        return self.copy_with({k: ctx.neg(c) for k, c in self.terms.items()})

    def cmul(self, c):
        """Multiply by a ring element."""
        ctx = self.ctx
        if isinstance(c, int):
            c = ctx.from_int(c)
        if ctx.is_zero(c):
            return LaurentPoly.zero(ctx, self.r, self.n)
        out = {}
        for key, v in self.terms.items():
            w = ctx.mul(v, c)
            if not ctx.is_zero(w):
                out[key] = w
        return self.copy_with(out)

    def __mul__(self, other):
        self._check_compatible(other)
        if self.factored is not None and other.factored is not None:
            merged = {}
            for f, e in self.factored:
                merged[f] = merged.get(f, 0) + e
            for f, e in other.factored:
                merged[f] = merged.get(f, 0) + e
            return LaurentPoly(
                self.ctx, self.r, self.n, None,
                tuple(sorted(merged.items(), key=_factor_key)),
            )
        a, b = self.terms, other.terms
        if len(a) * len(b) > PAIR_CAP:
            raise SizeCapExceeded("product would exceed the convolution cap")
        return self.copy_with(_convolve(self.ctx, a, b))

    def __pow__(self, e):
        if e < 0:
            raise ValueError("negative powers are not supported")
        if e == 0:
            return LaurentPoly.one(self.ctx, self.r, self.n)
        if self.factored is not None:
            return LaurentPoly(
                self.ctx, self.r, self.n, None,
                tuple((f, k * e) for f, k in self.factored),
            )
        result = None
        base = self
        while e:
            if e & 1:
                result = base if result is None else result * base
            e >>= 1
            if e:
                base = base * base
        return result

    # -- structural ops -----------------------------------------------------------

    def frobenius_sub(self, k):
        """Substitute every variable x by x^(p^k): exponents scale by p^k."""
        if k == 0:
            return self
        s = self.ctx.p**k
        return self.copy_with(
            {tuple(e * s for e in key): c for key, c in self.terms.items()}
        )

    def coeff_t(self, v):
        """Coefficient of t^v; the result is a z-only polynomial (r = 0)."""
        if isinstance(v, int):
            v = (v,)
        if len(v) != self.r:
            raise UnsupportedArity("t-exponent arity mismatch")
        out = {}
        for key, c in self.terms.items():
            if key[: self.r] == v:
                out[key[self.r:]] = c
        return LaurentPoly(self.ctx, 0, self.n, out)

    def partial_z(self, i):
        if not 1 <= i <= self.n:
            raise UnsupportedArity(f"z-index {i} out of range")
        ctx = self.ctx
        pos = self.r + i - 1
        out = {}
        for key, c in self.terms.items():
            e = key[pos]
            if e == 0:
                continue
            w = ctx.scal_int(c, e)
            if ctx.is_zero(w):
                continue
            nk = key[:pos] + (e - 1,) + key[pos + 1:]
            out[nk] = w
        return self.copy_with(out)

    def partial_t(self, j=1):
        if not 1 <= j <= self.r:
            raise UnsupportedArity(f"t-index {j} out of range")
        ctx = self.ctx
        pos = j - 1
        out = {}
        for key, c in self.terms.items():
            e = key[pos]
            if e == 0:
                continue
            w = ctx.scal_int(c, e)
            if ctx.is_zero(w):
                continue
            nk = key[:pos] + (e - 1,) + key[pos + 1:]
            out[nk] = w
        return self.copy_with(out)

    def eval_z(self, a):
        """Substitute z = a; the result keeps r and has no z variables."""
        ctx = self.ctx
        if len(a) != self.n:
            raise UnsupportedArity("point arity mismatch")
        a = [ctx.from_int(x) if isinstance(x, int) else x for x in a]
        if self.factored is not None:
            fac = []
            for (kind, val), e in self.factored:
                if kind == "z":
                    fac.append((("c", a[val - 1]), e))
                else:
                    fac.append(((kind, val), e))
            return LaurentPoly(ctx, self.r, 0, None, tuple(fac))
        powers = {}

        def zpow(i, e):
            key = (i, e)
            got = powers.get(key)
            if got is None:
                base = a[i]
                if e < 0:
                    if not ctx.is_unit(base):
                        raise NonUnitAtNegativeExponent(
                            f"coordinate {i + 1} is not a unit"
                        )
                    got = ctx.pow(ctx.inv(base), -e)
                else:
                    got = ctx.pow(base, e)
                powers[key] = got
            return got

        out = {}
        for key, c in self.terms.items():
            v = c
            for i in range(self.n):
                e = key[self.r + i]
                if e:
                    v = ctx.mul(v, zpow(i, e))
            if ctx.is_zero(v):
                continue
            tkey = key[: self.r]
            cur = out.get(tkey)
            v = v if cur is None else ctx.add(cur, v)
            if ctx.is_zero(v):
                out.pop(tkey, None)
            else:
                out[tkey] = v
        return LaurentPoly(ctx, self.r, 0, out)

    def eval_all(self, tvals, zvals):
        """Full evaluation to a ring element."""
        spec = self.eval_z(zvals) if self.n else self
        ctx = self.ctx
        tvals = [ctx.from_int(x) if isinstance(x, int) else x for x in tvals]
        acc = ctx.zero()
        for key, c in spec.terms.items():
            v = c
            for j in range(self.r):
                e = key[j]
                if e:
                    base = tvals[j]
                    if e < 0:
                        base = ctx.inv(base)
                        e = -e
                    v = ctx.mul(v, ctx.pow(base, e))
            acc = ctx.add(acc, v)
        return acc

    def synth_div_linear(self, z_index=None, scalar=None):
        """Exact quotient by (t - z_i) or (t - scalar); r must be 1."""
        if self.r != 1:
            raise UnsupportedArity("synthetic division needs a single t variable")
        if (z_index is None) == (scalar is None):
            raise ValueError("give exactly one of z_index or scalar")
        ctx = self.ctx
        if self.factored is not None:
            target = ("z", z_index) if z_index is not None else ("c", scalar)
            out = []
            found = False
            for f, e in self.factored:
                if not found and f == target:
                    found = True
                    if e > 1:
                        out.append((f, e - 1))
                else:
                    out.append((f, e))
            if not found:
                raise NotDivisible("factor not present in the factored form")
            return LaurentPoly(ctx, 1, self.n, None, tuple(out))
        # group terms by t-exponent; coefficients are z-only term dicts
        by_t = {}
        for key, c in self.terms.items():
            by_t.setdefault(key[0], {})[key[1:]] = c
        if not by_t:
            raise NotDivisible("cannot divide the zero polynomial")
        lo = min(by_t)
        hi = max(by_t)
        if z_index is not None:
            pos = z_index - 1

            def mul_root(d):
                return {
                    k[:pos] + (k[pos] + 1,) + k[pos + 1:]: c for k, c in d.items()
                }
        else:
            root = ctx.from_int(scalar) if isinstance(scalar, int) else scalar

            def mul_root(d):
                out = {}
                for k, c in d.items():
                    v = ctx.mul(c, root)
                    if not ctx.is_zero(v):
                        out[k] = v
                return out

        def z_add(d1, d2):
            out = dict(d1)
            for k, c in d2.items():
                cur = out.get(k)
                v = c if cur is None else ctx.add(cur, c)
                if ctx.is_zero(v):
                    out.pop(k, None)
                else:
                    out[k] = v
            return out

        quot = {}
        acc = by_t.get(hi, {})
        for k in range(hi - 1, lo - 1, -1):
            if acc:
                quot[k] = acc
            acc = z_add(by_t.get(k, {}), mul_root(acc))
        if acc:
            raise NotDivisible("nonzero remainder")
        out = {}
        for k, d in quot.items():
            for zk, c in d.items():
                out[(k,) + zk] = c
        return LaurentPoly(ctx, 1, self.n, out)

    def newton_box(self):
        """Componentwise min/max of the t-exponents over the support."""
        if self.factored is not None:
            if all(kind == "z" for (kind, _), _ in self.factored):
                d = sum(e for _, e in self.factored)
                return TBox((0,) * self.r, (d,) + (0,) * (self.r - 1))
        if not self.terms:
            raise ZeroPolynomial("the zero polynomial has no Newton polytope")
        keys = [key[: self.r] for key in self.terms]
        lo = tuple(min(k[i] for k in keys) for i in range(self.r))
        hi = tuple(max(k[i] for k in keys) for i in range(self.r))
        return TBox(lo, hi)

    def leading_term_lex(self):
        """Largest term for the lexicographic order with z1 > z2 > ...; r = 0."""
        if self.r != 0:
            raise UnsupportedArity("leading term is defined for z-only polynomials")
        if not self.terms:
            raise ZeroPolynomial("the zero polynomial has no leading term")
        key = max(self.terms)
        return self.terms[key], key

    def valuation(self):
        ctx = self.ctx
        return min((ctx.val(c) for c in self.terms.values()), default=ctx.N)

    # -- dense bridge ------------------------------------------------------------

    def dense_t(self, a=None):
        """Dense coefficient list in t: returns (offset, coeffs).

        For n > 0 a point ``a`` is required and substituted first.  Factored
        forms expand through the dense kernels without touching the sparse
        representation.
        """
        if self.r != 1:
            raise UnsupportedArity("dense form needs a single t variable")
        ctx = self.ctx
        if self.factored is not None:
            if any(kind == "z" for (kind, _), _ in self.factored):
                if a is None:
                    raise NotFactored("symbolic factored form needs a point")
                poly = self.eval_z(a)
            else:
                poly = self
            roots = [(val, e) for (_, val), e in poly.factored]
            return 0, dense.dense_from_roots(ctx, roots)
        poly = self.eval_z(a) if self.n else self
        if not poly.terms:
            return 0, []
        lo = min(k[0] for k in poly.terms)
        hi = max(k[0] for k in poly.terms)
        out = [ctx.zero()] * (hi - lo + 1)
        for key, c in poly.terms.items():
            out[key[0] - lo] = c
        return lo, out

    @classmethod
    def from_dense(cls, ctx, coeffs, offset=0, n=0):
        terms = {}
        for k, c in enumerate(coeffs):
            if not ctx.is_zero(c):
                terms[(offset + k,) + (0,) * n] = c
        return cls(ctx, 1, n, terms)

    # -- serialization -------------------------------------------------------------

    def to_json(self):
        ctx = self.ctx
        items = []
        for key in sorted(self.terms):
            c = self.terms[key]
            cval = str(c) if ctx.m == 1 else [str(x) for x in c]
            items.append(
                {"t": list(key[: self.r]), "z": list(key[self.r:]), "c": cval}
            )
        return {"r": self.r, "n": self.n, "terms": items}

    @classmethod
    def from_json(cls, ctx, data):
        r, n = int(data["r"]), int(data["n"])
        terms = {}
        for item in data["terms"]:
            key = tuple(int(e) for e in item["t"]) + tuple(int(e) for e in item["z"])
            c = ctx.elem_from_json(item["c"])
            if not ctx.is_zero(c):
                terms[key] = c
        return cls(ctx, r, n, terms)


def _factor_key(item):
    (kind, val), _ = item
    return (kind, val if kind == "z" else str(val))


def _convolve(ctx, a, b):
    from operator import add as _iadd

    if len(a) > len(b):
        a, b = b, a
    out = {}
    if ctx.m == 1:
        q = ctx.q
        get = out.get
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                key = tuple(map(_iadd, e1, e2))
                out[key] = get(key, 0) + c1 * c2
        return {k: v2 for k, v in out.items() if (v2 := v % q)}
    mul, add, is_zero = ctx.mul, ctx.add, ctx.is_zero
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            key = tuple(map(_iadd, e1, e2))
            v = mul(c1, c2)
            cur = out.get(key)
            if cur is not None:
                v = add(cur, v)
            out[key] = v
    return {k: v for k, v in out.items() if not is_zero(v)}


# -- free-function aliases matching the operation surface ---------------------


def poly_mul(f, g):
    return f * g


def poly_pow(f, e):
    return f**e


def frobenius_sub(f, k):
    return f.frobenius_sub(k)


def coeff_t(f, v):
    return f.coeff_t(v)


def partial_z(f, i):
    return f.partial_z(i)


def eval_z(f, a):
    return f.eval_z(a)


def synth_div_linear(f, z_index=None, scalar=None):
    return f.synth_div_linear(z_index=z_index, scalar=scalar)


def newton_box(f):
    return f.newton_box()


def leading_term_lex(f):
    return f.leading_term_lex()
