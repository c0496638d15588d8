"""Hasse-Witt matrices of any level, symbolic in z or evaluated at a point.

For a Laurent polynomial F(t, z) with a single t variable, an ordered index
set Delta of size g, and a level m, the matrix is

    A(m, F) = ( coeff of t^(p^m * v - u) in F )_{u in Delta (rows), v (cols)}.

Symbolic entries are z-polynomials; evaluated entries are ring scalars
extracted from the dense specialization F(t, a), which is where factored
master polynomials pay off: one dense expansion serves the whole matrix and,
through synthetic division, all of its z-derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import dense, ringmat
from .errors import NotFactored, SingularModP, UnsupportedArity
from .laurent import LaurentPoly


@dataclass
class HWMatrix:
    ctx: object
    level: int
    delta: tuple
    entries: list
    pointwise: bool
    source: str = ""

    @property
    def g(self):
        return len(self.delta)

    def ring(self):
        if self.pointwise:
            return ringmat.scalar_ring(self.ctx)
        sample = self.entries[0][0]
        return ringmat.poly_ring(self.ctx, sample.r, sample.n)

    def min_valuation(self):
        return ringmat.min_val(self.ring(), self.entries)

    def to_json(self):
        if self.pointwise:
            ent = [[self.ctx.elem_to_json(x) for x in row] for row in self.entries]
        else:
            ent = [[x.to_json() for x in row] for row in self.entries]
        return {
            "level": self.level,
            "delta": list(self.delta),
            "pointwise": self.pointwise,
            "entries": ent,
        }


def _normalize_delta_ints(delta):
    out = []
    for d in delta:
        if isinstance(d, tuple):
            if len(d) != 1:
                raise UnsupportedArity("Hasse-Witt extraction needs r = 1")
            d = d[0]
        out.append(d)
    return tuple(out)


def hw_matrix(level, F, delta, source=""):
    """Symbolic Hasse-Witt matrix; entries are z-polynomials."""
    if F.r != 1:
        raise UnsupportedArity("Hasse-Witt extraction needs r = 1")
    delta = _normalize_delta_ints(delta)
    pm = F.ctx.p**level
    needed = {}
    for ui, u in enumerate(delta):
        for vi, v in enumerate(delta):
            needed.setdefault(pm * v - u, []).append((ui, vi))
    g = len(delta)
    dicts = [[{} for _ in range(g)] for _ in range(g)]
    for key, c in F.terms.items():
        slots = needed.get(key[0])
        if slots:
            for ui, vi in slots:
                dicts[ui][vi][key[1:]] = c
    entries = [
        [LaurentPoly(F.ctx, 0, F.n, dicts[ui][vi]) for vi in range(g)]
        for ui in range(g)
    ]
    return HWMatrix(F.ctx, level, delta, entries, False, source)


def hw_from_dense(ctx, level, offset, coeffs, delta, source=""):
    delta = _normalize_delta_ints(delta)
    pm = ctx.p**level
    zero = ctx.zero()
    entries = []
    for u in delta:
        row = []
        for v in delta:
            idx = pm * v - u - offset
            row.append(coeffs[idx] if 0 <= idx < len(coeffs) else zero)
        entries.append(row)
    return HWMatrix(ctx, level, delta, entries, True, source)


def hw_matrix_at(level, F, delta, a, source=""):
    """Hasse-Witt matrix evaluated at the point a (z = a)."""
    off, co = F.dense_t(a)
    return hw_from_dense(F.ctx, level, off, co, delta, source)


def hw_eval(Aw, a):
    """Point evaluation of a symbolic matrix (consistency path)."""
    entries = [[entry.eval_z(a).eval_all([], []) for entry in row] for row in Aw.entries]
    return HWMatrix(Aw.ctx, Aw.level, Aw.delta, entries, True, Aw.source)


def hw_sigma(Aw, k=1):
    """Frobenius twist z -> z^(p^k) of a symbolic matrix."""
    if Aw.pointwise:
        raise UnsupportedArity("twist pointwise matrices by evaluating at a^(p^k)")
    entries = [[entry.frobenius_sub(k) for entry in row] for row in Aw.entries]
    return HWMatrix(Aw.ctx, Aw.level, Aw.delta, entries, False, Aw.source)


def hw_partial_z(Aw, i):
    entries = [[entry.partial_z(i) for entry in row] for row in Aw.entries]
    return HWMatrix(Aw.ctx, Aw.level, Aw.delta, entries, False, Aw.source)


def hw_det(Aw):
    return ringmat.det(Aw.ring(), Aw.entries)


def hw_inverse_at(Aw):
    if not Aw.pointwise:
        raise UnsupportedArity("symbolic inverses are handled by clearing denominators")
    det = hw_det(Aw)
    if not Aw.ctx.is_unit(det):
        raise SingularModP(
            f"determinant has valuation {Aw.ctx.val(det)} > 0"
        )
    inv = ringmat.mat_inv_scalar(Aw.ctx, Aw.entries)
    return HWMatrix(Aw.ctx, Aw.level, Aw.delta, inv, True, Aw.source)


class DenseCache:
    """Caches dense specializations F(t, a) keyed by factored form and point."""

    def __init__(self):
        self._store = {}

    def get(self, F, a):
        a = tuple(a)
        key = (F.ctx, F.factored, a) if F.factored is not None else None
        if key is not None:
            got = self._store.get(key)
            if got is not None:
                return got
        val = F.dense_t(a)
        if key is not None:
            self._store[key] = val
        return val


def _factored_mult(F, z_index):
    if F.factored is None:
        raise NotFactored("operation needs a factored master-polynomial shape")
    for (kind, val), e in F.factored:
        if kind == "z" and val == z_index:
            return e
    return 0


def hw_derivative_at(level, F, delta, a, v, cache=None, source=""):
    """Entries coeff_(p^level w - u)(dF/dz_v) at the point a, for factored F.

    dF/dz_v = -e_v * F / (t - z_v) when (t - z_v) occurs with multiplicity
    e_v, so one synthetic division of the cached dense form suffices.
    """
    ctx = F.ctx
    ev = _factored_mult(F, v)
    delta = _normalize_delta_ints(delta)
    if ev % ctx.q == 0:
        g = len(delta)
        zero = ctx.zero()
        return HWMatrix(ctx, level, delta, [[zero] * g for _ in range(g)], True, source)
    cache = cache or DenseCache()
    off, co = cache.get(F, a)
    quot = dense.dense_div_linear_exact(ctx, co, a[v - 1])
    scale = ctx.from_int(-ev)
    quot = [ctx.mul(scale, c) for c in quot]
    return hw_from_dense(ctx, level, off, quot, delta, source)


def hw_second_derivative_at(level, F, delta, a, u, v, cache=None, source=""):
    """Second partials d2F/(dz_u dz_v) of a factored F, at the point a.

    With multiplicities e_u, e_v this is e_u (e_v - [u == v]) * F divided by
    (t - z_u)(t - z_v); the diagonal case needs multiplicity >= 2.
    """
    ctx = F.ctx
    eu = _factored_mult(F, u)
    ev = _factored_mult(F, v)
    factor = eu * (ev - 1) if u == v else eu * ev
    delta = _normalize_delta_ints(delta)
    if factor % ctx.q == 0 or eu == 0 or ev == 0:
        g = len(delta)
        zero = ctx.zero()
        return HWMatrix(ctx, level, delta, [[zero] * g for _ in range(g)], True, source)
    cache = cache or DenseCache()
    off, co = cache.get(F, a)
    quot = dense.dense_div_linear_exact(ctx, co, a[u - 1])
    quot = dense.dense_div_linear_exact(ctx, quot, a[v - 1])
    scale = ctx.from_int(factor)
    quot = [ctx.mul(scale, c) for c in quot]
    return hw_from_dense(ctx, level, off, quot, delta, source)
