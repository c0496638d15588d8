"""Ghost sequences and Delta-admissibility of polynomial tuples.

Given a tuple (L_0, ..., L_l) of Laurent polynomials, the products

    W_s        = L_0 * L_1^p * ... * L_s^(p^s)
    W_s^(j)    = L_j * L_{j+1}^p * ... * L_s^(p^(s-j))

decompose through Frobenius twists by way of the ghost polynomials V_s,
defined recursively by

    V_s(x) = W_s(x) - sum_{j=1..s} V_{j-1}(x) * W_s^(j)(x^(p^j)),

with V_0 = L_0.  Every coefficient of V_s is divisible by p^s, which is the
engine behind all congruence verifiers in this package.

Admissibility of a tuple of t-support boxes with respect to a finite set
Delta is decided exactly by interval arithmetic; for infinite constant
tuples the q-ranges are monotone in the window length, so the check detects
stabilization and returns a verdict valid for every window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    CtxMismatch,
    IndexOutOfRange,
    NotAdmissible,
    PrecisionTooLow,
    UnsupportedArity,
)
from .laurent import LaurentPoly, TBox

ENUM_CAP = 100_000
_STAB_HARD_CAP = 10_000


@dataclass
class AdmissibilityCertificate:
    ok: bool
    complete: bool  # True when valid for all window lengths
    checked_depth: int
    witness: dict | None = None


@dataclass(eq=False)
class AdmissibleTuple:
    """A tuple of Laurent polynomials with its admissibility certificate.

    ``periodic=True`` means the infinite tuple obtained by repeating
    ``lams`` cyclically; the finite case is the tuple itself.
    """

    lams: tuple
    delta: tuple
    periodic: bool = False
    depth: int = 8
    source: str = ""
    certificate: AdmissibilityCertificate = None
    _w_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.lams = tuple(self.lams)
        first = self.lams[0]
        for lam in self.lams:
            if (lam.ctx, lam.r, lam.n) != (first.ctx, first.r, first.n):
                raise CtxMismatch("tuple members live in different rings")
        self.delta = normalize_delta(self.delta, first.r)
        if self.certificate is None:
            boxes = [lam.newton_box() for lam in self.lams]
            self.certificate = check_admissible_boxes(
                boxes, self.delta, first.ctx.p,
                periodic=self.periodic, depth=self.depth,
            )

    @property
    def ctx(self):
        return self.lams[0].ctx

    @property
    def g(self):
        return len(self.delta)

    @property
    def last_index(self):
        return None if self.periodic else len(self.lams) - 1

    def lam(self, idx):
        if idx < 0:
            raise IndexOutOfRange(f"index {idx} is negative")
        if self.periodic:
            return self.lams[idx % len(self.lams)]
        if idx >= len(self.lams):
            raise IndexOutOfRange(f"index {idx} exceeds tuple length")
        return self.lams[idx]

    def require_admissible(self):
        if not self.certificate.ok:
            raise NotAdmissible(f"tuple is not admissible: {self.certificate.witness}")

    def W(self, s, j=0):
        """The product L_j * L_{j+1}^p * ... * L_s^(p^(s-j))."""
        if not 0 <= j <= s:
            raise IndexOutOfRange(f"need 0 <= j <= s, got j={j}, s={s}")
        if not self.periodic and s >= len(self.lams):
            raise IndexOutOfRange(f"s={s} exceeds tuple length")
        key = (s, j)
        got = self._w_cache.get(key)
        if got is None:
            p = self.ctx.p
            got = self.lam(j)
            for k in range(j + 1, s + 1):
                got = got * (self.lam(k) ** (p ** (k - j)))
            self._w_cache[key] = got
        return got


def big_product(tup, s, j):
    return tup.W(s, j)


@dataclass
class GhostSeq:
    tup: AdmissibleTuple
    V: list
    min_vals: list


def ghost_sequence(tup, l):
    """Compute V_0, ..., V_l; working precision must satisfy N >= l."""
    ctx = tup.ctx
    if ctx.N < l:
        raise PrecisionTooLow(
            f"precision N={ctx.N} cannot witness divisibility up to p^{l}"
        )
    V = []
    for s in range(l + 1):
        acc = tup.W(s, 0)
        # force expansion once so the subtraction below stays sparse
        acc = LaurentPoly(ctx, acc.r, acc.n, dict(acc.terms))
        for j in range(1, s + 1):
            twisted = tup.W(s, j).frobenius_sub(j)
            acc = acc - (V[j - 1] * twisted)
        V.append(acc)
    min_vals = [v.valuation() for v in V]
    for s, v in enumerate(min_vals):
        if v < min(s, ctx.N):
            raise AssertionError(
                f"ghost divisibility violated at s={s}: valuation {v}"
            )
    return GhostSeq(tup, V, min_vals)


# ---------------------------------------------------------------------------
# admissibility


def normalize_delta(delta, r):
    out = []
    for d in delta:
        if isinstance(d, int):
            if r != 1:
                raise UnsupportedArity("integer Delta elements need r = 1")
            out.append((d,))
        else:
            d = tuple(d)
            if len(d) != r:
                raise UnsupportedArity("Delta element arity mismatch")
            out.append(d)
    if not out:
        raise ValueError("Delta must be nonempty")
    return tuple(sorted(set(out)))


def _as_box(b, r):
    if isinstance(b, TBox):
        return b
    lo, hi = b
    if isinstance(lo, int):
        lo, hi = (lo,), (hi,)
    if len(lo) != r or len(hi) != r:
        raise UnsupportedArity("box arity mismatch")
    return TBox(tuple(lo), tuple(hi))


def _ceil_div(a, b):
    return -((-a) // b)


def _window_ok(boxes, delta, p, i, j, lam_at):
    """Check one window (N_i, ..., N_j); returns None or a witness dict."""
    r = len(delta[0])
    w = j - i + 1
    pw = p**w
    lo = [0] * r
    hi = [0] * r
    scale = 1
    for k in range(i, j + 1):
        box = lam_at(k)
        for d in range(r):
            lo[d] += scale * box.lo[d]
            hi[d] += scale * box.hi[d]
        scale *= p
    dset = set(delta)
    for dl in delta:
        ranges = []
        total = 1
        for d in range(r):
            qlo = _ceil_div(dl[d] + lo[d], pw)
            qhi = (dl[d] + hi[d]) // pw
            if qhi < qlo:
                total = 0
                break
            ranges.append(range(qlo, qhi + 1))
            total *= qhi - qlo + 1
        if total == 0:
            continue
        if total > ENUM_CAP:
            raise UnsupportedArity(
                f"window enumeration needs {total} lattice points (cap {ENUM_CAP})"
            )

        def walk(dim, prefix):
            if dim == r:
                if tuple(prefix) not in dset:
                    return tuple(prefix)
                return None
            for q in ranges[dim]:
                bad = walk(dim + 1, prefix + [q])
                if bad is not None:
                    return bad
            return None

        bad = walk(0, [])
        if bad is not None:
            return {"i": i, "j": j, "delta": dl, "q": bad}
    return None


def _constant_ok(box, delta, p):
    """All-window check for the constant infinite tuple (N, N, ...)."""
    r = len(delta[0])
    dset = set(delta)
    limits = []
    for dl in delta:
        per_dim = []
        for d in range(r):
            L_hi = Fraction(box.hi[d], p - 1)
            L_lo = Fraction(box.lo[d], p - 1)
            c_hi = dl[d] - L_hi
            c_lo = dl[d] - L_lo
            if c_hi < 0 and L_hi.denominator == 1:
                lim_hi = int(L_hi) - 1
            else:
                lim_hi = L_hi.__floor__()
            if c_lo > 0 and L_lo.denominator == 1:
                lim_lo = int(L_lo) + 1
            else:
                lim_lo = L_lo.__ceil__()
            per_dim.append((lim_lo, lim_hi))
        limits.append(per_dim)
    w = 0
    pw = 1
    S = 0
    while True:
        w += 1
        S += pw  # S_w = 1 + p + ... + p^(w-1)
        pw *= p
        all_stable = True
        for dl, per_dim in zip(delta, limits):
            ranges = []
            empty = False
            for d in range(r):
                qlo = _ceil_div(dl[d] + box.lo[d] * S, pw)
                qhi = (dl[d] + box.hi[d] * S) // pw
                if (qlo, qhi) != per_dim[d]:
                    all_stable = False
                if qhi < qlo:
                    empty = True
                    break
                ranges.append(range(qlo, qhi + 1))
            if empty:
                continue
            total = 1
            for rg in ranges:
                total *= len(rg)
            if total > ENUM_CAP:
                raise UnsupportedArity("window enumeration exceeds the cap")

            def walk(dim, prefix):
                if dim == r:
                    return None if tuple(prefix) in dset else tuple(prefix)
                for q in ranges[dim]:
                    bad = walk(dim + 1, prefix + [q])
                    if bad is not None:
                        return bad
                return None

            bad = walk(0, [])
            if bad is not None:
                return False, w, {"window_length": w, "delta": dl, "q": bad}
        if all_stable:
            return True, w, None
        if w > _STAB_HARD_CAP:
            raise UnsupportedArity("stabilization not reached")


def check_admissible_boxes(boxes, delta, p, periodic=False, depth=8):
    """Decide Delta-admissibility of a tuple of t-support boxes.

    For a finite tuple the windows (i, j) with 0 <= i <= j < l are checked
    exactly.  For the infinite constant tuple the verdict covers all window
    lengths (stabilization); other periodic patterns are checked up to
    ``depth`` and flagged as depth-bounded.
    """
    delta = normalize_delta(delta, _infer_r(boxes))
    boxes = [_as_box(b, len(delta[0])) for b in boxes]
    if not periodic:
        l = len(boxes) - 1
        for i in range(l):
            for j in range(i, l):
                bad = _window_ok(boxes, delta, p, i, j, lambda k: boxes[k])
                if bad is not None:
                    return AdmissibilityCertificate(False, True, l, bad)
        return AdmissibilityCertificate(True, True, l)
    if all(b == boxes[0] for b in boxes):
        ok, w, witness = _constant_ok(boxes[0], delta, p)
        return AdmissibilityCertificate(ok, True, w, witness)
    f = len(boxes)
    for i in range(f):
        for length in range(1, depth + 1):
            j = i + length - 1
            bad = _window_ok(
                boxes, delta, p, i, j, lambda k: boxes[k % f]
            )
            if bad is not None:
                return AdmissibilityCertificate(False, False, depth, bad)
    return AdmissibilityCertificate(True, False, depth)


def _infer_r(boxes):
    b = boxes[0]
    if isinstance(b, TBox):
        return len(b.lo)
    lo = b[0]
    return 1 if isinstance(lo, int) else len(lo)


def check_admissible(tuple_or_boxes, delta, p=None, periodic=False, depth=8):
    """Entry point accepting an AdmissibleTuple, polynomials, or boxes."""
    if isinstance(tuple_or_boxes, AdmissibleTuple):
        tup = tuple_or_boxes
        boxes = [lam.newton_box() for lam in tup.lams]
        return check_admissible_boxes(
            boxes, delta or tup.delta, tup.ctx.p,
            periodic=tup.periodic, depth=depth,
        )
    items = list(tuple_or_boxes)
    if items and isinstance(items[0], LaurentPoly):
        if p is None:
            p = items[0].ctx.p
        boxes = [f.newton_box() for f in items]
        return check_admissible_boxes(boxes, delta, p, periodic=periodic, depth=depth)
    if p is None:
        raise ValueError("p is required when passing raw boxes")
    return check_admissible_boxes(items, delta, p, periodic=periodic, depth=depth)
