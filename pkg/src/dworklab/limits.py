"""Domain enumeration and finite-precision limit certification.

Points live in the unramified extension of degree m, anchored at
Teichmueller lifts so the sigma twist acts by exponentiation without
precision loss.  Membership in the unit-determinant domain is a mod-p
condition on residues; the o-domain additionally demands pairwise distinct
residues, which keeps every Gaudin denominator integral.

The limits themselves are approximated by iterating the congruence ratios:
the valuation of consecutive differences must grow by at least one per
level (Dwork decay), which is the numerical shadow of the convergence
theorems.  Certificates pass at valuation >= s_max - 1, one digit of
headroom below the raw expectation; raw valuations are always reported.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from . import ringmat
from .concurrency import pool_map
from .errors import OutsideDomain, TooLarge
from .hasse_witt import (
    DenseCache,
    hw_det,
    hw_matrix_at,
    hw_derivative_at,
)
from .kz import (
    KZConfig,
    gaudin,
    master_polynomial,
    ps_solution_derivative,
    ps_solutions,
)
from .padic import ctx_new

EXHAUSTIVE_CAP = 10_000_000


@dataclass
class DomainPoint:
    residues: tuple
    lift: tuple | None
    in_D: bool
    in_D_o: bool
    index: int

    def to_json(self, residue_ctx, lift_ctx=None):
        out = {
            "index": self.index,
            "residues": [residue_ctx.elem_to_json(u) for u in self.residues],
            "in_D": self.in_D,
            "in_D_o": self.in_D_o,
        }
        if self.lift is not None and lift_ctx is not None:
            out["lift"] = [lift_ctx.elem_to_json(x) for x in self.lift]
        return out


@dataclass
class ScanResult:
    p: int
    g: int
    m: int
    mode: str
    total: int
    in_d_count: int
    in_do_count: int
    degree_bound: int
    nonempty_bound: int | None
    points: list = field(default_factory=list)
    seed: int | None = None

    def to_json(self, residue_ctx):
        return {
            "p": self.p,
            "g": self.g,
            "m": self.m,
            "mode": self.mode,
            "total": self.total,
            "in_D": self.in_d_count,
            "in_D_o": self.in_do_count,
            "det_degree": self.degree_bound,
            "nonempty_bound": self.nonempty_bound,
            "seed": self.seed,
            "points": [pt.to_json(residue_ctx) for pt in self.points],
        }


def det_degree(p, g):
    """Degree of det A(1, F) in z: (p - 1) g^2 / 2."""
    return (p - 1) * g * g // 2


def nonempty_bound(p, g, m):
    """Guaranteed number of unit-determinant residue tuples when p^m > d."""
    d = det_degree(p, g)
    pm = p**m
    n = 2 * g + 1
    if pm <= d:
        return None
    return (pm**n - 1) // (pm - 1) * (pm - 1 - d) + 1


def _residue_from_index(ctx1, idx):
    if ctx1.m == 1:
        return idx
    digits = []
    for _ in range(ctx1.m):
        digits.append(idx % ctx1.p)
        idx //= ctx1.p
    return tuple(digits)


def _point_in_D(cfg1, a):
    Aw = hw_matrix_at(1, master_polynomial(cfg1, 1), cfg1.delta, a)
    return cfg1.ctx.is_unit(hw_det(Aw))


def scan_domain(p, g, m, mode="exhaustive", k=None, seed=None,
                keep_points=True, point_cap=200_000):
    """Enumerate or sample residue tuples and flag domain membership.

    Membership in the unit-determinant domain depends only on residues, so
    the scan works at precision 1.  Exhaustive mode refuses more than 10^7
    tuples; sample mode draws k tuples reproducibly from the given seed.
    """
    ctx1 = ctx_new(p, 1, m)
    cfg1 = KZConfig(ctx1, g)
    n = cfg1.n
    pm = p**m
    d = det_degree(p, g)
    points = []
    in_d = in_do = 0
    if mode == "exhaustive":
        total = pm**n
        if total > EXHAUSTIVE_CAP:
            raise TooLarge(
                f"exhaustive scan over {total} tuples exceeds {EXHAUSTIVE_CAP}"
            )
        index_iter = enumerate(itertools.product(range(pm), repeat=n))
        bound = nonempty_bound(p, g, m)
        seed_used = None
    else:
        if k is None:
            raise ValueError("sample mode needs k")
        rng = random.Random(seed)
        total = k
        index_iter = enumerate(
            tuple(rng.randrange(pm) for _ in range(n)) for _ in range(k)
        )
        bound = None
        seed_used = seed
    for idx, codes in index_iter:
        residues = tuple(_residue_from_index(ctx1, c) for c in codes)
        ok = _point_in_D(cfg1, residues)
        distinct = len(set(codes)) == n
        if ok:
            in_d += 1
            if distinct:
                in_do += 1
        if keep_points and len(points) < point_cap:
            points.append(DomainPoint(residues, None, ok, ok and distinct, idx))
    return ScanResult(p, g, m, mode, total, in_d, in_do, d, bound,
                      points, seed_used)


def lift_point(point, ctx):
    """Attach Teichmueller lifts in the working context."""
    lifts = tuple(ctx.teichmueller(ctx.from_coeffs(
        u if isinstance(u, tuple) else (u,))) for u in point.residues)
    return DomainPoint(point.residues, lifts, point.in_D, point.in_D_o,
                       point.index)


def sample_domain_points(p, g, m, count, seed, ctx, require_distinct=True):
    """Reproducibly sample lifted points of the (o-)domain."""
    ctx1 = ctx_new(p, 1, m)
    cfg1 = KZConfig(ctx1, g)
    n = cfg1.n
    pm = p**m
    rng = random.Random(seed)
    out = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 10_000 * count:
            raise OutsideDomain("sampling failed to find enough domain points")
        codes = tuple(rng.randrange(pm) for _ in range(n))
        if require_distinct and len(set(codes)) != n:
            continue
        residues = tuple(_residue_from_index(ctx1, c) for c in codes)
        if not _point_in_D(cfg1, residues):
            continue
        pt = DomainPoint(residues, None, True, len(set(codes)) == n,
                         len(out))
        out.append(lift_point(pt, ctx))
    return out


# ---------------------------------------------------------------------------
# limit iteration


@dataclass
class Certificate:
    name: str
    passed: bool
    threshold: int
    observed: int
    details: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "threshold": self.threshold,
            "observed": self.observed,
            "details": self.details,
        }


def _level_matrix_inv(cfg, lev, a, cache):
    ctx = cfg.ctx
    from .hasse_witt import hw_from_dense

    off, co = cache.get(master_polynomial(cfg, lev), a)
    Aw = hw_from_dense(ctx, lev, off, co, cfg.delta)
    det = hw_det(Aw)
    if not ctx.is_unit(det):
        raise OutsideDomain(f"det A({lev}, Phi_{lev}) not a unit")
    return Aw, ringmat.mat_inv_scalar(ctx, Aw.entries)


def limit_A(cfg, point, s_max):
    """Iterate R_s = A(s+1, Phi_{s+1})(a) A(s, Phi_s)(a^p)^-1, s = 0..s_max-1.

    Valuations of consecutive differences must be >= s+1; every ratio has a
    unit determinant.  The last iterate approximates the limit matrix to
    p^(s_max).
    """
    ctx = cfg.ctx
    if ctx.N < s_max + 1:
        raise ValueError("precision must satisfy N >= s_max + 1")
    if not point.in_D:
        raise OutsideDomain("point is outside the unit-determinant domain")
    a = point.lift
    ap = tuple(ctx.frob(x, 1) for x in a)
    sring = ringmat.scalar_ring(ctx)
    cache = DenseCache()
    cache_p = DenseCache()
    ratios = []
    det_vals = []
    for s in range(s_max):
        Aw, _ = _level_matrix_inv(cfg, s + 1, a, cache)
        if s == 0:
            R = Aw.entries
        else:
            _, inv = _level_matrix_inv(cfg, s, ap, cache_p)
            R = ringmat.mat_mul(sring, Aw.entries, inv)
        ratios.append(R)
        det_vals.append(ctx.val(ringmat.det(sring, R)))
    decay = []
    for s in range(1, s_max):
        diff = ringmat.mat_sub(sring, ratios[s], ratios[s - 1])
        decay.append(ringmat.min_val(sring, diff))
    return {
        "ratios": ratios,
        "decay": decay,
        "det_valuations": det_vals,
        "A": ratios[-1],
    }


def limit_I(cfg, point, s_max):
    """Iterate the three frame sequences at a Teichmueller point:

    J_s = I_s A(s, Phi_s)^-1, K_s^(i) = (dI_s/dz_i) A(s, Phi_s)^-1 and
    B_s^(i) = (d A(s, Phi_s)/dz_i) A(s, Phi_s)^-1, for s = 1..s_max.
    Differences of consecutive iterates must have valuation >= s.
    """
    ctx = cfg.ctx
    if ctx.N < s_max + 1:
        raise ValueError("precision must satisfy N >= s_max + 1")
    if not point.in_D_o:
        raise OutsideDomain("point is outside the residue-distinct o-domain")
    a = point.lift
    sring = ringmat.scalar_ring(ctx)
    cache = DenseCache()
    J_seq, K_seq, B_seq = [], [], []
    for s in range(1, s_max + 1):
        phi = master_polynomial(cfg, s)
        Aw, Ainv = _level_matrix_inv(cfg, s, a, cache)
        I = ps_solutions(cfg, s, a, cache=cache)
        J_seq.append(ringmat.mat_mul(sring, I.entries, Ainv))
        K = {}
        B = {}
        for i in range(1, cfg.n + 1):
            dI = ps_solution_derivative(cfg, s, i, a, cache=cache)
            K[i] = ringmat.mat_mul(sring, dI, Ainv)
            dA = hw_derivative_at(s, phi, cfg.delta, a, i, cache=cache)
            B[i] = ringmat.mat_mul(sring, dA.entries, Ainv)
        K_seq.append(K)
        B_seq.append(B)
    decay_J, decay_K, decay_B = [], [], []
    for s in range(1, s_max):
        decay_J.append(ringmat.min_val(
            sring, ringmat.mat_sub(sring, J_seq[s], J_seq[s - 1])))
        decay_K.append(min(
            ringmat.min_val(sring, ringmat.mat_sub(
                sring, K_seq[s][i], K_seq[s - 1][i]))
            for i in range(1, cfg.n + 1)))
        decay_B.append(min(
            ringmat.min_val(sring, ringmat.mat_sub(
                sring, B_seq[s][i], B_seq[s - 1][i]))
            for i in range(1, cfg.n + 1)))
    return {
        "J_seq": J_seq,
        "K_seq": K_seq,
        "B_seq": B_seq,
        "decay_J": decay_J,
        "decay_K": decay_K,
        "decay_B": decay_B,
        "I": J_seq[-1],
        "I_dirs": K_seq[-1],
        "A_dirs": B_seq[-1],
    }


def verify_kz_mc(cfg, point, s_max, frag=None):
    """Certificate that the direction limits are the Gaudin action:
    K^(i) = H_i J entrywise to valuation >= s_max - 1."""
    ctx = cfg.ctx
    frag = frag or limit_I(cfg, point, s_max)
    sring = ringmat.scalar_ring(ctx)
    a = point.lift
    J = frag["I"]
    observed = ctx.N
    per_dir = {}
    for i in range(1, cfg.n + 1):
        H = gaudin(cfg, i, a)
        HJ = ringmat.mat_mul(sring, H, J)
        diff = ringmat.mat_sub(sring, frag["I_dirs"][i], HJ)
        v = ringmat.min_val(sring, diff)
        per_dir[i] = v
        observed = min(observed, v)
    threshold = s_max - 1
    return Certificate(
        "kz-gaudin-match", observed >= threshold, threshold, observed,
        {"per_direction": per_dir, "point_index": point.index},
    )


def _unit_minor_rows(cfg, M):
    """Rows giving a unit g x g minor of the n x g matrix M, preferring
    rows 1, 3, ..., 2g-1; falls back to any unit combination."""
    ctx = cfg.ctx
    sring = ringmat.scalar_ring(ctx)
    g = cfg.g
    preferred = tuple(range(0, 2 * g - 1, 2))
    for rows in itertools.chain(
        [preferred], itertools.combinations(range(cfg.n), g)
    ):
        sub = [M[r] for r in rows]
        if ctx.is_unit(ringmat.det(sring, sub)):
            return rows
    return None


def verify_invariance(cfg, point, s_max, frag=None):
    """Certificate that the KZ covariant derivative of the frame stays in
    the frame's column span with coefficient matrix -B^(i).

    The finite-level covariant derivative is KD_i = K^(i) - J B^(i) - H_i J
    (the middle term is the exact derivative of the inverse); the check is
    KD_i + J B^(i) = 0 to valuation >= s_max - 1, plus recovery of the
    coefficients by solving on a unit minor.
    """
    ctx = cfg.ctx
    frag = frag or limit_I(cfg, point, s_max)
    sring = ringmat.scalar_ring(ctx)
    a = point.lift
    J = frag["I"]
    rows = _unit_minor_rows(cfg, J)
    threshold = s_max - 1
    observed = ctx.N
    recovery = ctx.N
    per_dir = {}
    for i in range(1, cfg.n + 1):
        H = gaudin(cfg, i, a)
        B = frag["A_dirs"][i]
        JB = ringmat.mat_mul(sring, J, B)
        KD = ringmat.mat_sub(
            sring, ringmat.mat_sub(sring, frag["I_dirs"][i], JB),
            ringmat.mat_mul(sring, H, J),
        )
        resid = ringmat.mat_add(sring, KD, JB)
        v = ringmat.min_val(sring, resid)
        per_dir[i] = v
        observed = min(observed, v)
        if rows is not None:
            # solve KD = J C on the unit rows; expect C = -B^(i)
            sub = [J[r] for r in rows]
            rhs = [KD[r] for r in rows]
            C = ringmat.mat_solve_scalar(ctx, sub, rhs)
            against = ringmat.mat_add(sring, C, B)
            recovery = min(recovery, ringmat.min_val(sring, against))
            full = ringmat.mat_sub(sring, KD, ringmat.mat_mul(
                sring, J, C))
            observed = min(observed, ringmat.min_val(sring, full))
    return Certificate(
        "kz-invariant-span", observed >= threshold, threshold, observed,
        {
            "per_direction": per_dir,
            "coefficient_recovery_valuation": recovery,
            "minor_rows": list(rows) if rows is not None else None,
            "point_index": point.index,
        },
    )


def rank_check(cfg, point, frag=None):
    """Certificate that the limit frame has rank g modulo p.

    Checks the g x g minor of I_1(a) A(1, Phi_1)(a)^-1 in rows 1, 3, ...,
    2g-1 first; any other unit minor still certifies full rank.
    """
    ctx = cfg.ctx
    if not point.in_D:
        raise OutsideDomain("point is outside the unit-determinant domain")
    a = point.lift
    sring = ringmat.scalar_ring(ctx)
    cache = DenseCache()
    _, Ainv = _level_matrix_inv(cfg, 1, a, cache)
    I = ps_solutions(cfg, 1, a, cache=cache)
    M = ringmat.mat_mul(sring, I.entries, Ainv)
    g = cfg.g
    preferred = tuple(range(0, 2 * g - 1, 2))
    sub = [M[r] for r in preferred]
    v = ctx.val(ringmat.det(sring, sub))
    details = {
        "preferred_rows": list(preferred),
        "preferred_minor_valuation": v,
        "point_index": point.index,
    }
    if v == 0:
        return Certificate("rank-g-minor", True, 0, 0, details)
    rows = _unit_minor_rows(cfg, M)
    details["fallback_rows"] = list(rows) if rows is not None else None
    passed = rows is not None
    return Certificate("rank-g-minor", passed, 0, 0 if passed else v, details)


def rank_fraction(cfg, points):
    """Fraction of points at which some g x g minor of the frame is a unit."""
    results = pool_map(lambda pt: rank_check(cfg, pt).passed, points)
    return sum(results) / len(results) if results else 0.0


@dataclass
class LimitReport:
    cfg: KZConfig
    point: DomainPoint
    s_max: int
    a_frag: dict
    i_frag: dict
    certificates: list

    def to_json(self):
        ctx = self.cfg.ctx

        def mat(M):
            return [[ctx.elem_to_json(x) for x in row] for row in M]

        return {
            "point_index": self.point.index,
            "s_max": self.s_max,
            "A_decay": self.a_frag["decay"],
            "A_det_valuations": self.a_frag["det_valuations"],
            "A": mat(self.a_frag["A"]),
            "I_decay": self.i_frag["decay_J"],
            "I_dirs_decay": self.i_frag["decay_K"],
            "A_dirs_decay": self.i_frag["decay_B"],
            "I": mat(self.i_frag["I"]),
            "certificates": [c.to_json() for c in self.certificates],
            "ctx": ctx.to_json(),
        }


def limit_report(cfg, point, s_max):
    """Full per-point pipeline: decay profiles plus all certificates."""
    a_frag = limit_A(cfg, point, s_max)
    i_frag = limit_I(cfg, point, s_max)
    certs = [
        verify_kz_mc(cfg, point, s_max, frag=i_frag),
        verify_invariance(cfg, point, s_max, frag=i_frag),
        rank_check(cfg, point),
    ]
    return LimitReport(cfg, point, s_max, a_frag, i_frag, certs)
