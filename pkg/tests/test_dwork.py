import pytest

import dworklab as dl
from dworklab import ringmat
from dworklab.dwork import ghost_dense_at
from dworklab.errors import DegenerateTuple, SizeCapExceeded
from dworklab.ghosts import AdmissibleTuple
from dworklab.laurent import LaurentPoly
from conftest import rand_laurent, seeded


def kz_bits(p, N, g, length):
    ctx = dl.ctx_new(p, N, 1)
    cfg = dl.KZConfig(ctx, g)
    return ctx, cfg, dl.kz_tuple(cfg, length=length, periodic=False)


def ext_points(p, g, m, count, seed, N):
    ctx = dl.ctx_new(p, N, m)
    pts = dl.sample_domain_points(p, g, m, count, seed, ctx)
    return ctx, [pt.lift for pt in pts]


# -- decomposition -----------------------------------------------------------


def test_decomposition_s0_trivial():
    ctx, cfg, tup = kz_bits(3, 3, 1, 1)
    rep = dl.verify_decomposition(tup, 0, mode="symbolic")
    assert rep.passed and rep.observed_min_valuation == ctx.N


def test_decomposition_symbolic():
    ctx, cfg, tup = kz_bits(3, 4, 1, 3)
    gs = dl.ghost_sequence(tup, 2)
    for s in (1, 2):
        rep = dl.verify_decomposition(gs, s, mode="symbolic")
        assert rep.passed
        assert rep.observed_min_valuation == ctx.N
        # Lemma-style ghost block divisibility
        assert rep.extra["ghost_block_valuation"] >= s


def test_decomposition_pointwise():
    ctx, pts = ext_points(5, 2, 2, 6, 3, N=4)
    cfg = dl.KZConfig(ctx, 2)
    tup = dl.kz_tuple(cfg, length=4, periodic=False)
    rep = dl.verify_decomposition(tup, 3, mode="pointwise", points=pts)
    assert rep.passed and rep.observed_min_valuation == ctx.N
    assert rep.extra["ghost_block_valuation"] >= 3


def test_ghost_dense_matches_symbolic():
    ctx, cfg, tup = kz_bits(3, 4, 1, 3)
    gs = dl.ghost_sequence(tup, 2)
    rng = seeded(77)
    a = [ctx.rand(rng) for _ in range(3)]
    Vd, _ = ghost_dense_at(tup, 2, a)
    for s in range(3):
        off, co = Vd[s]
        direct = gs.V[s].eval_z(a)
        got = LaurentPoly.from_dense(ctx, co, offset=off)
        assert got == LaurentPoly(ctx, 1, 0, dict(direct.terms))


# -- factorization mod p ------------------------------------------------------


def test_factorization_symbolic_and_trivial():
    ctx, cfg, tup = kz_bits(3, 4, 1, 3)
    rep0 = dl.verify_frobenius_factorization(tup, 0, mode="symbolic")
    assert rep0.passed and rep0.observed_min_valuation == ctx.N
    rep = dl.verify_frobenius_factorization(tup, 2, mode="symbolic")
    assert rep.passed and rep.observed_min_valuation >= 1
    ones = AdmissibleTuple(
        [LaurentPoly.one(ctx, 1, 1)] * 3, (0,), periodic=False
    )
    repo = dl.verify_frobenius_factorization(ones, 2, mode="symbolic")
    assert repo.passed


def test_factorization_pointwise():
    ctx, pts = ext_points(7, 2, 2, 4, 5, N=4)
    cfg = dl.KZConfig(ctx, 2)
    tup = dl.kz_tuple(cfg, length=4, periodic=False)
    rep = dl.verify_frobenius_factorization(tup, 3, mode="pointwise", points=pts)
    assert rep.passed


# -- ratio and determinant congruences ----------------------------------------


def test_ratio_s1_equals_factorization_statement():
    ctx, cfg, tup = kz_bits(3, 3, 1, 2)
    r1 = dl.verify_dwork_ratio(tup, 1, mode="symbolic")
    f1 = dl.verify_frobenius_factorization(tup, 1, mode="symbolic")
    assert r1.passed and f1.passed
    assert r1.claimed_valuation == 1 == f1.claimed_valuation


def test_ratio_symbolic_and_points_coherent():
    ctx, cfg, tup = kz_bits(3, 4, 1, 3)
    rep = dl.verify_dwork_ratio(tup, 2, mode="symbolic")
    assert rep.passed and rep.observed_min_valuation >= 2
    rng = seeded(15)
    pts = [[ctx.rand_unit(rng) for _ in range(3)] for _ in range(20)]
    good = [
        a for a in pts
        if ctx.is_unit(dl.hw_det(dl.hw_matrix_at(
            1, dl.master_polynomial(cfg, 1), cfg.delta, a)))
    ]
    rep_pw = dl.verify_dwork_ratio(tup, 2, mode="pointwise", points=good)
    # pointwise evaluations inherit at least the symbolic valuation
    assert rep_pw.observed_min_valuation >= rep.observed_min_valuation


def test_det_congruence():
    ctx, cfg, tup = kz_bits(3, 4, 1, 3)
    rep = dl.verify_det_congruence(tup, 2, mode="symbolic")
    assert rep.passed and rep.observed_min_valuation >= 2
    # for g = 1 the determinant form is the ratio itself
    r = dl.verify_dwork_ratio(tup, 2, mode="symbolic")
    assert r.observed_min_valuation == rep.observed_min_valuation


def test_ratio_monotone_in_s():
    ctx, pts = ext_points(3, 1, 2, 5, 9, N=6)
    cfg = dl.KZConfig(ctx, 1)
    tup = dl.kz_tuple(cfg, length=5, periodic=False)
    vals = []
    for s in (1, 2, 3, 4):
        rep = dl.verify_dwork_ratio(tup, s, mode="pointwise", points=pts)
        assert rep.passed
        vals.append(rep.observed_min_valuation)
    assert vals == sorted(vals)


def test_degenerate_tuple_detected():
    ctx = dl.ctx_new(3, 3, 1)
    # t + z1 has A(1, .) entry Cf_2 = 0: degenerate for Delta = {1}
    lam = LaurentPoly(ctx, 1, 1, {(1, 0): 1, (0, 1): 1})
    tup = AdmissibleTuple([lam, lam], (1,), periodic=False)
    if tup.certificate.ok:
        with pytest.raises(DegenerateTuple):
            dl.verify_dwork_ratio(tup, 1, mode="symbolic")


def test_symbolic_gate_raises():
    ctx = dl.ctx_new(5, 4, 1)
    cfg = dl.KZConfig(ctx, 2)
    tup = dl.kz_tuple(cfg, length=3, periodic=False)
    with pytest.raises(SizeCapExceeded):
        dl.verify_dwork_ratio(tup, 2, mode="symbolic")


# -- derivative congruences ---------------------------------------------------


def test_derivative_symbolic():
    ctx, cfg, tup = kz_bits(3, 4, 1, 3)
    rep = dl.verify_derivative_congruence(tup, 2, m=0, v=1, mode="symbolic")
    assert rep.passed and rep.observed_min_valuation >= 2
    rep1 = dl.verify_derivative_congruence(tup, 1, m=1, v=2, mode="symbolic")
    assert rep1.passed and rep1.claimed_valuation == 2


def test_derivative_pointwise_with_twist():
    ctx, pts = ext_points(3, 1, 2, 5, 21, N=4)
    cfg = dl.KZConfig(ctx, 1)
    tup = dl.kz_tuple(cfg, length=3, periodic=False)
    rep = dl.verify_derivative_congruence(
        tup, 1, m=1, v=2, mode="pointwise", points=pts)
    assert rep.passed and rep.observed_min_valuation >= 2


def test_derivative_constant_tuple_zero():
    ctx = dl.ctx_new(3, 3, 1)
    lam = LaurentPoly.const(ctx, 1, 2, 2)
    tup = AdmissibleTuple([lam] * 3, (0,), periodic=False)
    for m in (0, 1):
        rep = dl.verify_derivative_congruence(tup, 2, m=m, v=1,
                                              mode="symbolic")
        assert rep.passed and rep.observed_min_valuation == ctx.N
    rep2 = dl.verify_second_derivative_congruence(tup, 2, u=1, v=2,
                                                  mode="symbolic")
    assert rep2.passed and rep2.observed_min_valuation == ctx.N
    # claims beyond the working precision are rejected, not faked
    from dworklab.errors import PrecisionTooLow

    with pytest.raises(PrecisionTooLow):
        dl.verify_derivative_congruence(tup, 2, m=3, v=1, mode="symbolic")


def test_periodic_tuple_matches_finite():
    ctx = dl.ctx_new(3, 4, 1)
    cfg = dl.KZConfig(ctx, 1)
    fin = dl.kz_tuple(cfg, length=3, periodic=False)
    per = dl.kz_tuple(cfg)  # infinite constant pattern
    assert per.periodic and per.certificate.ok and per.certificate.complete
    r1 = dl.verify_dwork_ratio(fin, 2, mode="symbolic")
    r2 = dl.verify_dwork_ratio(per, 2, mode="symbolic")
    assert r1.observed_min_valuation == r2.observed_min_valuation
    assert dl.big_product(per, 4, 2).factored == \
        dl.master_polynomial(cfg, 3).factored


def test_second_derivative():
    ctx, cfg, tup = kz_bits(3, 4, 1, 3)
    rep = dl.verify_second_derivative_congruence(
        tup, 2, u=1, v=2, mode="symbolic")
    assert rep.passed and rep.observed_min_valuation >= 2
    ctx2, pts = ext_points(3, 1, 2, 5, 23, N=3)
    cfg2 = dl.KZConfig(ctx2, 1)
    tup2 = dl.kz_tuple(cfg2, length=2, periodic=False)
    for (u, v) in [(1, 1), (1, 2), (3, 3)]:
        rep = dl.verify_second_derivative_congruence(
            tup2, 1, u=u, v=v, mode="pointwise", points=pts)
        assert rep.passed


def test_second_derivative_diagonal_matches_symbolic():
    from dworklab.hasse_witt import hw_eval, hw_partial_z, hw_second_derivative_at

    ctx = dl.ctx_new(3, 3, 1)
    cfg = dl.KZConfig(ctx, 1)
    rng = seeded(25)
    for s in (1, 2):
        phi = dl.master_polynomial(cfg, s)
        sym = dl.hw_matrix(s, phi, cfg.delta)
        dsyms = {u: hw_partial_z(hw_partial_z(sym, u), u) for u in (1, 2, 3)}
        for _ in range(20):
            a = [ctx.rand(rng) for _ in range(3)]
            for u in range(1, 4):
                direct = hw_second_derivative_at(s, phi, cfg.delta, a, u, u)
                assert direct.entries == hw_eval(dsyms[u], a).entries


# -- structural identities ----------------------------------------------------


def poly_matrix_inverse(ctx, ring, A, n):
    """Inverse of a polynomial matrix whose determinant is a unit constant
    plus p-divisible terms (p-nilpotency makes the series finite)."""
    det = ringmat.det(ring, A)
    const = det.terms.get((0,) * n, ctx.zero())
    c_inv = ctx.inv(const)
    rest = det - LaurentPoly.const(ctx, 0, n, const)
    e = rest.cmul(ctx.neg(c_inv))  # det = const (1 - e)
    inv_det = LaurentPoly.one(ctx, 0, n)
    power = LaurentPoly.one(ctx, 0, n)
    for _ in range(1, ctx.N):
        power = power * e
        if power.is_zero():
            break
        inv_det = inv_det + power
    inv_det = inv_det.cmul(c_inv)
    adj = ringmat.adjugate(ring, A)
    return [[entry * inv_det for entry in row] for row in adj]


def test_matrix_calculus_identity_exact():
    # D_u(D_v A . A^-1) = D_u D_v A . A^-1 - (D_v A . A^-1)(D_u A . A^-1)
    ctx = dl.ctx_new(3, 3, 1)
    ring = ringmat.poly_ring(ctx, 0, 2)
    rng = seeded(37)
    for _ in range(5):
        g = 2
        while True:
            C = [[ctx.rand(rng) for _ in range(g)] for _ in range(g)]
            if ctx.is_unit(ringmat.det(ringmat.scalar_ring(ctx), C)):
                break
        A = [
            [
                LaurentPoly.const(ctx, 0, 2, C[i][j])
                + rand_laurent(rng, ctx, 0, 2, 0, 0, 3).cmul(3)
                for j in range(g)
            ]
            for i in range(g)
        ]
        Ainv = poly_matrix_inverse(ctx, ring, A, 2)
        assert ringmat.mat_mul(ring, A, Ainv) == ringmat.identity(ring, g)
        for (u, v) in [(1, 2), (2, 2)]:
            dA_v = [[e.partial_z(v) for e in row] for row in A]
            dA_u = [[e.partial_z(u) for e in row] for row in A]
            dA_uv = [[e.partial_z(v).partial_z(u) for e in row] for row in A]
            M = ringmat.mat_mul(ring, dA_v, Ainv)
            dM = [[e.partial_z(u) for e in row] for row in M]
            rhs = ringmat.mat_sub(
                ring,
                ringmat.mat_mul(ring, dA_uv, Ainv),
                ringmat.mat_mul(
                    ring,
                    ringmat.mat_mul(ring, dA_v, Ainv),
                    ringmat.mat_mul(ring, dA_u, Ainv),
                ),
            )
            assert dM == rhs


def test_sigma_twist_scaling():
    # if D_v(F1) F2 = D_v(G1) G2 mod p^s then the sigma^m images differ by
    # valuation >= s + m
    ctx = dl.ctx_new(3, 5, 1)
    rng = seeded(41)
    s, m = 2, 1
    p = 3
    for _ in range(10):
        F1 = rand_laurent(rng, ctx, 0, 2, 0, 0, 4)
        F2 = rand_laurent(rng, ctx, 0, 2, 0, 0, 4)
        X = rand_laurent(rng, ctx, 0, 2, 0, 0, 3)
        Y = rand_laurent(rng, ctx, 0, 2, 0, 0, 3)
        G1 = F1 + X.cmul(p**s)
        G2 = F2 + Y.cmul(p**s)
        v = 1
        base = F1.partial_z(v) * F2 - G1.partial_z(v) * G2
        assert base.is_zero() or base.valuation() >= s
        zfac = LaurentPoly(ctx, 0, 2, {(p**m - 1, 0): ctx.from_int(p**m)})
        # chain rule: D_v(sigma^m H) = p^m z_v^(p^m - 1) sigma^m(D_v H)
        assert F1.frobenius_sub(m).partial_z(v) == \
            zfac * F1.partial_z(v).frobenius_sub(m)
        twisted = (
            F1.frobenius_sub(m).partial_z(v) * F2.frobenius_sub(m)
            - G1.frobenius_sub(m).partial_z(v) * G2.frobenius_sub(m)
        )
        assert twisted == zfac * base.frobenius_sub(m)
        assert twisted.is_zero() or twisted.valuation() >= s + m


def test_report_shape():
    ctx, cfg, tup = kz_bits(3, 3, 1, 2)
    rep = dl.verify_dwork_ratio(tup, 1, mode="symbolic")
    doc = rep.to_json()
    assert doc["theorem_id"] == "ratio"
    assert doc["verdict"] == "pass"
    assert doc["claimed_valuation"] == 1
    assert "description" in doc and "config" in doc
