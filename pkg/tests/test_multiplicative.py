import random

import pytest

from whitehead_lab import additive as add
from whitehead_lab import multiplicative as mul
from whitehead_lab.errors import BasisMismatch, NotAUnit
from whitehead_lab.groups import DEFAULT_SUITE, center, quotient, subquotient
from whitehead_lab.grouprings import (
    GroupRingElt,
    conj_project,
    det_local,
    group_basis,
    log_unit,
    to_ab,
)
from whitehead_lab.padic import teichmueller

from conftest import ctx_for, group

N = 16


def units(G, count, stream="t"):
    return mul.sample_units(G, ctx_for(G), count, stream)


def scalar(G, c, prec):
    return GroupRingElt.monomial(group_basis(G), 0, G.p, prec, c)


def theta_with_reps(G, H, u, rnd):
    """Norm built from a random choice of left coset representatives."""
    cells, seen = [], set()
    for x in G.elements:
        if x in seen:
            continue
        cell = sorted(G.mul(x, h) for h in H.members)
        seen.update(cell)
        cells.append(cell)
    reps = [rnd.choice(c) for c in cells]
    where = {g: i for i, c in enumerate(cells) for g in c}
    n = len(reps)
    B = group_basis(H.group)
    raw = [[[0] * H.order for _ in range(n)] for _ in range(n)]
    for j, xj in enumerate(reps):
        for g, c in enumerate(u.coeffs):
            if c:
                gx = G.mul(g, xj)
                i = where[gx]
                raw[i][j][H.local_id[G.mul(G.inv(reps[i]), gx)]] += c
    M = [[to_ab(H, GroupRingElt(B, tuple(e), G.p, u.prec)) for e in row] for row in raw]
    return det_local(M)


# -- theta ------------------------------------------------------------------------


def test_theta_examples():
    C4 = group("C4")
    u = units(C4, 1)[0]
    assert mul.theta_H(C4, C4.full, u) == u
    C2 = group("C2")
    prec = 20
    a, b = 5, 2
    u = GroupRingElt(group_basis(C2), (a, b), 2, prec)
    T = C2.trivial
    assert mul.theta_H(C2, T, u).coeffs == ((a * a - b * b) % 2**prec,)
    for name in ("D4", "C9"):
        G = group(name)
        p = G.p
        s = scalar(G, 1 + p, prec)
        for H in G.subgroups:
            out = mul.theta_H(G, H, s)
            assert out == GroupRingElt.monomial(group_basis(H.ab.group), 0, p, prec, (1 + p) ** H.index)
    one = mul.theta_all(group("Q8"), scalar(group("Q8"), 1, prec))
    assert all(x == GroupRingElt.one(x.basis, 2, prec) for x in one.entries.values())


@pytest.mark.parametrize("name", ["D4", "Q8", "C9", "Heis27", "C3xC3"])
def test_theta_rep_independent_and_multiplicative(name):
    G = group(name)
    rnd = random.Random(name)
    u, v = units(G, 2)
    for H in G.subgroups:
        th = mul.theta_H(G, H, u)
        assert th == theta_with_reps(G, H, u, rnd)
        prod = mul.theta_H(G, H, u * v)
        assert prod.residual(th * mul.theta_H(G, H, v)) >= ctx_for(G).n_work


@pytest.mark.parametrize("name", ["D4", "Q8", "Heis27"])
def test_m1_diagram_and_augmentation(name):
    G = group(name)
    for u in units(G, 3):
        t = mul.theta_all(G, u)
        for H, H1 in add._a1_pairs(G, "all"):
            lhs = mul.nr_map(H, H1, t[H1])
            rhs = add.pi_sub(H, H1, t[H])
            assert mul.torsion_residual(lhs, rhs) >= N
        base = t[G.trivial].augmentation() % G.p
        for H in G.subgroups:
            assert (pow(t[H].augmentation(), G.p * H.order, G.p) - base) % G.p == 0


def test_nr_examples():
    G = group("D4")
    for H1 in G.subgroups:
        for H in G.subgroups:
            if not (H <= H1) or not add.commutator_subgroup(H1) <= H:
                continue
            sq = subquotient(H, H1)
            Q = sq.h1ab.group
            c = scalar(Q, 3, N)
            out = mul.nr_map(H, H1, c)
            assert out.coeffs[0] == pow(3, Q.order // sq.image.order, 2**N) and not any(out.coeffs[1:])
            if H == H1:
                x = units(H.ab.group, 1)[0].with_prec(N)
                assert mul.nr_map(H, H, x).coeffs == x.coeffs


def test_alpha_examples():
    G = group("C9")
    x = units(G.trivial.group, 1)[0]
    assert mul.alpha(G.trivial, x) == x
    for name in ("C4", "C9", "C5"):
        H = group(name)
        s = scalar(H, 1 + H.p, N)
        assert mul.alpha(H.full, s) == GroupRingElt.one(s.basis, H.p, N)
    C2 = group("C2")
    g = GroupRingElt.monomial(group_basis(C2), 1, 2, N)
    assert mul.alpha(C2.full, g) == scalar(C2, -1, N)


def test_u_map_examples():
    T = group("C3").trivial.group
    x = GroupRingElt(group_basis(T), (4,), 3, N)
    t = mul.PsiTuple(T, {T.full: x})
    assert mul.u_map(T, T.full, t) == x
    for name in ("D4", "C9"):
        G = group(name)
        ones = mul.constant_tuple(G, 1, N)
        for H in G.subgroups:
            assert mul.u_map(G, H, ones) == GroupRingElt.one(group_basis(H.ab.group), G.p, N)


@pytest.mark.parametrize("name", ["C4", "D4", "Q8", "C9", "C3xC3"])
def test_log_of_u_map(name):
    # log u_{G,H}(theta(u)) = |H| * (explicit v_G applied to the tuple of logs)_H
    G = group(name)
    for u in units(G, 2):
        t = mul.theta_all(G, u)
        logs = add.PhiTuple(G, "all", {H: log_unit(t[H]) for H in G.subgroups})
        vg = add.v_G_explicit(G, logs, integral=False)
        for H in G.subgroups:
            lhs = log_unit(mul.u_map(G, H, t))
            assert lhs.residual(vg[H] * H.order) >= N


# -- L and the key identity -------------------------------------------------------


def test_L_examples():
    for name in ("C3", "C9", "Heis27", "C5"):
        G = group(name)
        prec = ctx_for(G).n_work
        w = scalar(G, teichmueller(2, G.p, prec).residue, prec)
        assert mul.integral_log_L(G, w).is_zero()
    G = group("Q8")
    assert mul.integral_log_L(G, scalar(G, 1, 30)).is_zero()
    assert mul.integral_log_L(G, scalar(G, -1, 30)).is_zero()


@pytest.mark.parametrize("name", ["C4", "Q8", "C9", "C5"])
def test_L_naturality_central_quotient(name):
    G = group(name)
    Z = center(G)
    z = next(g for g in Z.members if g and G.element_orders[g] == G.p)
    qt = quotient(G, G.subgroup(G.closure([z])))
    Q = qt.group
    for u in units(G, 3):
        lhs = mul.push_classes(mul.integral_log_L(G, u), qt.projection, Q)
        rhs = mul.integral_log_L(Q, mul.push_unit(u, qt.projection, Q))
        assert lhs.residual(rhs) >= N


def test_key_identity_and_oliver_taylor_examples():
    T = group("C5").trivial.group
    u = GroupRingElt(group_basis(T), (6,), 5, 24)
    assert mul.key_identity_check(T, T.full, u) >= N
    lhs = add.beta_H(T, T.full, mul.integral_log_L(T, u))
    expect = log_unit(u) - log_unit(u).divide(5)
    assert lhs.residual(expect) >= N
    for name in ("D4", "C9"):
        G = group(name)
        prec = ctx_for(G).n_work
        one = scalar(G, 1, prec)
        s = scalar(G, 1 + G.p, prec)
        for H in G.subgroups:
            assert mul.key_identity_check(G, H, one, n_check=N) >= N
            assert mul.oliver_taylor_check(G, H, s, n_check=N) >= N
            ls = log_unit(mul.theta_H(G, H, s))
            expect = log_unit(GroupRingElt.monomial(group_basis(H.ab.group), 0, G.p, prec, 1 + G.p)) * H.index
            assert ls.residual(expect) >= N


@pytest.mark.parametrize("name", ["Q8", "D4", "C9"])
def test_key_identity_random(name):
    G = group(name)
    for u in units(G, 3):
        th = mul.theta_all(G, u)
        for H in G.subgroups:
            assert mul.key_identity_check(G, H, u, th, n_check=N) >= N
            assert mul.oliver_taylor_check(G, H, u, n_check=N) >= N


# -- the unit-tuple conditions ----------------------------------------------------


@pytest.mark.parametrize("name", DEFAULT_SUITE)
def test_theta_images_pass(name):
    G = group(name)
    u = units(G, 1, "pass")[0]
    t = mul.theta_all(G, u)
    assert mul.check_psi_conditions(G, t, N).passed
    lhs = mul.script_L(G, t)
    rhs = add.beta_all(G, mul.integral_log_L(G, u))
    assert lhs.residual_checked(rhs, N) >= N


def test_script_L_of_trivial_tuples():
    for name in ("D4", "C9", "C5"):
        G = group(name)
        prec = ctx_for(G).n_work
        ones = mul.constant_tuple(G, 1, prec)
        assert all(e.is_zero() for e in mul.script_L(G, ones).entries.values())
        for r in range(1, G.p):
            t = mul.teichmueller_tuple(G, r, prec)
            assert mul.check_psi_conditions(G, t, N).passed
            assert all(e.valuation() >= N for e in mul.script_L(G, t).entries.values())


@pytest.mark.parametrize("name,order", [("C4", 2), ("C9", 3)])
def test_m4_violation(name, order):
    G = group(name)
    P = next(H for H in G.cyclic_subgroups if H.order == order)
    t = mul.theta_all(G, units(G, 1)[0])
    B = group_basis(P.ab.group)
    g = P.ab.projection[P.local_id[P.canonical_generator]]
    # 1 + p (1 - g): the bump 1 - g has zero Weyl trace
    bump = GroupRingElt.one(B, G.p, t.prec) + (GroupRingElt.one(B, G.p, t.prec) - GroupRingElt.monomial(B, g, G.p, t.prec)) * G.p
    rep = mul.check_psi_conditions(G, t.replace(P, t[P] * bump), N)
    assert "M4" in rep.failed()
    assert any(G.subgroup_index[P] in w["subgroups"] for w in rep.conditions["M4"].witnesses)


def test_m3_violation():
    G = group("C9")
    t = mul.constant_tuple(G, 1, 30)
    P = next(H for H in G.subgroups if H.order == 3)
    bad = t.replace(P, GroupRingElt.monomial(group_basis(P.ab.group), 0, 3, 30, 2))
    assert "M3" in mul.check_psi_conditions(G, bad, N).failed()


@pytest.mark.parametrize("name", ["C3", "C9", "C3xC3", "C5", "C25"])
def test_character_choice_does_not_change_verdicts(name):
    G = group(name)
    u = units(G, 1, "char")[0]
    t = mul.theta_all(G, u)
    good = mul.check_psi_conditions(G, t, N)
    P = next(H for H in G.cyclic_subgroups if 1 < H.order < G.order) if G.order > G.p else G.full
    B = group_basis(P.ab.group)
    g = P.ab.projection[P.local_id[P.canonical_generator]]
    bump = GroupRingElt.one(B, G.p, t.prec) + (GroupRingElt.one(B, G.p, t.prec) - GroupRingElt.monomial(B, g, G.p, t.prec)) * G.p
    bad = t.replace(P, t[P] * bump)
    bad_rep = mul.check_psi_conditions(G, bad, N)
    for k in range(2, G.p):
        assert mul.check_psi_conditions(G, t, N, char=k).failed() == good.failed() == []
        assert mul.check_psi_conditions(G, bad, N, char=k).failed() == bad_rep.failed()


@pytest.mark.parametrize("name", ["D4", "Q8", "Heis27"])
def test_commutators_have_trivial_norms_and_L(name):
    G = group(name)
    x, y = units(G, 2, "comm")
    c = mul.commutator_unit(x, y)
    t = mul.theta_all(G, c)
    for H, e in t.entries.items():
        assert e.residual(GroupRingElt.one(e.basis, G.p, e.prec)) >= N
    assert mul.integral_log_L(G, c).valuation() >= N


# -- sampling ---------------------------------------------------------------------


def test_random_units():
    G = group("D4")
    ctx = ctx_for(G)
    a = mul.random_unit(G, ctx, "general", random.Random(5))
    b = mul.random_unit(G, ctx, "general", random.Random(5))
    assert a == b and a.prec == ctx.n_work
    g = mul.random_unit(G, ctx, "trivial", random.Random(1))
    assert sorted(x % 2**ctx.n_work for x in g.coeffs)[-1] == 1 and sum(g.coeffs) == 1
    pu = mul.random_unit(G, ctx, "principal", random.Random(2))
    assert pu.augmentation() % 2 == 1 and all(c % 2 == 0 for c in pu.coeffs[1:])
    assert mul.sample_units(G, ctx, 5) == mul.sample_units(G, ctx, 5)
    assert mul.sample_units(G, ctx, 5, "x") != mul.sample_units(G, ctx, 5, "y")


def test_tuple_validation():
    G = group("C4")
    with pytest.raises(NotAUnit):
        mul.require_unit(GroupRingElt(group_basis(G), (1, 1, 0, 0), 2, N))
    t = mul.constant_tuple(G, 1, N)
    with pytest.raises(BasisMismatch):
        t.replace(G.trivial, GroupRingElt.one(group_basis(G), 2, N))
    u = units(G, 1)[0]
    assert mul.integral_log_L(G, u) == add.as_class_vector(mul.integral_log_L(G, u))
    assert conj_project(u).basis.kind == "conj"
