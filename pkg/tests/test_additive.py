import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from whitehead_lab import additive as add
from whitehead_lab.errors import BasisMismatch, NotCyclic
from whitehead_lab.groups import DEFAULT_SUITE, center, conjugate_subgroup, power_subgroup, subquotient
from whitehead_lab.grouprings import GroupRingElt, conj_basis, group_basis, transport
from whitehead_lab.padic import howell_form, submodule_equal

from conftest import group

N = 16


def cv(G, c, coeff=1, prec=N + 8):
    return add.class_vector(G, c, prec, coeff)


def random_cv(G, rnd, prec=N + 8):
    return GroupRingElt(conj_basis(G), tuple(rnd.randint(-30, 30) for _ in G.classes.representatives), G.p, prec)


def mono(H, i, coeff=1, prec=N + 8):
    return GroupRingElt.monomial(group_basis(H.group), i, H.ambient.p, prec, coeff)


def beta_oracle(G, H, a):
    """Sum x^-1 g x over every x in G (not coset reps), then divide by |H|."""
    B = group_basis(H.ab.group)
    acc = [0] * B.size
    for r, c in zip(G.classes.representatives, a.coeffs):
        for x in G.elements:
            y = G.mul(G.mul(G.inv(x), r), x)
            if y in H:
                acc[H.ab.projection[H.local_id[y]]] += c
    assert all(v % H.order == 0 for v in acc)
    return GroupRingElt(B, tuple(v // H.order for v in acc), G.p, a.prec)


# -- worked examples --------------------------------------------------------------


@pytest.mark.parametrize("name", ["D4", "Q8", "C9", "Heis27"])
def test_t_of_identity(name):
    G = group(name)
    for H in G.subgroups:
        img = add.t_map(G, H, cv(G, 0))
        assert img == GroupRingElt.monomial(conj_basis(H.group), 0, G.p, N + 8, H.index)
        assert add.t_map(H, H, GroupRingElt.one(conj_basis(H.group), G.p, N)) == GroupRingElt.one(conj_basis(H.group), G.p, N)


def test_t_on_d4_center():
    G = group("D4")
    Z = center(G)
    z = next(g for g in Z.members if g)
    img = add.t_map(G, Z, cv(G, G.classes.class_of[z]))
    loc = Z.group.classes.class_of[Z.local_id[z]]
    assert img == GroupRingElt.monomial(conj_basis(Z.group), loc, 2, N + 8, 4)


@pytest.mark.parametrize("name", DEFAULT_SUITE)
def test_beta_examples(name):
    G = group(name)
    for H in G.cyclic_subgroups:
        assert add.beta_H(G, H, cv(G, 0)) == GroupRingElt.monomial(group_basis(H.ab.group), 0, G.p, N + 8, G.order // H.order)
    if G.is_abelian:
        a = random_cv(G, random.Random(1))
        assert add.beta_H(G, G.full, a).coeffs == a.coeffs
    zero = GroupRingElt.zero(conj_basis(G), G.p, N)
    assert all(e.is_zero() for e in add.beta_all(G, zero).entries.values())


def test_beta_between_c2_and_c4():
    G = group("C4")
    C2 = next(H for H in G.subgroups if H.order == 2)
    a = GroupRingElt(group_basis(G), (3, 5, 7, 11), 2, N)
    out = add.beta_H(G.full, C2, a)
    expected = [0, 0]
    for g, c in enumerate(a.coeffs):
        if g in C2:
            expected[C2.local_id[g]] = 2 * c
    assert out.coeffs == tuple(expected)


@pytest.mark.parametrize("name", DEFAULT_SUITE)
def test_beta_against_brute_force(name):
    G = group(name)
    rnd = random.Random(name)
    a = random_cv(G, rnd)
    for H in G.subgroups:
        assert add.beta_H(G, H, a) == beta_oracle(G, H, a)


def test_eta_examples():
    G = group("C4")
    C4 = G.full
    g = C4.canonical_generator
    g2 = G.mul(g, g)
    assert add.eta(C4, mono(C4, C4.local_id[g2])).is_zero()
    assert add.eta(C4, mono(C4, C4.local_id[g])) == mono(C4, C4.local_id[g])
    T = G.trivial
    assert add.eta(T, mono(T, 0)) == mono(T, 0)
    C2 = group("C2").full
    x = GroupRingElt(group_basis(C2.group), (1, 1), 2, N)
    assert add.eta(C2, x) == GroupRingElt(group_basis(C2.group), (0, 1), 2, N)
    with pytest.raises(NotCyclic):
        add.eta(group("V4").full, GroupRingElt.one(group_basis(group("V4")), 2, N))


@pytest.mark.parametrize("name", ["D4", "Q8", "C9"])
def test_tau_inverts_beta(name):
    G = group(name)
    for c in range(len(G.classes)):
        a = cv(G, c)
        assert add.tau(G, add.beta_cyclic(G, a)).residual_checked(a, N) >= N


def test_tau_cyclic_top_entry():
    G = group("C8")
    t = add.PhiTuple(G, "cyclic", {H: GroupRingElt.zero(group_basis(H.group), 2, N) for H in G.cyclic_subgroups})
    gen = G.full.canonical_generator
    t.entries[G.full] = mono(G.full, G.full.local_id[gen], 5, N)
    assert add.tau(G, t).residual_checked(add.class_vector(G, G.classes.class_of[gen], N, 5), N - 4) >= N - 4
    # a non-generator monomial contributes nothing
    t.entries[G.full] = mono(G.full, G.full.local_id[G.mul(gen, gen)], 5, N)
    assert add.tau(G, t).is_zero()


def test_trace_sub_examples():
    for name in ("C4", "D4", "Q8", "C3xC3"):
        G = group(name)
        for H1 in G.subgroups:
            for H in G.subgroups:
                if not (H <= H1) or not add.commutator_subgroup(H1) <= H:
                    continue
                sq = subquotient(H, H1)
                Q = sq.h1ab.group
                for j in Q.elements:
                    x = GroupRingElt.monomial(group_basis(Q), j, G.p, N)
                    out = add.trace_sub(H, H1, x)
                    if j in sq.image:
                        expect = GroupRingElt.monomial(group_basis(sq.image.group), sq.image.local_id[j], G.p, N, H1.order // H.order)
                        assert out == expect
                    else:
                        assert out.is_zero()
                if H == H1:
                    y = GroupRingElt(group_basis(H.ab.group), tuple(range(1, H.ab.group.order + 1)), G.p, N)
                    assert add.pi_sub(H, H, y).coeffs == y.coeffs


def test_trace_ideal_examples():
    G = group("D4")
    Z = center(G)
    assert submodule_equal(add.trace_ideal(G, Z, N), howell_form([[4, 0], [0, 4]], 2, N))
    C = group("C9")
    for H in C.subgroups:
        # abelian: W = G/H acts trivially, so the trace is multiplication by [G:H]
        T = add.trace_ideal(C, H, N)
        idx = H.index
        rows = [[idx * int(i == j) for j in range(H.order)] for i in range(H.order)]
        assert submodule_equal(T, howell_form(rows, 3, N, H.order))
    assert add.trace_ideal(C, C.full, N).length() == N * 9  # W trivial: whole ring
    assert [0] * 2 in add.trace_ideal(G, Z, N)


def test_q_examples():
    G = group("Q8")
    for c in range(len(G.classes)):
        a = cv(G, c)
        q = add.q_map(G, add.beta_cyclic(G, a))
        assert q.residual_checked(add.beta_all(G, a), N) >= N
    C = group("C9")
    rnd = random.Random(3)
    t = add.random_phi_member(C, "cyclic", N, rnd)
    q = add.q_map(C, t)
    assert q[C.full].residual_checked(t[C.full], q.prec) >= q.prec
    assert add.proj(q).residual_checked(t, q.prec) >= q.prec


@pytest.mark.parametrize("name", ["C4", "D4", "C9"])
def test_v_examples(name):
    G = group(name)
    one = add.v_map(G, add.beta_cyclic(G, cv(G, 0)))
    for H in G.cyclic_subgroups:
        assert one[H] == GroupRingElt.monomial(group_basis(H.group), 0, G.p, one[H].prec, G.order // H.order)
    for c, r in enumerate(G.classes.representatives):
        lhs = add.v_map(G, add.beta_cyclic(G, cv(G, c)))
        rhs = add.beta_cyclic(G, cv(G, G.classes.class_of[G.power(r, G.p)]))
        assert lhs.residual_checked(rhs, N) >= N


def test_v_on_trivial_group():
    T = group("C2").trivial.group
    x = GroupRingElt(group_basis(T), (7,), 2, N)
    t = add.PhiTuple(T, "cyclic", {T.full: x})
    assert add.v_map(T, t)[T.full] == x
    ta = add.PhiTuple(T, "all", {T.full: x})
    assert add.v_G_map(T, ta)[T.full] == x


@pytest.mark.parametrize("name", ["Q8", "D4", "C9", "Heis27"])
def test_v_G_square(name):
    G = group(name)
    rnd = random.Random(name)
    for _ in range(3):
        a = random_cv(G, rnd)
        lhs = add.v_G_map(G, add.beta_all(G, a))
        rhs = add.beta_all(G, add.phi_power(G, a))
        assert lhs.residual_checked(rhs, N) >= N


def test_phi_power_examples():
    G = group("C4")
    g = G.full.canonical_generator
    assert add.phi_power(G, cv(G, G.classes.class_of[g])) == cv(G, G.classes.class_of[G.mul(g, g)])
    for name in ("V4", "C3xC3", "Heis27", "C5"):
        H = group(name)
        rnd = random.Random(name)
        a = random_cv(H, rnd)
        out = add.phi_power(H, a)
        assert out == add.class_vector(H, 0, a.prec, sum(a.coeffs))
    assert add.phi_power(G, cv(G, 0)) == cv(G, 0)


def test_omega_examples():
    for name in ("C3", "C9", "Heis27", "C5"):
        G = group(name)
        rnd = random.Random(name)
        for _ in range(5):
            assert add.omega_map(G, random_cv(G, rnd))[0] == 1
    G = group("D4")
    assert add.omega_map(G, cv(G, 0, 2)) == (1, 0)
    assert add.omega_map(G, cv(G, 0, 1)) == (-1, 0)


# -- condition checks -------------------------------------------------------------


@pytest.mark.parametrize("name", DEFAULT_SUITE)
@pytest.mark.parametrize("shape", add.SHAPES)
def test_beta_images_satisfy_conditions(name, shape):
    G = group(name)
    a = random_cv(G, random.Random(f"{name}{shape}"))
    assert add.check_phi_conditions(G, add.beta_shape(G, shape, a), N).passed


def test_a3_violation():
    G = group("D4")
    Z = center(G)
    t = add.beta_cyclic(G, random_cv(G, random.Random(0)))
    bad = dict(t.entries)
    bad[Z] = t[Z] + mono(Z, 0, 1, t[Z].prec)
    rep = add.check_phi_conditions(G, add.PhiTuple(G, "cyclic", bad), N)
    assert "A3" in rep.failed()
    w = rep.conditions["A3"].witnesses
    assert any(G.subgroup_index[Z] in x["subgroups"] for x in w)


def test_a2_violation():
    G = group("D4")
    Z = center(G)
    s = next(g for g in G.elements if G.element_orders[g] == 2 and g not in Z)
    z = next(g for g in Z.members if g)
    V = G.subgroup(G.closure([s, z]))
    t = add.beta_all(G, random_cv(G, random.Random(0)))
    B = group_basis(V.ab.group)
    # add s - zs: swapped (not fixed) by conjugation with an order-4 element
    i, j = V.ab.projection[V.local_id[s]], V.ab.projection[V.local_id[G.mul(z, s)]]
    bump = GroupRingElt.monomial(B, i, 2, t.prec) - GroupRingElt.monomial(B, j, 2, t.prec)
    bad = dict(t.entries)
    bad[V] = t[V] + bump
    rep = add.check_phi_conditions(G, add.PhiTuple(G, "all", bad), N)
    assert "A2" in rep.failed()


def test_condition_report_json():
    G = group("C4")
    rep = add.check_phi_conditions(G, add.beta_cyclic(G, cv(G, 1)), N)
    d = rep.to_dict()
    assert d["passed"] is True and set(d["conditions"]) == {"A1", "A2", "A3"}


# -- module structure -------------------------------------------------------------


@pytest.mark.parametrize("name", DEFAULT_SUITE)
@pytest.mark.parametrize("shape", add.SHAPES)
def test_solved_module_equals_beta_span(name, shape):
    G = group(name)
    B = add.phi_module_basis(G, shape, N)
    assert submodule_equal(B, add.beta_image_basis(G, shape, N))


@pytest.mark.parametrize("name", DEFAULT_SUITE)
def test_beta_image_rank(name):
    # one extra digit of modulus adds one digit per free generator
    G = group(name)
    grow = add.beta_image_basis(G, "cyclic", N + 1).length() - add.beta_image_basis(G, "cyclic", N).length()
    assert grow == len(G.classes)


def test_trivial_group_module_rank():
    T = group("C3").trivial.group
    assert add.phi_module_basis(T, "cyclic", N).length() == N


@pytest.mark.parametrize("name", ["D4", "Q8", "C9", "C3xC3"])
def test_tau_integral_on_module_basis(name):
    G = group(name)
    B = add.phi_module_basis(G, "cyclic", N)
    for row in B.rows:
        t = add.PhiTuple.from_flat(G, "cyclic", row, N)
        back = add.tau(G, t)
        assert back.is_integral()
        assert add.beta_cyclic(G, back).residual_checked(t, back.prec) >= back.prec


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["D4", "Q8", "C8", "Heis27"]), st.randoms(use_true_random=False))
def test_beta_transitivity(name, rnd):
    G = group(name)
    a = random_cv(G, rnd)
    subs = G.cyclic_subgroups
    for H in subs:
        for H1 in subs:
            if H <= H1:
                via = add.beta_H(H1, H, add.beta_H(G, H1, a))
                assert via == add.beta_H(G, H, a)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["D4", "Q8", "Heis27"]), st.randoms(use_true_random=False))
def test_beta_equivariance(name, rnd):
    G = group(name)
    a = random_cv(G, rnd)
    for H in G.subgroups:
        g = rnd.randrange(G.order)
        K = conjugate_subgroup(G, H, g)
        assert transport(H, K, g, add.beta_H(G, H, a)) == add.beta_H(G, K, a)


def test_bad_inputs():
    G = group("C4")
    with pytest.raises(BasisMismatch):
        add.tau(G, add.beta_all(G, cv(G, 0)))
    with pytest.raises(BasisMismatch):
        add.beta_H(G, G.full, GroupRingElt.one(conj_basis(group("V4")), 2, N))
    assert power_subgroup(G.full).order == 2
