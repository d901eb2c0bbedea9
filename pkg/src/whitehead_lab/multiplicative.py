"""The multiplicative side: units of Z_p[G] against tuples of units over abelianisations.

K_1 classes are represented by units of ``Z_p[G]`` (the ring is local, so
units surject onto K_1).  Norms are determinants of restriction matrices,
projected to ``Z_p[H^ab]`` before the determinant is taken.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .additive import (
    _a1_pairs,
    ConditionReport,
    ConditionResult,
    PhiTuple,
    beta_H,
    phi_power,
    pi_sub,
    trace_ideal,
)
from .errors import BasisMismatch, IntegralityViolation, M3Violation, NotAUnit, NotCyclic
from .groups import FiniteGroup, Subgroup, conjugate_subgroup, power_subgroup, subquotient
from .grouprings import (
    GroupRingElt,
    augmentation,
    char_twist,
    conj_basis,
    conj_project,
    det_local,
    group_basis,
    invert_unit,
    is_unit,
    log_unit,
    pushforward,
    restriction_matrix,
    to_ab,
    transport,
)
from .padic import PrecisionContext, howell_form, teichmueller


def require_unit(x: GroupRingElt) -> GroupRingElt:
    if not x.basis.multiplicative or not is_unit(x):
        raise NotAUnit("expected a unit of a group ring")
    return x


@dataclass(frozen=True)
class PsiTuple:
    """A unit ``x_H`` of ``Z_p[H^ab]`` for every subgroup ``H``."""

    G: FiniteGroup
    entries: dict[Subgroup, GroupRingElt] = field(hash=False)

    def __post_init__(self) -> None:
        for H, x in self.entries.items():
            if x.basis != group_basis(H.ab.group):
                raise BasisMismatch("entry does not live on Z_p[H^ab]")
            require_unit(x)

    def __getitem__(self, H: Subgroup) -> GroupRingElt:
        return self.entries[H]

    @property
    def p(self) -> int:
        return self.G.p

    @property
    def prec(self) -> int:
        return min(x.prec for x in self.entries.values())

    def replace(self, H: Subgroup, x: GroupRingElt) -> "PsiTuple":
        e = dict(self.entries)
        e[H] = x
        return PsiTuple(self.G, e)

    def __mul__(self, other: "PsiTuple") -> "PsiTuple":
        return PsiTuple(self.G, {H: self.entries[H] * other.entries[H] for H in self.entries})


def constant_tuple(G: FiniteGroup, c: int, prec: int) -> PsiTuple:
    """``c`` in every slot (``c = 1`` is the identity; Teichmueller ``c`` gives a torsion tuple)."""
    return PsiTuple(G, {H: GroupRingElt.monomial(group_basis(H.ab.group), 0, G.p, prec, c) for H in G.subgroups})


def teichmueller_tuple(G: FiniteGroup, residue: int, prec: int) -> PsiTuple:
    return constant_tuple(G, teichmueller(residue, G.p, prec).residue, prec)


# -- norms ---------------------------------------------------------------------------


def theta_H(G: FiniteGroup, H: Subgroup, u: GroupRingElt) -> GroupRingElt:
    """Norm of ``u`` to ``Z_p[H]``, projected to ``Z_p[H^ab]``."""
    require_unit(u)
    if u.group is not G:
        raise BasisMismatch("unit does not live on Z_p[G]")
    M = restriction_matrix(u, H)
    Mab = [[to_ab(H, e) for e in row] for row in M]
    return det_local(Mab)


def theta_all(G: FiniteGroup, u: GroupRingElt) -> PsiTuple:
    return PsiTuple(G, {H: theta_H(G, H, u) for H in G.subgroups})


def nr_map(H: Subgroup, H1: Subgroup, x: GroupRingElt) -> GroupRingElt:
    """Norm ``Z_p[H1^ab] -> Z_p[H/[H1,H1]]``."""
    sq = subquotient(H, H1)
    if x.basis != group_basis(sq.h1ab.group):
        raise BasisMismatch("nr expects an element of Z_p[H1^ab]")
    require_unit(x)
    return det_local(restriction_matrix(x, sq.image))


# -- alpha, ver, u ----------------------------------------------------------------------


def alpha(P: Subgroup, x: GroupRingElt, char: int = 1) -> GroupRingElt:
    """``x^p / prod_k twist_k(x)`` on ``Z_p[P]``; the identity for trivial ``P``.

    ``char`` selects which order-p character of ``P`` is used (as a power of
    the default one); the product over all its powers does not depend on it.
    """
    if not P.is_cyclic:
        raise NotCyclic("alpha is defined on cyclic subgroups")
    if x.basis != group_basis(P.group):
        raise BasisMismatch("alpha expects an element of Z_p[P]")
    require_unit(x)
    if P.order == 1:
        return x
    p = P.ambient.p
    acc = char_twist(x, 0)
    for k in range(1, p):
        acc = acc * char_twist(x, (k * char) % p)
    denom = acc.descend()
    return x**p * invert_unit(denom)


def ver_push(P: Subgroup, H: Subgroup, x: GroupRingElt) -> GroupRingElt:
    """Image of ``x`` in ``Z_p[H^ab]`` under ``h -> h^p`` (requires ``P^p <= H``)."""
    G = P.ambient
    f = [H.ab.projection[H.local_id[G.power(g, G.p)]] for g in P.members]
    return pushforward(f, x, group_basis(H.ab.group), check=False)


def u_map(G: FiniteGroup, H: Subgroup, t: PsiTuple, char: int = 1) -> GroupRingElt:
    """``prod over cyclic P with P^p <= H`` of ``ver(alpha_P(x_P))^|P^p|`` in ``Z_p[H^ab]``."""
    acc = GroupRingElt.one(group_basis(H.ab.group), G.p, t.prec)
    for P in G.cyclic_subgroups:
        Pp = power_subgroup(P)
        if not Pp <= H:
            continue
        a = alpha(P, t.entries[P], char)
        acc = acc * ver_push(P, H, a) ** Pp.order
    return acc


# -- logarithms ------------------------------------------------------------------------


def _assert_integral(x: GroupRingElt, what: str) -> GroupRingElt:
    if x.shift:
        raise IntegralityViolation(f"{what} has a coefficient of valuation {x.valuation()}")
    return x


def integral_log_L(G: FiniteGroup, u: GroupRingElt) -> GroupRingElt:
    """``L(u) = log(u) - phi(log(u))/p`` as an integral class vector."""
    require_unit(u)
    lg = conj_project(log_unit(u))
    L = lg - phi_power(G, lg).divide(G.p)
    return _assert_integral(L, "L(u)")


def scaled_log_quotient(G: FiniteGroup, P: Subgroup, t: PsiTuple, char: int = 1) -> GroupRingElt:
    """``log(x_P^(p|P|) / u_{G,P}(t)) / (p|P|)`` on ``Z_p[P^ab]``."""
    n = G.p * P.order
    x = t.entries[P]
    uq = u_map(G, P, t, char)
    if (augmentation(x) ** n - augmentation(uq)) % G.p:
        raise M3Violation(f"quotient at subgroup of order {P.order} is not 1 mod J")
    q = x**n * invert_unit(uq)
    return log_unit(q).divide(n)


def script_L(G: FiniteGroup, t: PsiTuple, char: int = 1) -> PhiTuple:
    out = {}
    for P in G.subgroups:
        out[P] = _assert_integral(scaled_log_quotient(G, P, t, char), "script L")
    return PhiTuple(G, "all", out)


# -- comparisons modulo p-power torsion ------------------------------------------------


def torsion_residual(x: GroupRingElt, y: GroupRingElt) -> int:
    """Largest ``n`` with ``x/y = s g (mod p^n)`` for a monomial ``g`` and ``s = 1`` (``s = +-1`` if p = 2)."""
    d = x * invert_unit(y)
    p = x.p
    signs = (1, -1) if p == 2 else (1,)
    best = 0
    for i, c in enumerate(d.coeffs):
        if c % p == 0:
            continue
        for s in signs:
            m = GroupRingElt.monomial(d.basis, i, p, d.prec, s)
            best = max(best, d.residual(m))
    return best


def check_psi_conditions(G: FiniteGroup, t: PsiTuple, n_check: int, char: int = 1) -> ConditionReport:
    """M1-M4 at precision ``n_check``; M1/M2 compare modulo p-power torsion."""
    idx = G.subgroup_index
    report = {k: ConditionResult(k) for k in ("M1", "M2", "M3", "M4")}
    ent = t.entries
    for H, H1 in _a1_pairs(G, "all"):
        r = torsion_residual(nr_map(H, H1, ent[H1]), pi_sub(H, H1, ent[H]))
        if r < n_check:
            report["M1"].fail({"subgroups": [idx[H], idx[H1]], "residual": r}, r)
    for H in G.subgroups:
        for g in G.generator_ids:
            K = conjugate_subgroup(G, H, g)
            r = torsion_residual(transport(H, K, g, ent[H]), ent[K])
            if r < n_check:
                report["M2"].fail({"subgroups": [idx[H], idx[K]], "element": g, "residual": r}, r)
    quotients = {}
    for P in G.subgroups:
        n = G.p * P.order
        uq = u_map(G, P, t, char)
        x = ent[P]
        if (augmentation(x) ** n - augmentation(uq)) % G.p:
            report["M3"].fail({"subgroups": [idx[P]]})
            continue
        if P.is_cyclic:
            quotients[P] = x**n * invert_unit(uq)
    for P, q in quotients.items():
        d = q - GroupRingElt.one(q.basis, G.p, q.prec)
        T = trace_ideal(G, P, n_check)
        scale = G.p * P.order
        big = howell_form([[scale * a for a in row] for row in T.rows], G.p, n_check, T.ncols)
        v = d.integral_coeffs(n_check)
        if v not in big:
            report["M4"].fail({"subgroups": [idx[P]], "remainder": [int(a) for a in big.reduce(v)]})
    return ConditionReport(report, n_check)


# -- identities --------------------------------------------------------------------------


def _residual(lhs: GroupRingElt, rhs: GroupRingElt, n_check: int | None) -> int:
    return lhs.residual(rhs) if n_check is None else lhs.residual_checked(rhs, n_check)


def key_identity_check(
    G: FiniteGroup, H: Subgroup, u: GroupRingElt, theta: PsiTuple | None = None, n_check: int | None = None
) -> int:
    """Valuation of ``beta_H(L(u)) - log(theta_H(u)^(p|H|) / u_{G,H}(theta(u))) / (p|H|)``.

    With ``n_check`` set, raises PrecisionExhausted when the working precision
    cannot certify agreement to ``p^n_check``.
    """
    lhs = beta_H(G, H, integral_log_L(G, u))
    t = theta if theta is not None else theta_all(G, u)
    rhs = scaled_log_quotient(G, H, t)
    return _residual(lhs, rhs, n_check)


def oliver_taylor_check(G: FiniteGroup, H: Subgroup, u: GroupRingElt, n_check: int | None = None) -> int:
    """Valuation of ``beta_H(log u) - log(theta_H(u))``."""
    lhs = beta_H(G, H, conj_project(log_unit(u)))
    rhs = log_unit(theta_H(G, H, u))
    return _residual(lhs, rhs, n_check)


# -- sampling ------------------------------------------------------------------------------

UNIT_SHAPES = ("general", "principal", "trivial")


def random_unit(G: FiniteGroup, ctx: PrecisionContext, shape: str = "general", rng: random.Random | None = None) -> GroupRingElt:
    """Seeded unit of ``Z_p[G]`` at precision ``ctx.n_work``.

    ``"trivial"`` is a group element, ``"principal"`` is ``1 + p r``, and
    ``"general"`` is Teichmueller scalar x group element x (1 + m) with ``m`` in
    the maximal ideal.  Coefficients of ``r`` and ``m`` lie in ``[-p^3, p^3]``.
    """
    rng = rng if rng is not None else random.Random(ctx.seed)
    p, prec = G.p, ctx.n_work
    B = group_basis(G)
    bound = p**3
    if shape == "trivial":
        return GroupRingElt.monomial(B, rng.randrange(G.order), p, prec)
    r = [rng.randint(-bound, bound) for _ in range(G.order)]
    if shape == "principal":
        c = [p * x for x in r]
        c[0] += 1
        return GroupRingElt(B, tuple(c), p, prec)
    if shape != "general":
        raise ValueError(f"unknown unit shape {shape!r}")
    r[0] -= sum(r) % p  # augmentation divisible by p: r lies in the maximal ideal
    r[0] += 1
    one_plus_m = GroupRingElt(B, tuple(r), p, prec)
    g = GroupRingElt.monomial(B, rng.randrange(G.order), p, prec)
    c = teichmueller(rng.randrange(1, p), p, prec).residue
    if p == 2 and rng.random() < 0.5:
        c = -c
    return (g * one_plus_m) * c


def sample_units(G: FiniteGroup, ctx: PrecisionContext, count: int, stream: str = "units") -> list[GroupRingElt]:
    """``count`` units from a stream seeded by ``(ctx.seed, stream)``; shapes cycle general-heavy."""
    rng = random.Random(f"{ctx.seed}:{stream}:{G.order}")
    shapes = ("general", "general", "principal", "general", "trivial")
    return [random_unit(G, ctx, shapes[i % len(shapes)], rng) for i in range(count)]


def commutator_unit(x: GroupRingElt, y: GroupRingElt) -> GroupRingElt:
    """``x y x^-1 y^-1``: trivial in K_1, so every norm is 1."""
    return x * y * invert_unit(x) * invert_unit(y)


def quotient_class_map(G: FiniteGroup, projection, Q: FiniteGroup) -> list[int]:
    """Class of ``G`` -> class of ``Q`` under a quotient map given on elements."""
    return [Q.classes.class_of[projection[r]] for r in G.classes.representatives]


def push_unit(u: GroupRingElt, projection, Q: FiniteGroup) -> GroupRingElt:
    return pushforward(list(projection), u, group_basis(Q), check=False)


def push_classes(a: GroupRingElt, projection, Q: FiniteGroup) -> GroupRingElt:
    return pushforward(quotient_class_map(a.group, projection, Q), a, conj_basis(Q), check=False)


def omega_of(G: FiniteGroup, a: GroupRingElt) -> tuple[int, int]:
    """``omega`` on an integral class vector (re-exported for the suite)."""
    from .additive import omega_map

    return omega_map(G, a)
