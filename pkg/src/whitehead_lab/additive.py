"""The additive side: Z_p[Conj(G)] against tuples over abelian subquotients.

Tuples come in two shapes.  ``"cyclic"`` tuples have one entry in ``Z_p[H]``
per cyclic subgroup ``H``; ``"all"`` tuples have one entry in ``Z_p[H^ab]`` per
subgroup.  For cyclic ``H`` both rings are the same object, so projecting an
``"all"`` tuple to the cyclic shape is plain restriction of the index set.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import BasisMismatch, InternalMismatch, NonIntegralInput, NonIntegralResult, NotCyclic
from .groups import (
    FiniteGroup,
    Subgroup,
    commutator_subgroup,
    conjugate_subgroup,
    coset_reps,
    normalizer,
    power_subgroup,
    subquotient,
    weyl_reps,
)
from .grouprings import (
    Basis,
    GroupRingElt,
    conj_basis,
    group_basis,
    pushforward,
    restriction_matrix,
    transport,
)
from .padic import HowellBasis, howell_form, kernel_basis

SHAPES = ("cyclic", "all")


# -- tuples and reports ------------------------------------------------------------------


def shape_subgroups(G: FiniteGroup, shape: str) -> tuple[Subgroup, ...]:
    if shape == "cyclic":
        return G.cyclic_subgroups
    if shape == "all":
        return G.subgroups
    raise ValueError(f"unknown shape {shape!r}")


def entry_basis(H: Subgroup, shape: str) -> Basis:
    return group_basis(H.group if shape == "cyclic" else H.ab.group)


@dataclass(frozen=True)
class PhiTuple:
    """A family ``(a_H)`` indexed by cyclic subgroups or by all subgroups of ``G``."""

    G: FiniteGroup
    shape: str
    entries: dict[Subgroup, GroupRingElt] = field(hash=False)

    def __getitem__(self, H: Subgroup) -> GroupRingElt:
        return self.entries[H]

    @property
    def p(self) -> int:
        return self.G.p

    @property
    def prec(self) -> int:
        return min(e.prec for e in self.entries.values())

    def flatten(self, n: int) -> list[int]:
        out: list[int] = []
        for H in shape_subgroups(self.G, self.shape):
            out.extend(self.entries[H].integral_coeffs(n))
        return out

    @classmethod
    def from_flat(cls, G: FiniteGroup, shape: str, vec: Iterable[int], prec: int) -> "PhiTuple":
        vec = list(vec)
        entries = {}
        pos = 0
        for H in shape_subgroups(G, shape):
            B = entry_basis(H, shape)
            entries[H] = GroupRingElt(B, tuple(vec[pos : pos + B.size]), G.p, prec)
            pos += B.size
        if pos != len(vec):
            raise BasisMismatch("vector length does not match the tuple layout")
        return cls(G, shape, entries)

    def residual(self, other: "PhiTuple") -> int:
        return min(self.entries[H].residual(other.entries[H]) for H in self.entries)

    def residual_checked(self, other: "PhiTuple", n: int) -> int:
        return min(self.entries[H].residual_checked(other.entries[H], n) for H in self.entries)

    def agrees(self, other: "PhiTuple", n: int) -> bool:
        return all(self.entries[H].agrees(other.entries[H], n) for H in self.entries)

    def __add__(self, other: "PhiTuple") -> "PhiTuple":
        return PhiTuple(self.G, self.shape, {H: self.entries[H] + other.entries[H] for H in self.entries})


def ambient_size(G: FiniteGroup, shape: str) -> int:
    return sum(entry_basis(H, shape).size for H in shape_subgroups(G, shape))


@dataclass
class ConditionResult:
    name: str
    passed: bool = True
    witnesses: list[dict] = field(default_factory=list)
    residual: int | None = None

    def fail(self, witness: dict, residual: int | None = None) -> None:
        self.passed = False
        if len(self.witnesses) < 8:
            self.witnesses.append(witness)
        if residual is not None:
            self.residual = residual if self.residual is None else min(self.residual, residual)


@dataclass
class ConditionReport:
    """Per-condition verdicts (A1-A3 or M1-M4) with failure witnesses."""

    conditions: dict[str, ConditionResult]
    precision: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def failed(self) -> list[str]:
        return [k for k, c in self.conditions.items() if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "precision": self.precision,
            "conditions": {
                k: {"passed": c.passed, "witnesses": c.witnesses, "residual": c.residual}
                for k, c in self.conditions.items()
            },
        }


# -- class vectors ---------------------------------------------------------------------------


def class_vector(G: FiniteGroup, c: int, prec: int, coeff: int = 1) -> GroupRingElt:
    """``coeff * [g]`` for the class with index ``c``."""
    return GroupRingElt.monomial(conj_basis(G), c, G.p, prec, coeff)


def as_class_vector(x: GroupRingElt) -> GroupRingElt:
    """Reinterpret an element of ``Z_p[A]`` (``A`` abelian) as a class vector of ``A``."""
    A = x.group
    if x.basis.kind == "conj":
        return x
    if not A.is_abelian:
        raise BasisMismatch("only abelian group rings coincide with their class modules")
    return GroupRingElt(conj_basis(A), x.coeffs, x.p, x.prec, x.shift)


def _ambient(K: FiniteGroup | Subgroup) -> Subgroup:
    return K.full if isinstance(K, FiniteGroup) else K


def _t_columns(K: Subgroup, H: Subgroup, target: str) -> tuple[tuple[int, ...], ...]:
    """For each class of ``K.group``: target ids hit by ``x^-1 g x`` over left cosets ``xH``."""
    G = K.ambient
    key = ("tcols", K.mask, H.mask, target)
    if key in G._memo:
        return G._memo[key]
    if not H <= K:
        raise BasisMismatch("H must be contained in the ambient subgroup")
    reps = coset_reps(K, H)
    Kc = K.group.classes
    cols = []
    for r in Kc.representatives:
        g = K.members[r]
        hits = []
        for x in reps:
            y = G.table[G.table[G.inverse[x]][g]][x]
            if y in H:
                loc = H.local_id[y]
                hits.append(H.group.classes.class_of[loc] if target == "conj" else H.ab.projection[loc])
        cols.append(tuple(hits))
    G._memo[key] = tuple(cols)
    return G._memo[key]


def _apply_columns(cols, x: GroupRingElt, target: Basis) -> GroupRingElt:
    c = [0] * target.size
    for src, hits in enumerate(cols):
        a = x.coeffs[src]
        if a:
            for t in hits:
                c[t] += a
    return GroupRingElt(target, tuple(c), x.p, x.prec, x.shift)


def _check_conj(K: Subgroup, a: GroupRingElt) -> None:
    if a.basis != conj_basis(K.group):
        raise BasisMismatch("expected a class vector of the ambient group")


def t_map(K: FiniteGroup | Subgroup, H: Subgroup, a: GroupRingElt) -> GroupRingElt:
    """``Z_p[Conj(K)] -> Z_p[Conj(H)]``: ``[g] -> sum over x in C(K,H) with x^-1 g x in H``."""
    K = _ambient(K)
    a = as_class_vector(a)
    _check_conj(K, a)
    return _apply_columns(_t_columns(K, H, "conj"), a, conj_basis(H.group))


def beta_H(K: FiniteGroup | Subgroup, H: Subgroup, a: GroupRingElt) -> GroupRingElt:
    """``t_map`` followed by ``Conj(H) -> H^ab``; lands in ``Z_p[H^ab]``."""
    K = _ambient(K)
    a = as_class_vector(a)
    _check_conj(K, a)
    return _apply_columns(_t_columns(K, H, "ab"), a, group_basis(H.ab.group))


def beta_all(G: FiniteGroup, a: GroupRingElt) -> PhiTuple:
    return PhiTuple(G, "all", {H: beta_H(G, H, a) for H in G.subgroups})


def beta_cyclic(G: FiniteGroup, a: GroupRingElt) -> PhiTuple:
    return PhiTuple(G, "cyclic", {H: beta_H(G, H, a) for H in G.cyclic_subgroups})


def beta_shape(G: FiniteGroup, shape: str, a: GroupRingElt) -> PhiTuple:
    return beta_cyclic(G, a) if shape == "cyclic" else beta_all(G, a)


def proj(t: PhiTuple) -> PhiTuple:
    """Restrict an ``"all"`` tuple to the cyclic subgroups."""
    G = t.G
    return PhiTuple(G, "cyclic", {H: t.entries[H] for H in G.cyclic_subgroups})


# -- eta, tau, q, v ------------------------------------------------------------------------


def _generator_mask(P: Subgroup) -> list[bool]:
    """Local ids of ``P.group`` that survive ``eta_P``."""
    if P.order == 1:
        return [True]
    orders = P.group.element_orders
    return [o == P.order for o in orders]


def eta(P: Subgroup, x: GroupRingElt) -> GroupRingElt:
    """Keep the coefficients of generators of ``P`` (identity map for trivial ``P``)."""
    if not P.is_cyclic:
        raise NotCyclic("eta is defined on cyclic subgroups")
    if x.basis != group_basis(P.group):
        raise BasisMismatch("eta expects an element of Z_p[P]")
    keep = _generator_mask(P)
    return GroupRingElt(x.basis, tuple(c if k else 0 for c, k in zip(x.coeffs, keep)), x.p, x.prec, x.shift)


def _scaled(x: GroupRingElt, num: int, den: int) -> GroupRingElt:
    return (x * num).divide(den) if den != 1 else x * num


def _integral(x: GroupRingElt, what: str) -> GroupRingElt:
    if x.shift:
        raise NonIntegralResult(f"{what} has valuation {x.valuation()}")
    return x


def tau(G: FiniteGroup, t: PhiTuple) -> GroupRingElt:
    """Left inverse of ``beta_cyclic``: ``h -> [eta_H(h)] / ([G:N_G H] |W_G H|)``; Q_p coefficients."""
    if t.shape != "cyclic":
        raise BasisMismatch("tau takes a cyclic-shape tuple")
    target = conj_basis(G)
    cls = G.classes.class_of
    total = GroupRingElt.zero(target, G.p, t.prec)
    for H, a in t.entries.items():
        N = normalizer(G, H)
        den = (G.order // N.order) * (N.order // H.order)
        img = pushforward([cls[g] for g in H.members], eta(H, a), target, check=False)
        total = total + _scaled(img, 1, den)
    return total


def q_map(G: FiniteGroup, t: PhiTuple) -> PhiTuple:
    """Inverse of the projection: ``q_H = sum_{cyclic P <= H} image(eta_P(a_P)) / ([H:N_H P] |W_H P|)``."""
    if t.shape != "cyclic":
        raise BasisMismatch("q takes a cyclic-shape tuple")
    out = {}
    for H in G.subgroups:
        target = group_basis(H.ab.group)
        acc = GroupRingElt.zero(target, G.p, t.prec)
        for P in G.cyclic_subgroups:
            if not P <= H:
                continue
            N = normalizer(G, P).mask & H.mask
            n_order = bin(N).count("1")
            den = (H.order // n_order) * (n_order // P.order)
            f = [H.ab.projection[H.local_id[g]] for g in P.members]
            img = pushforward(f, eta(P, t.entries[P]), target, check=False)
            acc = acc + _scaled(img, 1, den)
        out[H] = _integral(acc, "q")
    return PhiTuple(G, "all", out)


def _ver_map(P: Subgroup, H: Subgroup, into_ab: bool) -> list[int]:
    """Local ids of ``P`` -> ids of ``H`` (or ``H^ab``) under ``h -> h^p``."""
    G = P.ambient
    out = []
    for g in P.members:
        y = H.local_id[G.power(g, G.p)]
        out.append(H.ab.projection[y] if into_ab else y)
    return out


def v_map(G: FiniteGroup, t: PhiTuple) -> PhiTuple:
    """``v_H = sum_{cyclic P, P^p <= H} [P:P^p]/[H:P^p] ver(eta_P(a_P))`` for cyclic ``H``."""
    if t.shape != "cyclic":
        raise BasisMismatch("v takes a cyclic-shape tuple")
    out = {}
    for H in G.cyclic_subgroups:
        target = group_basis(H.group)
        acc = GroupRingElt.zero(target, G.p, t.prec)
        for P in G.cyclic_subgroups:
            Pp = power_subgroup(P)
            if not Pp <= H:
                continue
            num = P.order // Pp.order
            den = H.order // Pp.order
            img = pushforward(_ver_map(P, H, False), eta(P, t.entries[P]), target, check=False)
            acc = acc + _scaled(img, num, den)
        out[H] = _integral(acc, "v")
    return PhiTuple(G, "cyclic", out)


def v_G_explicit(G: FiniteGroup, t: PhiTuple, integral: bool = True) -> PhiTuple:
    """Closed form of ``q o v o proj``: weights ``[P:P^p] / ([H:N_H P^p] |W_H P^p|)``.

    ``integral=False`` skips the integrality assertion (for Q_p-valued inputs).
    """
    out = {}
    for H in G.subgroups:
        target = group_basis(H.ab.group)
        acc = GroupRingElt.zero(target, G.p, t.prec)
        for P in G.cyclic_subgroups:
            Pp = power_subgroup(P)
            if not Pp <= H:
                continue
            n_order = bin(normalizer(G, Pp).mask & H.mask).count("1")
            num = P.order // Pp.order
            den = (H.order // n_order) * (n_order // Pp.order)
            img = pushforward(_ver_map(P, H, True), eta(P, t.entries[P]), target, check=False)
            acc = acc + _scaled(img, num, den)
        out[H] = _integral(acc, "v_G") if integral else acc
    return PhiTuple(G, "all", out)


def v_G_map(G: FiniteGroup, t: PhiTuple, n_check: int | None = None) -> PhiTuple:
    """``q o v o proj``, cross-checked against the closed form."""
    if t.shape != "all":
        raise BasisMismatch("v_G takes an all-subgroups tuple")
    composite = q_map(G, v_map(G, proj(t)))
    explicit = v_G_explicit(G, t)
    n = n_check if n_check is not None else min(composite.prec, explicit.prec)
    if not composite.agrees(explicit, n):
        raise InternalMismatch("q o v o proj disagrees with the explicit v_G formula")
    return composite


def phi_power(G: FiniteGroup, a: GroupRingElt) -> GroupRingElt:
    """``[g] -> [g^p]`` on class vectors."""
    cl = G.classes
    f = [cl.class_of[G.power(r, G.p)] for r in cl.representatives]
    return pushforward(f, a, conj_basis(G), check=False)


def omega_map(G: FiniteGroup, a: GroupRingElt) -> tuple[int, int]:
    """``sum a_i [g_i] -> prod (eps g_i)^(a_i)`` as ``(sign, id in G^ab)``; ``eps = -1`` only for p = 2."""
    if a.shift:
        raise NonIntegralInput("omega needs integral coefficients")
    if a.basis != conj_basis(G):
        raise BasisMismatch("omega takes a class vector of G")
    ab = G.abelianization
    Q = ab.group
    total = sum(a.coeffs)
    sign = -1 if G.p == 2 and total % 2 else 1
    x = 0
    for r, c in zip(G.classes.representatives, a.coeffs):
        if c:
            x = Q.table[x][Q.power(ab.projection[r], c)]
    return sign, x


# -- traces, subquotients, trace ideals -----------------------------------------------------


def trace_sub(H: Subgroup, H1: Subgroup, x: GroupRingElt) -> GroupRingElt:
    """Module trace ``Z_p[H1^ab] -> Z_p[H/[H1,H1]]`` for the inclusion ``H/[H1,H1] <= H1^ab``."""
    sq = subquotient(H, H1)
    if x.basis != group_basis(sq.h1ab.group):
        raise BasisMismatch("trace_sub expects an element of Z_p[H1^ab]")
    M = restriction_matrix(x, sq.image)
    acc = M[0][0]
    for i in range(1, len(M)):
        acc = acc + M[i][i]
    return acc


def pi_sub(H: Subgroup, H1: Subgroup, x: GroupRingElt) -> GroupRingElt:
    """Natural surjection ``Z_p[H^ab] -> Z_p[H/[H1,H1]]``."""
    sq = subquotient(H, H1)
    if x.basis != group_basis(H.ab.group):
        raise BasisMismatch("pi_sub expects an element of Z_p[H^ab]")
    return pushforward(sq.pi, x, group_basis(sq.image.group), check=False)


def weyl_trace(G: FiniteGroup, H: Subgroup, x: GroupRingElt) -> GroupRingElt:
    """``x -> sum_{w in W_G H} w x w^-1`` on ``Z_p[H^ab]``."""
    acc = None
    for w in weyl_reps(G, H):
        y = transport(H, H, w, x)
        acc = y if acc is None else acc + y
    return acc


def trace_ideal(G: FiniteGroup, H: Subgroup, prec: int) -> HowellBasis:
    """Howell basis of ``T_H``, the image of the Weyl trace, inside ``Z_p[H^ab]``."""
    key = ("trace_ideal", H.mask, prec)
    if key in G._memo:
        return G._memo[key]
    B = group_basis(H.ab.group)
    rows = [weyl_trace(G, H, GroupRingElt.monomial(B, i, G.p, prec)).integral_coeffs(prec) for i in range(B.size)]
    G._memo[key] = howell_form(rows, G.p, prec, B.size)
    return G._memo[key]


# -- condition systems ---------------------------------------------------------------------


def _a1_pairs(G: FiniteGroup, shape: str) -> list[tuple[Subgroup, Subgroup]]:
    key = ("a1pairs", shape)
    if key in G._memo:
        return G._memo[key]
    subs = shape_subgroups(G, shape)
    pairs = []
    for H in subs:
        for H1 in subs:
            if H is H1 or not H <= H1:
                continue
            if shape == "all" and not commutator_subgroup(H1) <= H:
                continue
            pairs.append((H, H1))
    G._memo[key] = pairs
    return pairs


def _a1_sides(shape: str, H: Subgroup, H1: Subgroup, a_H: GroupRingElt, a_H1: GroupRingElt):
    """The two sides of A1 (``beta^{H1}_H(a_H1) = a_H`` or ``tr(a_H1) = pi(a_H)``)."""
    if shape == "cyclic":
        return beta_H(H1, H, a_H1), a_H
    return trace_sub(H, H1, a_H1), pi_sub(H, H1, a_H)


def _a2_sides(G: FiniteGroup, H: Subgroup, g: int, a_H: GroupRingElt, a_K_lookup):
    K = conjugate_subgroup(G, H, g)
    return transport(H, K, g, a_H), a_K_lookup(K), K


def check_phi_conditions(G: FiniteGroup, t: PhiTuple, n_check: int) -> ConditionReport:
    """Check A1-A3 at precision ``n_check`` for either tuple shape."""
    idx = G.subgroup_index
    report = {k: ConditionResult(k) for k in ("A1", "A2", "A3")}
    ent = t.entries
    for H, H1 in _a1_pairs(G, t.shape):
        lhs, rhs = _a1_sides(t.shape, H, H1, ent[H], ent[H1])
        r = lhs.residual_checked(rhs, n_check)
        if r < n_check:
            report["A1"].fail({"subgroups": [idx[H], idx[H1]], "residual": r}, r)
    for H in ent:
        for g in G.generator_ids:
            moved, target, K = _a2_sides(G, H, g, ent[H], ent.__getitem__)
            r = moved.residual_checked(target, n_check)
            if r < n_check:
                report["A2"].fail({"subgroups": [idx[H], idx[K]], "element": g, "residual": r}, r)
    for H in ent:
        if not H.is_cyclic:
            continue
        a = ent[H]
        if a.shift:
            report["A3"].fail({"subgroups": [idx[H]], "reason": "non-integral"}, a.valuation())
            continue
        T = trace_ideal(G, H, n_check)
        v = a.integral_coeffs(n_check)
        if v not in T:
            report["A3"].fail({"subgroups": [idx[H]], "remainder": [int(x) for x in T.reduce(v)]})
    return ConditionReport(report, n_check)


def _linear_map_columns(fn, src: Basis, p: int, prec: int) -> list[tuple[int, ...]]:
    return [fn(GroupRingElt.monomial(src, i, p, prec)).integral_coeffs(prec) for i in range(src.size)]


def condition_matrix(G: FiniteGroup, shape: str, prec: int) -> list[list[int]]:
    """Integer rows encoding A1 and A2 as ``rows . a = 0`` on the flattened tuple."""
    subs = shape_subgroups(G, shape)
    offsets = {}
    pos = 0
    for H in subs:
        offsets[H] = pos
        pos += entry_basis(H, shape).size
    width = pos
    rows: list[list[int]] = []

    def add_block(lhs_H, lhs_fn, rhs_H, rhs_fn, out_size):
        block = [[0] * width for _ in range(out_size)]
        for H, fn, sgn in ((lhs_H, lhs_fn, 1), (rhs_H, rhs_fn, -1)):
            cols = _linear_map_columns(fn, entry_basis(H, shape), G.p, prec)
            for j, col in enumerate(cols):
                for i, c in enumerate(col):
                    if c:
                        block[i][offsets[H] + j] += sgn * c
        rows.extend(r for r in block if any(r))

    for H, H1 in _a1_pairs(G, shape):
        if shape == "cyclic":
            lhs = (H1, lambda x, H=H, H1=H1: beta_H(H1, H, x))
            rhs = (H, lambda x: x)
            out = H.order
        else:
            lhs = (H1, lambda x, H=H, H1=H1: trace_sub(H, H1, x))
            rhs = (H, lambda x, H=H, H1=H1: pi_sub(H, H1, x))
            out = subquotient(H, H1).image.order
        add_block(lhs[0], lhs[1], rhs[0], rhs[1], out)
    for H in subs:
        for g in G.generator_ids:
            K = conjugate_subgroup(G, H, g)
            add_block(H, lambda x, H=H, K=K, g=g: transport(H, K, g, x), K, lambda x: x, entry_basis(K, shape).size)
    return rows


def phi_module_basis(G: FiniteGroup, shape: str, prec: int) -> HowellBasis:
    """Howell basis (mod p^prec) of the solution module of A1-A3 in the flattened tuple space.

    A3 is imposed by parametrising each cyclic entry as a Weyl trace; A1 and A2
    become a Z_p-linear kernel, solved with enough headroom that the result is
    the reduction of the true Z_p-module.
    """
    key = ("phi_basis", shape, prec)
    if key in G._memo:
        return G._memo[key]
    subs = shape_subgroups(G, shape)
    width = ambient_size(G, shape)
    # parametrisation Psi: params -> ambient
    psi_cols: list[list[int]] = []
    offset = 0
    for H in subs:
        B = entry_basis(H, shape)
        for i in range(B.size):
            col = [0] * width
            if H.is_cyclic:
                tr = weyl_trace(G, H, GroupRingElt.monomial(B, i, G.p, prec)).integral_coeffs(prec)
                for j, c in enumerate(tr):
                    col[offset + j] = c
            else:
                col[offset + i] = 1
            psi_cols.append(col)
        offset += B.size
    A = condition_matrix(G, shape, prec)
    nparams = len(psi_cols)
    APsi = [[sum(r[k] * col[k] for k in range(width) if r[k]) for col in psi_cols] for r in A]
    K = kernel_basis(APsi, nparams, G.p, prec)
    rows = [[sum(k[j] * psi_cols[j][i] for j in range(nparams)) for i in range(width)] for k in K.rows]
    basis = howell_form(rows, G.p, prec, width)
    G._memo[key] = basis
    return basis


def beta_image_basis(G: FiniteGroup, shape: str, prec: int) -> HowellBasis:
    rows = [beta_shape(G, shape, class_vector(G, c, prec)).flatten(prec) for c in range(len(G.classes))]
    return howell_form(rows, G.p, prec, ambient_size(G, shape))


def random_phi_member(G: FiniteGroup, shape: str, prec: int, rng) -> PhiTuple:
    """Random Z_p-combination of the Howell rows of the solution module."""
    B = phi_module_basis(G, shape, prec)
    q = G.p**prec
    vec = [0] * B.ncols
    for row in B.rows:
        c = rng.randrange(q)
        vec = [(a + c * b) % q for a, b in zip(vec, row)]
    return PhiTuple.from_flat(G, shape, vec, prec)
