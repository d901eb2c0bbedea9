"""Finite p-groups as Cayley tables, with subgroup and conjugacy machinery.

Elements are integer ids ``0 .. order-1`` with 0 the identity.  Permutations
compose right-to-left: ``(a * b)(x) = a(b(x))``.  Cosets are always *left*
cosets ``xH`` with representative the smallest id in the coset, and the
conjugate of ``g`` by a coset representative ``x`` is ``x^-1 g x``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

from .errors import GroupTooLarge, InputError, NotAPGroup, NotCyclic, PreconditionViolated, UnknownCatalogEntry

DEFAULT_ORDER_CAP = 256


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def is_power_of(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def log_p(n: int, p: int) -> int:
    """Exponent k with p**k == n (n must be a power of p)."""
    k = 0
    while n > 1:
        if n % p:
            raise ValueError(f"{n} is not a power of {p}")
        n //= p
        k += 1
    return k


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite p-group given by its multiplication table.

    Instances compare by identity; all derived data is memoised on the object.
    """

    p: int
    table: tuple[tuple[int, ...], ...]
    inverse: tuple[int, ...]
    generator_ids: tuple[int, ...]
    name: str = ""
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def elements(self) -> range:
        return range(self.order)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverse[a]

    def power(self, a: int, n: int) -> int:
        n %= self.element_orders[a]
        result, base = 0, a
        while n:
            if n & 1:
                result = self.table[result][base]
            base = self.table[base][base]
            n >>= 1
        return result

    def conj(self, g: int, x: int) -> int:
        """``x g x^-1``."""
        return self.table[self.table[x][g]][self.inverse[x]]

    def commutator(self, a: int, b: int) -> int:
        t = self.table
        return t[t[t[a][b]][self.inverse[a]]][self.inverse[b]]

    @cached_property
    def element_orders(self) -> tuple[int, ...]:
        orders = []
        for g in self.elements:
            k, x = 1, g
            while x != 0:
                x = self.table[x][g]
                k += 1
            orders.append(k)
        return tuple(orders)

    @cached_property
    def is_abelian(self) -> bool:
        t = self.table
        return all(t[a][b] == t[b][a] for a in self.generator_ids for b in self.generator_ids)

    # -- subgroups -----------------------------------------------------

    def closure(self, gens: Iterable[int]) -> int:
        """Bitmask of the subgroup generated by ``gens``."""
        gens = [g for g in set(gens) if g != 0]
        mask = 1
        frontier = [0]
        t = self.table
        while frontier:
            nxt = []
            for e in frontier:
                row = t[e]
                for s in gens:
                    x = row[s]
                    if not mask >> x & 1:
                        mask |= 1 << x
                        nxt.append(x)
            frontier = nxt
        return mask

    def subgroup(self, members: int | Iterable[int]) -> "Subgroup":
        """Interned :class:`Subgroup` for a member bitmask (or iterable of ids)."""
        if not isinstance(members, int):
            mask = 0
            for m in members:
                mask |= 1 << m
        else:
            mask = members
        cache = self._memo.setdefault("subgroups", {})
        sub = cache.get(mask)
        if sub is None:
            sub = Subgroup(self, mask)
            cache[mask] = sub
        return sub

    def generated(self, gens: Iterable[int]) -> "Subgroup":
        return self.subgroup(self.closure(gens))

    @cached_property
    def full(self) -> "Subgroup":
        return self.subgroup((1 << self.order) - 1)

    @cached_property
    def trivial(self) -> "Subgroup":
        return self.subgroup(1)

    @cached_property
    def classes(self) -> "ConjClassSet":
        return _conjugacy_classes(self)

    @cached_property
    def subgroups(self) -> tuple["Subgroup", ...]:
        return _all_subgroups(self)

    @cached_property
    def cyclic_subgroups(self) -> tuple["Subgroup", ...]:
        return tuple(H for H in self.subgroups if H.is_cyclic)

    @cached_property
    def subgroup_index(self) -> dict["Subgroup", int]:
        return {H: i for i, H in enumerate(self.subgroups)}

    @cached_property
    def abelianization(self) -> "QuotientGroup":
        return quotient(self, commutator_subgroup(self))

    def __repr__(self) -> str:
        label = self.name or "group"
        return f"<FiniteGroup {label} order={self.order} p={self.p}>"


@dataclass(frozen=True, eq=False)
class Subgroup:
    """A subgroup of ``ambient`` stored as a member bitmask.

    Use :meth:`FiniteGroup.subgroup` to obtain interned instances; derived data
    (local group, abelianisation, ...) is cached per instance.
    """

    ambient: FiniteGroup
    mask: int

    def __hash__(self) -> int:
        return hash(self.mask)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Subgroup) and other.mask == self.mask and other.ambient is self.ambient

    def __contains__(self, g: int) -> bool:
        return bool(self.mask >> g & 1)

    def __le__(self, other: "Subgroup") -> bool:
        return self.mask & ~other.mask == 0

    def __lt__(self, other: "Subgroup") -> bool:
        return self <= other and self.mask != other.mask

    @cached_property
    def members(self) -> tuple[int, ...]:
        return tuple(g for g in self.ambient.elements if self.mask >> g & 1)

    @property
    def order(self) -> int:
        return len(self.members)

    @property
    def index(self) -> int:
        return self.ambient.order // self.order

    @cached_property
    def is_cyclic(self) -> bool:
        orders = self.ambient.element_orders
        return any(orders[g] == self.order for g in self.members)

    @cached_property
    def canonical_generator(self) -> int | None:
        """Smallest generating id for a cyclic subgroup, else ``None``."""
        orders = self.ambient.element_orders
        for g in self.members:
            if orders[g] == self.order:
                return g
        return None

    @cached_property
    def generators(self) -> tuple[int, ...]:
        gens: list[int] = []
        mask = 1
        for g in self.members:
            if not mask >> g & 1:
                gens.append(g)
                mask = self.ambient.closure(gens)
                if mask == self.mask:
                    break
        return tuple(gens)

    @cached_property
    def local_id(self) -> dict[int, int]:
        return {g: i for i, g in enumerate(self.members)}

    @cached_property
    def group(self) -> FiniteGroup:
        """The subgroup as a standalone group on local ids (position in ``members``).

        The full subgroup returns the ambient group itself.
        """
        G = self.ambient
        if self.order == G.order:
            return G
        loc = self.local_id
        mem = self.members
        table = tuple(tuple(loc[G.table[a][b]] for b in mem) for a in mem)
        inverse = tuple(loc[G.inverse[a]] for a in mem)
        gens = tuple(loc[g] for g in self.generators)
        return FiniteGroup(G.p, table, inverse, gens, name=f"sub{self.order}")

    @cached_property
    def ab(self) -> "QuotientGroup":
        """Abelianisation of the subgroup, as a quotient of :attr:`group`."""
        return self.group.abelianization

    def localize(self, K: "Subgroup") -> "Subgroup":
        """``K`` (a subgroup of the same ambient, contained in self) as a subgroup of :attr:`group`."""
        if not K <= self:
            raise PreconditionViolated("subgroup not contained")
        return self.group.subgroup(self.local_id[g] for g in K.members)

    def __repr__(self) -> str:
        return f"<Subgroup order={self.order} members={list(self.members)}>"


@dataclass(frozen=True, eq=False)
class QuotientGroup:
    """``source / kernel`` with canonical coset ids (ordered by smallest member)."""

    source: FiniteGroup
    kernel: Subgroup
    projection: tuple[int, ...]
    lifts: tuple[int, ...]
    group: FiniteGroup


@dataclass(frozen=True)
class ConjClassSet:
    class_of: tuple[int, ...]
    representatives: tuple[int, ...]
    members: tuple[tuple[int, ...], ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(m) for m in self.members)

    def __len__(self) -> int:
        return len(self.representatives)


# -- construction ------------------------------------------------------


def _cycles_to_perm(cycles: Sequence[Sequence[int]], degree: int) -> tuple[int, ...]:
    perm = list(range(degree))
    for cyc in cycles:
        cyc = [c - 1 for c in cyc]
        if len(set(cyc)) != len(cyc) or any(c < 0 for c in cyc):
            raise InputError(f"invalid cycle {cyc}")
        for i, c in enumerate(cyc):
            perm[c] = cyc[(i + 1) % len(cyc)]
    return tuple(perm)


def build_group(
    generators: Sequence, p: int, cap: int = DEFAULT_ORDER_CAP, name: str = ""
) -> FiniteGroup:
    """Close permutation generators to a Cayley table.

    ``generators`` holds either permutations in cycle notation (a list of cycles
    on points ``1..n``) or image tuples on ``0..n-1``.  Element ids follow BFS
    discovery order from the identity, multiplying on the right by generators.
    """
    if not is_prime(p):
        raise InputError(f"{p} is not prime")
    perms = []
    degree = 1
    for gen in generators:
        if gen and isinstance(gen[0], (list, tuple)):
            degree = max(degree, max((max(c) for c in gen if c), default=1))
    for gen in generators:
        if gen and isinstance(gen[0], (list, tuple)):
            perms.append(_cycles_to_perm(gen, degree))
        elif not gen:
            perms.append(tuple(range(degree)))
        else:
            perm = tuple(gen)
            if sorted(perm) != list(range(len(perm))):
                raise InputError(f"invalid permutation {gen}")
            perms.append(perm)
    degree = max([degree] + [len(q) for q in perms])
    perms = [q + tuple(range(len(q), degree)) for q in perms]
    identity = tuple(range(degree))

    index = {identity: 0}
    elements = [identity]
    queue = deque([identity])
    while queue:
        e = queue.popleft()
        for s in perms:
            x = tuple(e[s[i]] for i in range(degree))
            if x not in index:
                index[x] = len(elements)
                elements.append(x)
                if len(elements) > cap:
                    raise GroupTooLarge(f"group order exceeds cap {cap}")
                queue.append(x)
    n = len(elements)
    if not is_power_of(n, p):
        raise NotAPGroup(f"order {n} is not a power of {p}")
    table = tuple(
        tuple(index[tuple(a[b[i]] for i in range(degree))] for b in elements) for a in elements
    )
    inverse = tuple(row.index(0) for row in table)
    gen_ids = tuple(dict.fromkeys(index[q] for q in perms if index[q] != 0))
    return FiniteGroup(p, table, inverse, gen_ids, name=name)


def group_from_table(table: Sequence[Sequence[int]], p: int, name: str = "") -> FiniteGroup:
    """Wrap an explicit Cayley table (identity must be id 0)."""
    table = tuple(tuple(r) for r in table)
    n = len(table)
    if not is_power_of(n, p):
        raise NotAPGroup(f"order {n} is not a power of {p}")
    inverse = tuple(row.index(0) for row in table)
    G = FiniteGroup(p, table, inverse, (), name=name)
    gens: list[int] = []
    mask = 1
    for g in range(n):
        if not mask >> g & 1:
            gens.append(g)
            mask = G.closure(gens)
    return FiniteGroup(p, table, inverse, tuple(gens), name=name)


def _regular_generators(labels: list, mul: Callable, gens: list) -> list[tuple[int, ...]]:
    idx = {x: i for i, x in enumerate(labels)}
    return [tuple(idx[mul(g, x)] for x in labels) for g in gens]


def _cyclic_perms(n: int) -> list[tuple[int, ...]]:
    return [tuple((i + 1) % n for i in range(n))] if n > 1 else []


def _catalog_perms(name: str, params: dict, p: int) -> list[tuple[int, ...]]:
    if name == "cyclic":
        return _cyclic_perms(int(params["n"]))
    if name == "elementary_abelian":
        rank = int(params.get("rank", 2))
        return _product_perms([_cyclic_perms(p)] * rank, [p] * rank)
    if name == "dihedral":
        n = int(params["n"])
        m = n // 2
        if n % 2 or m < 2:
            raise InputError("dihedral order must be even and at least 4")
        rot = tuple((i + 1) % m for i in range(m))
        ref = tuple((-i) % m for i in range(m))
        if m == 2:
            # V4 realised on 4 points so the reflection is not the rotation
            return [(1, 0, 3, 2), (2, 3, 0, 1)]
        return [rot, ref]
    if name == "quaternion":
        n = int(params.get("n", 8))
        if n < 8 or not is_power_of(n, 2):
            raise InputError("quaternion order must be a power of 2, at least 8")
        m = n // 4
        labels = [(a, b) for b in (0, 1) for a in range(2 * m)]

        def qmul(x, y):
            (a1, b1), (a2, b2) = x, y
            if b1 == 0:
                return ((a1 + a2) % (2 * m), b2)
            if b2 == 0:
                return ((a1 - a2) % (2 * m), 1)
            return ((a1 - a2 + m) % (2 * m), 0)

        return _regular_generators(labels, qmul, [(1, 0), (0, 1)])
    if name == "heisenberg":
        q = int(params.get("p", p))
        labels = [(a, b, c) for a in range(q) for b in range(q) for c in range(q)]

        def hmul(x, y):
            return ((x[0] + y[0]) % q, (x[1] + y[1]) % q, (x[2] + y[2] + x[0] * y[1]) % q)

        return _regular_generators(labels, hmul, [(1, 0, 0), (0, 1, 0)])
    if name == "direct_product":
        factors = params["factors"]
        parts, degrees = [], []
        for f in factors:
            perms = _catalog_perms(f["name"], f.get("params", {}), p)
            parts.append(perms)
            degrees.append(max((len(q) for q in perms), default=1))
        return _product_perms(parts, degrees)
    raise UnknownCatalogEntry(f"unknown catalog entry {name!r}")


def _product_perms(parts: list[list[tuple[int, ...]]], degrees: list[int]) -> list[tuple[int, ...]]:
    total = sum(degrees)
    out = []
    offset = 0
    for perms, deg in zip(parts, degrees):
        for q in perms:
            full = list(range(total))
            for i, v in enumerate(q):
                full[offset + i] = offset + v
            out.append(tuple(full))
        offset += deg
    return out


CATALOG = ("cyclic", "elementary_abelian", "dihedral", "quaternion", "heisenberg", "direct_product")


def catalog_group(name: str, params: dict | None, p: int, cap: int = DEFAULT_ORDER_CAP) -> FiniteGroup:
    """Named group from the catalogue, e.g. ``catalog_group("dihedral", {"n": 8}, 2)``."""
    if name not in CATALOG:
        raise UnknownCatalogEntry(f"unknown catalog entry {name!r}")
    params = dict(params or {})
    try:
        perms = _catalog_perms(name, params, p)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad parameters for {name}: {params}") from exc
    if not perms:
        return group_from_table([[0]], p, name=name)
    return build_group(perms, p, cap=cap, name=name)


# short names used by the CLI and default suite
SHORT_NAMES: dict[str, tuple[str, dict, int]] = {
    "C2": ("cyclic", {"n": 2}, 2),
    "C4": ("cyclic", {"n": 4}, 2),
    "C8": ("cyclic", {"n": 8}, 2),
    "V4": ("elementary_abelian", {"rank": 2}, 2),
    "D4": ("dihedral", {"n": 8}, 2),
    "Q8": ("quaternion", {"n": 8}, 2),
    "C3": ("cyclic", {"n": 3}, 3),
    "C9": ("cyclic", {"n": 9}, 3),
    "C3xC3": ("elementary_abelian", {"rank": 2}, 3),
    "Heis27": ("heisenberg", {"p": 3}, 3),
    "C5": ("cyclic", {"n": 5}, 5),
    "C25": ("cyclic", {"n": 25}, 5),
}

DEFAULT_SUITE = tuple(SHORT_NAMES)


def named_group(short: str) -> FiniteGroup:
    if short not in SHORT_NAMES:
        raise UnknownCatalogEntry(f"unknown short name {short!r}")
    name, params, p = SHORT_NAMES[short]
    G = catalog_group(name, params, p)
    return FiniteGroup(G.p, G.table, G.inverse, G.generator_ids, name=short)


# -- conjugacy and subgroups -----------------------------------------------


def _conjugacy_classes(G: FiniteGroup) -> ConjClassSet:
    class_of = [-1] * G.order
    reps, members = [], []
    for g in G.elements:
        if class_of[g] >= 0:
            continue
        orbit = sorted({G.conj(g, x) for x in G.elements})
        for h in orbit:
            class_of[h] = len(reps)
        reps.append(g)
        members.append(tuple(orbit))
    return ConjClassSet(tuple(class_of), tuple(reps), tuple(members))


def conjugacy_classes(G: FiniteGroup) -> ConjClassSet:
    """Conjugation orbits; representative is the smallest id, classes ordered by it."""
    return G.classes


def _all_subgroups(G: FiniteGroup) -> tuple[Subgroup, ...]:
    masks = {G.closure([g]) for g in G.elements}
    frontier = list(masks)
    while frontier:
        new = []
        current = list(masks)
        for a in frontier:
            for b in current:
                if a & b in (a, b):
                    continue
                gens = [g for g in G.elements if (a | b) >> g & 1]
                j = G.closure(gens)
                if j not in masks:
                    masks.add(j)
                    new.append(j)
        frontier = new
    subs = [G.subgroup(m) for m in masks]
    subs.sort(key=lambda H: (H.order, H.members))
    return tuple(subs)


def all_subgroups(G: FiniteGroup) -> tuple[Subgroup, ...]:
    """Every subgroup, sorted by (order, member list)."""
    return G.subgroups


def normalizer(G: FiniteGroup, H: Subgroup) -> Subgroup:
    key = ("normalizer", H.mask)
    if key not in G._memo:
        mem = [g for g in G.elements if all(G.conj(h, g) in H for h in H.generators)]
        G._memo[key] = G.subgroup(mem)
    return G._memo[key]


def coset_reps(G: FiniteGroup | Subgroup, H: Subgroup) -> tuple[int, ...]:
    """Left coset representatives of ``H`` in ``G`` (smallest id per coset ``xH``)."""
    K = G.full if isinstance(G, FiniteGroup) else G
    amb = K.ambient
    key = ("cosets", K.mask, H.mask)
    if key in amb._memo:
        return amb._memo[key]
    if not H <= K:
        raise PreconditionViolated("H is not contained in the ambient subgroup")
    covered = 0
    reps = []
    for x in K.members:
        if covered >> x & 1:
            continue
        reps.append(x)
        row = amb.table[x]
        for h in H.members:
            covered |= 1 << row[h]
    amb._memo[key] = tuple(reps)
    return amb._memo[key]


def weyl_reps(G: FiniteGroup, H: Subgroup) -> tuple[int, ...]:
    """Coset representatives of ``H`` in ``N_G(H)``, one per element of the Weyl group."""
    return coset_reps(normalizer(G, H), H)


def conjugate_subgroup(G: FiniteGroup, H: Subgroup, g: int) -> Subgroup:
    """``g H g^-1``."""
    return G.subgroup(G.conj(h, g) for h in H.members)


def subgroup_orbits(G: FiniteGroup, subs: Iterable[Subgroup]) -> list[Subgroup]:
    """One representative (the first encountered) of each conjugation orbit."""
    seen: set[int] = set()
    reps = []
    for H in subs:
        if H.mask in seen:
            continue
        reps.append(H)
        for g in G.elements:
            seen.add(conjugate_subgroup(G, H, g).mask)
    return reps


def commutator_subgroup(H: FiniteGroup | Subgroup) -> Subgroup:
    if isinstance(H, Subgroup):
        G = H.ambient
        return G.generated(G.commutator(a, b) for a in H.members for b in H.members)
    return H.generated(H.commutator(a, b) for a in H.elements for b in H.elements)


def center(G: FiniteGroup) -> Subgroup:
    return G.subgroup(z for z in G.elements if all(G.table[z][g] == G.table[g][z] for g in G.generator_ids))


def quotient(K: FiniteGroup, N: Subgroup) -> QuotientGroup:
    """Quotient by a normal subgroup; cosets numbered by their smallest member."""
    if N.ambient is not K:
        raise PreconditionViolated("kernel must be a subgroup of the source")
    if any(K.conj(n, g) not in N for n in N.generators for g in K.generator_ids):
        raise PreconditionViolated("kernel is not normal")
    if N.order == 1:
        ident = tuple(K.elements)
        return QuotientGroup(K, N, ident, ident, K)
    projection = [-1] * K.order
    lifts = []
    for g in K.elements:
        if projection[g] >= 0:
            continue
        c = len(lifts)
        lifts.append(g)
        for n in N.members:
            projection[K.table[g][n]] = c
    table = tuple(tuple(projection[K.table[a][b]] for b in lifts) for a in lifts)
    inverse = tuple(projection[K.inverse[a]] for a in lifts)
    gens = tuple(dict.fromkeys(projection[g] for g in K.generator_ids if projection[g] != 0))
    Q = FiniteGroup(K.p, table, inverse, gens, name=f"{K.name}/{N.order}")
    return QuotientGroup(K, N, tuple(projection), tuple(lifts), Q)


def abelianization(H: FiniteGroup | Subgroup) -> QuotientGroup:
    """``H^ab`` as a quotient of ``H`` (of ``H.group`` for a subgroup)."""
    return H.ab if isinstance(H, Subgroup) else H.abelianization


@dataclass(frozen=True, eq=False)
class Subquotient:
    """``H/[H1,H1]`` inside ``H1^ab``.

    ``image`` is a subgroup of ``h1ab.group``; ``pi`` maps ids of ``H^ab`` to
    local ids of ``image.group`` (the natural surjection).
    """

    H: Subgroup
    H1: Subgroup
    h1ab: QuotientGroup
    image: Subgroup
    pi: tuple[int, ...]


def subquotient(H: Subgroup, H1: Subgroup) -> Subquotient:
    G = H.ambient
    key = ("subquotient", H.mask, H1.mask)
    if key in G._memo:
        return G._memo[key]
    if not H <= H1:
        raise PreconditionViolated("H is not contained in H1")
    if not commutator_subgroup(H1) <= H:
        raise PreconditionViolated("[H1,H1] is not contained in H")
    h1ab = H1.ab
    to_h1ab = [h1ab.projection[H1.local_id[g]] for g in H.members]
    image = h1ab.group.subgroup(to_h1ab)
    hab = H.ab
    pi = tuple(image.local_id[to_h1ab[hab.lifts[c]]] for c in range(hab.group.order))
    sq = Subquotient(H, H1, h1ab, image, pi)
    G._memo[key] = sq
    return sq


def power_subgroup(P: Subgroup) -> Subgroup:
    """``P^p`` for cyclic ``P``."""
    if not P.is_cyclic:
        raise NotCyclic("power_subgroup needs a cyclic subgroup")
    G = P.ambient
    return G.generated([G.power(P.canonical_generator, G.p)])


def is_normal(G: FiniteGroup, H: Subgroup) -> bool:
    return normalizer(G, H).order == G.order


def group_fingerprint(G: FiniteGroup) -> str:
    import hashlib

    h = hashlib.sha256(repr(G.table).encode()).hexdigest()
    return h[:16]
