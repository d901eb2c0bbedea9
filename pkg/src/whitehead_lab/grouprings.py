"""Group rings Z_p[G] at finite precision and the Q_p-valued vectors built from them.

A :class:`GroupRingElt` stores integer numerators over a dense monomial basis
with a common denominator ``p**shift``.  ``prec`` is the absolute precision:
the represented value is known modulo ``p**prec``.  Integral elements have
``shift == 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import (
    ActionUndefined,
    BasisMismatch,
    GaloisDescentFailure,
    NotAHomomorphism,
    NotAUnit,
    NotCyclic,
    PrecisionExhausted,
)
from .groups import FiniteGroup, Subgroup
from .padic import CycloElt, howell_form, teichmueller, vp


@dataclass(frozen=True)
class Basis:
    """Monomial basis: ``kind`` is ``"group"`` (multiplicative) or ``"conj"`` (class vectors).

    Quotient groups such as ``H^ab`` are ordinary :class:`FiniteGroup` objects,
    so ``Z_p[H^ab]`` is a ``"group"`` basis over the quotient's table.
    """

    kind: str
    group: FiniteGroup

    @property
    def size(self) -> int:
        if self.kind == "conj":
            return len(self.group.classes)
        return self.group.order

    @property
    def multiplicative(self) -> bool:
        return self.kind == "group"


def group_basis(G: FiniteGroup) -> Basis:
    return Basis("group", G)


def conj_basis(G: FiniteGroup) -> Basis:
    return Basis("conj", G)


@dataclass(frozen=True)
class GroupRingElt:
    basis: Basis
    coeffs: tuple[int, ...]
    p: int
    prec: int
    shift: int = 0

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.basis.size:
            raise BasisMismatch(f"{len(self.coeffs)} coefficients for a basis of size {self.basis.size}")
        rel = self.prec + self.shift
        q = self.p**rel if rel > 0 else 1
        c = [x % q for x in self.coeffs]
        s = self.shift
        while s > 0 and all(x % self.p == 0 for x in c):
            c = [x // self.p for x in c]
            s -= 1
        object.__setattr__(self, "coeffs", tuple(c))
        object.__setattr__(self, "shift", s)

    # -- constructors --------------------------------------------------

    @classmethod
    def zero(cls, basis: Basis, p: int, prec: int) -> "GroupRingElt":
        return cls(basis, (0,) * basis.size, p, prec)

    @classmethod
    def one(cls, basis: Basis, p: int, prec: int) -> "GroupRingElt":
        return cls.monomial(basis, 0, p, prec)

    @classmethod
    def monomial(cls, basis: Basis, index: int, p: int, prec: int, coeff: int = 1) -> "GroupRingElt":
        c = [0] * basis.size
        c[index] = coeff
        return cls(basis, tuple(c), p, prec)

    @classmethod
    def from_dict(cls, basis: Basis, terms: dict[int, int], p: int, prec: int) -> "GroupRingElt":
        c = [0] * basis.size
        for k, v in terms.items():
            c[k] += v
        return cls(basis, tuple(c), p, prec)

    # -- inspection ----------------------------------------------------

    @property
    def group(self) -> FiniteGroup:
        return self.basis.group

    def valuation(self) -> int:
        """Minimum coefficient valuation (``prec`` if zero to the known precision)."""
        nz = [vp(x, self.p) for x in self.coeffs if x]
        if not nz:
            return self.prec
        return min(min(nz) - self.shift, self.prec)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_integral(self) -> bool:
        return self.shift == 0

    def integral_coeffs(self, n: int) -> tuple[int, ...]:
        """Coefficients modulo ``p**n``; raises if not integral or not known that far."""
        if n > self.prec:
            raise PrecisionExhausted(f"need precision {n}, have {self.prec}")
        if self.shift:
            pe = self.p**self.shift
            q = self.p**n
            if any((x % (q * pe)) % pe for x in self.coeffs):
                from .errors import NonIntegralResult

                raise NonIntegralResult(f"valuation {self.valuation()} < 0")
            return tuple((x % (q * pe)) // pe for x in self.coeffs)
        q = self.p**n
        return tuple(x % q for x in self.coeffs)

    def truncate(self, n: int) -> "GroupRingElt":
        """Integral element reduced to precision ``n``."""
        return GroupRingElt(self.basis, self.integral_coeffs(n), self.p, n)

    def residual(self, other: "GroupRingElt") -> int:
        """Valuation of ``self - other`` (capped by the available precision)."""
        return (self - other).valuation()

    def residual_checked(self, other: "GroupRingElt", n: int) -> int:
        """Like :meth:`residual`, but raises if agreement to ``p^n`` cannot be certified."""
        d = self - other
        v = d.valuation()
        if v >= d.prec and d.prec < n:
            raise PrecisionExhausted(f"need precision {n}, have {d.prec}")
        return v

    def agrees(self, other: "GroupRingElt", n: int) -> bool:
        d = self - other
        if d.prec < n:
            raise PrecisionExhausted(f"need precision {n}, have {d.prec}")
        return d.valuation() >= n

    def augmentation(self) -> int:
        return augmentation(self)

    # -- arithmetic ----------------------------------------------------

    def _check(self, other: "GroupRingElt") -> None:
        if self.basis != other.basis or self.p != other.p:
            raise BasisMismatch("operands live on different bases")

    def __add__(self, other: "GroupRingElt") -> "GroupRingElt":
        self._check(other)
        s = max(self.shift, other.shift)
        a = self.p ** (s - self.shift)
        b = self.p ** (s - other.shift)
        c = tuple(x * a + y * b for x, y in zip(self.coeffs, other.coeffs))
        return GroupRingElt(self.basis, c, self.p, min(self.prec, other.prec), s)

    def __neg__(self) -> "GroupRingElt":
        return GroupRingElt(self.basis, tuple(-x for x in self.coeffs), self.p, self.prec, self.shift)

    def __sub__(self, other: "GroupRingElt") -> "GroupRingElt":
        return self + (-other)

    def __mul__(self, other: "GroupRingElt | int") -> "GroupRingElt":
        if isinstance(other, int):
            return scalar_mul(self, other)
        return gr_mul(self, other)

    def __rmul__(self, other: int) -> "GroupRingElt":
        return scalar_mul(self, other)

    def __pow__(self, n: int) -> "GroupRingElt":
        return gr_pow(self, n)

    def divide(self, n: int) -> "GroupRingElt":
        """Division by a nonzero integer (p-part moves into the denominator)."""
        v = vp(n, self.p)
        unit = n // self.p**v
        rel = self.prec + self.shift
        inv = pow(unit, -1, self.p**rel) if rel > 0 else 0
        return GroupRingElt(self.basis, tuple(x * inv for x in self.coeffs), self.p, self.prec - v, self.shift + v)

    def with_prec(self, prec: int) -> "GroupRingElt":
        return GroupRingElt(self.basis, self.coeffs, self.p, min(prec, self.prec), self.shift)


def gr_add(x: GroupRingElt, y: GroupRingElt) -> GroupRingElt:
    return x + y


def scalar_mul(x: GroupRingElt, c: int) -> GroupRingElt:
    if c == 0:
        return GroupRingElt.zero(x.basis, x.p, x.prec)
    v = vp(c, x.p)
    return GroupRingElt(x.basis, tuple(a * c for a in x.coeffs), x.p, x.prec + v, x.shift)


def _convolve(table, a: Sequence[int], b: Sequence[int], q: int) -> list[int]:
    n = len(a)
    c = [0] * n
    nzb = [(j, y) for j, y in enumerate(b) if y]
    for i, x in enumerate(a):
        if x:
            row = table[i]
            for j, y in nzb:
                c[row[j]] += x * y
    return [v % q for v in c]


def gr_mul(x: GroupRingElt, y: GroupRingElt) -> GroupRingElt:
    """Convolution product over the Cayley table."""
    x._check(y)
    if not x.basis.multiplicative:
        raise BasisMismatch("class vectors have no ring multiplication")
    prec = min(x.prec + y.valuation(), y.prec + x.valuation())
    shift = x.shift + y.shift
    rel = prec + shift
    q = x.p**rel if rel > 0 else 1
    c = _convolve(x.group.table, x.coeffs, y.coeffs, q)
    return GroupRingElt(x.basis, tuple(c), x.p, prec, shift)


def gr_pow(x: GroupRingElt, n: int) -> GroupRingElt:
    if n < 0:
        return gr_pow(invert_unit(x), -n)
    result = GroupRingElt.one(x.basis, x.p, x.prec)
    base = x
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def augmentation(x: GroupRingElt) -> int:
    """Sum of coefficients (numerator; divide by ``p**x.shift`` for Q_p elements)."""
    if not x.basis.multiplicative:
        raise BasisMismatch("augmentation needs a multiplicative basis")
    rel = x.prec + x.shift
    return sum(x.coeffs) % (x.p**rel if rel > 0 else 1)


# -- maps between bases --------------------------------------------------------


def pushforward(f: Sequence[int], x: GroupRingElt, target: Basis, check: bool = True) -> GroupRingElt:
    """Linear extension of the monomial map ``f`` (source id -> target id)."""
    if check and x.basis.multiplicative and target.multiplicative:
        S, T = x.group, target.group
        for s in S.generator_ids:
            fs = f[s]
            for t in S.elements:
                if f[S.table[t][s]] != T.table[f[t]][fs]:
                    raise NotAHomomorphism(f"map fails on generator {s}")
    c = [0] * target.size
    for i, a in enumerate(x.coeffs):
        if a:
            c[f[i]] += a
    return GroupRingElt(target, tuple(c), x.p, x.prec, x.shift)


def conj_project(x: GroupRingElt) -> GroupRingElt:
    """Z_p[G] -> Z_p[Conj(G)]: sum coefficients over conjugacy classes."""
    if x.basis.kind != "group":
        raise BasisMismatch("conj_project needs a group basis")
    return pushforward(x.group.classes.class_of, x, conj_basis(x.group), check=False)


def conj_action(H: Subgroup, g: int, x: GroupRingElt) -> GroupRingElt:
    """Monomials ``h -> g h g^-1`` on ``Z_p[H]`` or ``Z_p[H^ab]`` (``g`` must normalise ``H``)."""
    G = H.ambient
    if any(G.conj(h, g) not in H for h in H.generators):
        raise ActionUndefined(f"{g} does not normalise the subgroup")
    return transport(H, H, g, x)


def transport(H: Subgroup, K: Subgroup, g: int, x: GroupRingElt) -> GroupRingElt:
    """Conjugation by ``g`` carrying ``Z_p[H]`` (or ``Z_p[H^ab]``) to ``Z_p[K]`` with ``K = gHg^-1``."""
    G = H.ambient
    if x.basis.group is H.group:
        f = [K.local_id[G.conj(h, g)] for h in H.members]
        target = group_basis(K.group)
    elif x.basis.group is H.ab.group:
        hab, kab = H.ab, K.ab
        f = [kab.projection[K.local_id[G.conj(H.members[hab.lifts[c]], g)]] for c in range(hab.group.order)]
        target = group_basis(kab.group)
    else:
        raise BasisMismatch("element does not live on the subgroup's ring")
    return pushforward(f, x, target, check=False)


def inclusion(K: Subgroup, H: Subgroup) -> tuple[int, ...]:
    """Local ids of ``H`` -> local ids of ``K`` for ``H <= K``."""
    return tuple(K.local_id[h] for h in H.members)


def to_ab(H: Subgroup, x: GroupRingElt) -> GroupRingElt:
    """``Z_p[H] -> Z_p[H^ab]``."""
    if x.basis.group is H.ab.group:
        return x
    return pushforward(H.ab.projection, x, group_basis(H.ab.group), check=False)


# -- units ---------------------------------------------------------------------------


def is_unit(x: GroupRingElt) -> bool:
    """Local-ring criterion: a unit iff the augmentation is prime to p."""
    return x.shift == 0 and augmentation(x) % x.p != 0


def radical_index(G: FiniteGroup, p: int | None = None) -> int:
    """Smallest ``e`` with ``I^e = 0`` for the augmentation ideal ``I`` of ``F_p[G]``."""
    p = p or G.p
    key = ("radical_index", p)
    if key in G._memo:
        return G._memo[key]
    n = G.order
    rows = []
    for g in range(1, n):
        r = [0] * n
        r[g] += 1
        r[0] -= 1
        rows.append(r)
    B = howell_form(rows, p, 1, n)
    e = 1
    while B.rows:
        prods = [_convolve(G.table, d, r, p) for d in rows for r in B.rows]
        B = howell_form(prods, p, 1, n)
        e += 1
    G._memo[key] = e
    return e


def _invert_raw(table, a: list[int], p: int, prec: int, e: int) -> list[int]:
    n = len(a)
    c0 = sum(a) % p
    if c0 == 0:
        raise NotAUnit("augmentation divisible by p")
    cinv = pow(c0, -1, p)
    # mod p: a = c0 (1 - m) with m nilpotent of index <= e
    m = [(-cinv * x) % p for x in a]
    m[0] = (m[0] + 1) % p
    y = [0] * n
    y[0] = 1
    term = y[:]
    for _ in range(e):
        term = _convolve(table, term, m, p)
        if not any(term):
            break
        y = [(u + v) % p for u, v in zip(y, term)]
    y = [u * cinv % p for u in y]
    k = 1
    while k < prec:
        k = min(2 * k, prec)
        q = p**k
        ay = _convolve(table, a, y, q)
        t = [(-v) % q for v in ay]
        t[0] = (t[0] + 2) % q
        y = _convolve(table, y, t, q)
    return y


def invert_unit(x: GroupRingElt) -> GroupRingElt:
    """Inverse by a nilpotent geometric series mod p, then Newton steps ``y <- y(2 - xy)``."""
    if not x.basis.multiplicative:
        raise BasisMismatch("inversion needs a multiplicative basis")
    if not is_unit(x):
        raise NotAUnit("augmentation is not a unit")
    G = x.group
    y = _invert_raw(G.table, list(x.coeffs), x.p, x.prec, radical_index(G, x.p))
    return GroupRingElt(x.basis, tuple(y), x.p, x.prec)


def teichmueller_scalar(x: GroupRingElt, prec: int | None = None) -> int:
    """Teichmueller lift of ``aug(x) mod p``."""
    prec = prec or x.prec
    return teichmueller(augmentation(x) % x.p, x.p, prec).residue


def log_unit(u: GroupRingElt, max_terms: int = 100_000) -> GroupRingElt:
    """p-adic logarithm of a unit of ``Z_p[G]``, on the same basis with Q_p coefficients.

    The Teichmueller lift ``c`` of ``aug(u) mod p`` is factored out (``log c = 0``);
    ``y = u/c`` is raised to ``p^m`` with ``p^m >= e`` (the radical index), which
    lands in ``1 + p Z_p[G]``.  The series for ``log(y^(p^m))`` is summed
    modulo ``p^(prec+m)`` and divided by ``p^m``.
    """
    if not is_unit(u):
        raise NotAUnit("log of a non-unit")
    p, prec = u.p, u.prec
    G = u.group
    e = radical_index(G, p)
    m = 0
    while p**m < e:
        m += 1
    M = prec + m
    q = p**M
    c = teichmueller(augmentation(u) % p, p, M).residue
    cinv = pow(c, -1, q)
    y = [x * cinv % q for x in u.coeffs]
    for _ in range(m):
        # y <- y^p
        acc = y
        for _ in range(p - 1):
            acc = _convolve(G.table, acc, y, q)
        y = acc
    z = y[:]
    z[0] = (z[0] - 1) % q
    if any(x % p for x in z):
        raise PrecisionExhausted("p^m-th power of a principal unit is not 1 mod p")
    w = [x // p for x in z]
    total = [0] * G.order
    power = [0] * G.order
    power[0] = 1
    k = 0
    while True:
        k += 1
        if k > max_terms:
            raise PrecisionExhausted("log series did not converge within the iteration cap")
        digits = 0
        kk = k
        while kk >= p:
            kk //= p
            digits += 1
        if k - digits >= M:
            break
        power = _convolve(G.table, power, w, q)
        v = vp(k, p)
        if k - v >= M:
            continue
        coef = p ** (k - v) * pow(k // p**v, -1, q)
        if k % 2 == 0:
            coef = -coef
        total = [(t + coef * x) % q for t, x in zip(total, power)]
    return GroupRingElt(u.basis, tuple(total), p, prec, m)


# -- determinants over commutative group rings ------------------------------------------


def _is_unit_raw(a: Sequence[int], p: int) -> bool:
    return sum(a) % p != 0


def berkowitz_det(matrix: Sequence[Sequence[GroupRingElt]]) -> GroupRingElt:
    """Division-free determinant (Berkowitz) over a commutative ring."""
    n = len(matrix)
    x0 = matrix[0][0]
    B, p, prec = x0.basis, x0.p, min(e.prec for row in matrix for e in row)
    q = p**prec
    table = B.group.table
    A = [[list(e.integral_coeffs(prec)) for e in row] for row in matrix]
    size = B.size
    one = [1] + [0] * (size - 1)
    zero = [0] * size

    def mul(a, b):
        return _convolve(table, a, b, q)

    def add(a, b):
        return [(u + v) % q for u, v in zip(a, b)]

    def neg(a):
        return [(-u) % q for u in a]

    v = [one]
    for k in range(n):
        R = A[k][:k]
        C = [A[i][k] for i in range(k)]
        t = [one, neg(A[k][k])]
        vec = C
        for _ in range(k):
            s = zero
            for r, c in zip(R, vec):
                s = add(s, mul(r, c))
            t.append(neg(s))
            vec = [
                _sum_rows([mul(A[i][j], vec[j]) for j in range(k)], size, q) for i in range(k)
            ]
        new = []
        for i in range(k + 2):
            s = zero
            for j in range(min(i, k) + 1):
                if i - j < len(t):
                    s = add(s, mul(t[i - j], v[j]))
            new.append(s)
        v = new
    det = v[n]
    if n % 2:
        det = neg(det)
    return GroupRingElt(B, tuple(det), p, prec)


def _sum_rows(rows: list[list[int]], size: int, q: int) -> list[int]:
    out = [0] * size
    for r in rows:
        for i, x in enumerate(r):
            out[i] += x
    return [x % q for x in out]


def det_local(matrix: Sequence[Sequence[GroupRingElt]]) -> GroupRingElt:
    """Determinant over a commutative local group ring ``Z_p[A]``.

    Gaussian elimination with a unit pivot in each column; falls back to
    Berkowitz when no unit pivot exists (the matrix is then not invertible).
    """
    n = len(matrix)
    if n == 0:
        raise ValueError("empty matrix")
    x0 = matrix[0][0]
    B, p = x0.basis, x0.p
    prec = min(e.prec for row in matrix for e in row)
    q = p**prec
    G = B.group
    table = G.table
    e = radical_index(G, p)
    A = [[list(el.integral_coeffs(prec)) for el in row] for row in matrix]
    det = [1] + [0] * (B.size - 1)
    sign = 1
    for k in range(n):
        piv = next((i for i in range(k, n) if _is_unit_raw(A[i][k], p)), None)
        if piv is None:
            return berkowitz_det(matrix)
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        inv = _invert_raw(table, A[k][k], p, prec, e)
        rowk = A[k]
        for i in range(k + 1, n):
            if any(A[i][k]):
                f = _convolve(table, A[i][k], inv, q)
                row = A[i]
                for j in range(k + 1, n):
                    if any(rowk[j]):
                        prod = _convolve(table, f, rowk[j], q)
                        row[j] = [(a - b) % q for a, b in zip(row[j], prod)]
        det = _convolve(table, det, rowk[k], q)
    if sign < 0:
        det = [(-x) % q for x in det]
    return GroupRingElt(B, tuple(det), p, prec)


# -- character twists and the cyclotomic extension ----------------------------------------


def cyclic_log(P: FiniteGroup) -> tuple[int, ...]:
    """``i`` with ``g^i = h`` for each ``h``, ``g`` the smallest generating id."""
    key = "cyclic_log"
    if key in P._memo:
        return P._memo[key]
    orders = P.element_orders
    gen = next((g for g in P.elements if orders[g] == P.order), None)
    if gen is None:
        raise NotCyclic("group is not cyclic")
    logs = [0] * P.order
    x = 0
    for i in range(P.order):
        logs[x] = i
        x = P.table[x][gen]
    P._memo[key] = tuple(logs)
    return P._memo[key]


@dataclass(frozen=True)
class TwistedElt:
    """Element of ``Z_p[zeta_p][P]``: one :class:`CycloElt` per monomial."""

    basis: Basis
    coeffs: tuple[CycloElt, ...]
    p: int
    prec: int

    def __mul__(self, other: "TwistedElt") -> "TwistedElt":
        if self.basis != other.basis:
            raise BasisMismatch("twisted elements on different bases")
        table = self.basis.group.table
        p, prec = self.p, self.prec
        zero = CycloElt.scalar(0, p, prec)
        acc = [[0] * p for _ in range(self.basis.size)]
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            ac = a._as_cyclic()
            row = table[i]
            for j, b in enumerate(other.coeffs):
                if b.is_zero():
                    continue
                bc = b._as_cyclic()
                tgt = acc[row[j]]
                for s, x in enumerate(ac):
                    if x:
                        for t, y in enumerate(bc):
                            if y:
                                tgt[(s + t) % p] += x * y
        out = tuple(CycloElt.from_cyclic(c, p, prec) if any(c) else zero for c in acc)
        return TwistedElt(self.basis, out, p, prec)

    def descend(self) -> GroupRingElt:
        """Back to ``Z_p[P]``; raises if some coefficient is not in the base ring."""
        if not all(c.in_base() for c in self.coeffs):
            raise GaloisDescentFailure("twisted product has non-rational coefficients")
        return GroupRingElt(self.basis, tuple(c.base_value() for c in self.coeffs), self.p, self.prec)


def char_twist(x: GroupRingElt, k: int) -> TwistedElt:
    """``sum c_h h -> sum c_h zeta^(k a(h)) h`` with ``a`` sending the canonical generator to 1."""
    if x.shift:
        raise BasisMismatch("twist expects integral coefficients")
    logs = cyclic_log(x.group)
    p, prec = x.p, x.prec
    coeffs = []
    for h, c in enumerate(x.coeffs):
        z = [0] * p
        z[(k * logs[h]) % p] = c
        coeffs.append(CycloElt.from_cyclic(z, p, prec))
    return TwistedElt(x.basis, tuple(coeffs), p, prec)


def twist_norm(x: GroupRingElt) -> GroupRingElt:
    """``prod_{k=0}^{p-1} twist_k(x)``, descended to ``Z_p[P]``."""
    acc = char_twist(x, 0)
    for k in range(1, x.p):
        acc = acc * char_twist(x, k)
    return acc.descend()


def restriction_matrix(x: GroupRingElt, B: Subgroup) -> list[list[GroupRingElt]]:
    """Matrix of left multiplication by ``x`` on ``Z_p[K]`` as a free right ``Z_p[B]``-module.

    The basis is the left coset representatives ``x_j`` of ``B`` in ``K``;
    entry ``(i, j)`` collects ``b`` with ``g x_j = x_i b``.
    """
    if x.shift:
        raise BasisMismatch("restriction matrix needs integral coefficients")
    K = x.group
    if B.ambient is not K:
        raise BasisMismatch("subgroup of a different group")
    from .groups import coset_reps

    reps = coset_reps(K, B)
    coset_of = {}
    for i, r in enumerate(reps):
        for b in B.members:
            coset_of[K.table[r][b]] = i
    n = len(reps)
    size = B.order
    raw = [[[0] * size for _ in range(n)] for _ in range(n)]
    for j, xj in enumerate(reps):
        for g, c in enumerate(x.coeffs):
            if c:
                gx = K.table[g][xj]
                i = coset_of[gx]
                b = K.table[K.inverse[reps[i]]][gx]
                raw[i][j][B.local_id[b]] += c
    basis = group_basis(B.group)
    return [[GroupRingElt(basis, tuple(e), x.p, x.prec) for e in row] for row in raw]
