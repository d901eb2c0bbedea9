"""Arithmetic in Z/p^N, Q_p approximations, Z_p[zeta_p], and Howell-form linear algebra."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DimensionMismatch, InputError, PrecisionExhausted, ZeroResidue


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_capped(n: int, p: int, cap: int) -> int:
    """Valuation of ``n`` viewed mod ``p**cap`` (returns ``cap`` for zero)."""
    n %= p**cap
    if n == 0:
        return cap
    return vp(n, p)


@dataclass(frozen=True)
class PrecisionContext:
    """Prime, working precision, comparison precision and RNG seed.

    ``n_work`` defaults to ``n_check + 2*ceil(log_p |G|) + 4`` via :meth:`for_order`.
    """

    p: int
    n_work: int
    n_check: int = 16
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.n_work > self.n_check >= 1:
            raise InputError(f"need n_work > n_check >= 1, got {self.n_work}, {self.n_check}")

    @classmethod
    def for_order(
        cls, p: int, order: int, n_check: int = 16, n_work: int | None = None, seed: int = 0, extra: int = 0
    ) -> "PrecisionContext":
        if n_work is None:
            n_work = n_check + 2 * math.ceil(math.log(order, p) - 1e-9) + 4
        return cls(p, n_work + extra, n_check, seed)

    @property
    def modulus(self) -> int:
        return self.p**self.n_work

    def raised(self, extra: int) -> "PrecisionContext":
        return PrecisionContext(self.p, self.n_work + extra, self.n_check, self.seed)


@dataclass(frozen=True)
class ZpApprox:
    """An element of Z_p known modulo ``p**prec``."""

    residue: int
    p: int
    prec: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "residue", self.residue % self.p**self.prec)

    def __add__(self, other: "ZpApprox") -> "ZpApprox":
        return ZpApprox(self.residue + other.residue, self.p, min(self.prec, other.prec))

    def __mul__(self, other: "ZpApprox") -> "ZpApprox":
        return ZpApprox(self.residue * other.residue, self.p, min(self.prec, other.prec))

    def __pow__(self, n: int) -> "ZpApprox":
        return ZpApprox(pow(self.residue, n, self.p**self.prec), self.p, self.prec)

    def valuation(self) -> int:
        return vp_capped(self.residue, self.p, self.prec)

    def __str__(self) -> str:
        return str(self.residue)


@dataclass(frozen=True)
class QpApprox:
    """``p**valuation * unit`` with the unit known modulo ``p**prec``.

    Exact zero (to the available precision) is flagged with ``is_zero``.
    """

    valuation: int
    unit: int
    p: int
    prec: int
    is_zero: bool = False

    @classmethod
    def from_fraction(cls, num: int, shift: int, p: int, abs_prec: int) -> "QpApprox":
        """Value ``num / p**shift`` known modulo ``p**abs_prec``."""
        rel = abs_prec + shift
        num %= p**rel if rel > 0 else 1
        if rel <= 0 or num == 0:
            return cls(abs_prec, 0, p, 0, True)
        v = vp(num, p)
        return cls(v - shift, num // p**v, p, abs_prec - (v - shift))

    def __add__(self, other: "QpApprox") -> "QpApprox":
        if self.is_zero:
            return other if other.valuation <= self.valuation else self
        if other.is_zero:
            return self if self.valuation <= other.valuation else other
        shift = -min(self.valuation, other.valuation)
        abs_prec = min(self.valuation + self.prec, other.valuation + other.prec)
        num = self.unit * self.p ** (self.valuation + shift) + other.unit * other.p ** (other.valuation + shift)
        return QpApprox.from_fraction(num, shift, self.p, abs_prec)

    def __mul__(self, other: "QpApprox") -> "QpApprox":
        v = self.valuation + other.valuation
        if self.is_zero or other.is_zero:
            return QpApprox(v, 0, self.p, 0, True)
        prec = min(self.prec, other.prec)
        return QpApprox(v, self.unit * other.unit % self.p**prec, self.p, prec)

    def is_integral(self) -> bool:
        return self.is_zero or self.valuation >= 0


def teichmueller(a: int, p: int, prec: int) -> ZpApprox:
    """The (p-1)-th root of unity congruent to ``a`` mod p, modulo ``p**prec``."""
    if a % p == 0:
        raise ZeroResidue(f"{a} is divisible by {p}")
    q = p**prec
    x = a % q
    for _ in range(prec + 1):
        y = pow(x, p, q)
        if y == x:
            return ZpApprox(x, p, prec)
        x = y
    raise PrecisionExhausted("Teichmueller iteration did not stabilise")


@dataclass(frozen=True)
class CycloElt:
    """``sum c_i zeta^i`` in Z/p^N[zeta] with zeta a primitive p-th root of unity.

    Stored reduced modulo ``1 + zeta + ... + zeta^(p-1)`` (coefficients of
    ``1, zeta, ..., zeta^(p-2)``).
    """

    coeffs: tuple[int, ...]
    p: int
    prec: int

    @classmethod
    def from_cyclic(cls, c: Sequence[int], p: int, prec: int) -> "CycloElt":
        """Reduce a length-p vector (an element of Z[t]/(t^p - 1)) modulo the cyclotomic polynomial."""
        q = p**prec
        top = c[p - 1] if len(c) == p else 0
        return cls(tuple((c[i] - top) % q for i in range(p - 1)), p, prec)

    @classmethod
    def scalar(cls, a: int, p: int, prec: int) -> "CycloElt":
        return cls.from_cyclic([a] + [0] * (p - 1), p, prec)

    @classmethod
    def zeta_power(cls, k: int, p: int, prec: int) -> "CycloElt":
        c = [0] * p
        c[k % p] = 1
        return cls.from_cyclic(c, p, prec)

    def _as_cyclic(self) -> list[int]:
        return list(self.coeffs) + [0] * (self.p - len(self.coeffs))

    def __add__(self, other: "CycloElt") -> "CycloElt":
        q = self.p**self.prec
        return CycloElt(tuple((a + b) % q for a, b in zip(self.coeffs, other.coeffs)), self.p, self.prec)

    def __neg__(self) -> "CycloElt":
        q = self.p**self.prec
        return CycloElt(tuple(-a % q for a in self.coeffs), self.p, self.prec)

    def __sub__(self, other: "CycloElt") -> "CycloElt":
        return self + (-other)

    def __mul__(self, other: "CycloElt") -> "CycloElt":
        p = self.p
        a, b = self._as_cyclic(), other._as_cyclic()
        c = [0] * p
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        c[(i + j) % p] += x * y
        return CycloElt.from_cyclic(c, p, self.prec)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def in_base(self) -> bool:
        return not any(self.coeffs[1:])

    def base_value(self) -> int:
        return self.coeffs[0]


# -- Howell normal form over Z/p^N ---------------------------------------------


@dataclass(frozen=True)
class HowellBasis:
    """Row basis over Z/p^N in Howell normal form.

    Pivots are powers of p, entries above each pivot are reduced into
    ``[0, pivot)``, and the row set has the Howell property, so membership is
    decided by a single reduction pass.
    """

    rows: tuple[tuple[int, ...], ...]
    pivots: tuple[tuple[int, int], ...]  # (column, valuation) per row
    p: int
    prec: int
    ncols: int

    @property
    def modulus(self) -> int:
        return self.p**self.prec

    def reduce(self, v: Sequence[int]) -> list[int]:
        q = self.modulus
        r = [x % q for x in v]
        for row, (c, e) in zip(self.rows, self.pivots):
            x = r[c]
            if x:
                pe = self.p**e
                f = x // pe
                if f:
                    r = [(a - f * b) % q for a, b in zip(r, row)]
        return r

    def __contains__(self, v: Sequence[int]) -> bool:
        return submodule_contains(self, v)

    def __len__(self) -> int:
        return len(self.rows)

    def length(self) -> int:
        """Composition length of the module (sum over pivots of prec - valuation)."""
        return sum(self.prec - e for _, e in self.pivots)

    def reduced(self, prec: int) -> "HowellBasis":
        return howell_form(self.rows, self.p, prec, self.ncols)


def howell_form(rows: Sequence[Sequence[int]], p: int, prec: int, ncols: int | None = None) -> HowellBasis:
    """Howell normal form of the row span of ``rows`` over Z/p^prec."""
    q = p**prec
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    pending = []
    for r in rows:
        if len(r) != ncols:
            raise DimensionMismatch(f"row of length {len(r)} in a {ncols}-column system")
        r = [x % q for x in r]
        if any(r):
            pending.append(r)
    out_rows: list[list[int]] = []
    pivots: list[tuple[int, int]] = []
    for c in range(ncols):
        best, best_v = -1, prec
        for i, r in enumerate(pending):
            if r[c]:
                v = vp(r[c], p)
                if v < best_v:
                    best, best_v = i, v
                    if v == 0:
                        break
        if best < 0:
            continue
        piv = pending.pop(best)
        pe = p**best_v
        inv = pow(piv[c] // pe, -1, q)
        piv = [x * inv % q for x in piv]
        nxt = []
        for r in pending:
            if r[c]:
                f = r[c] // pe
                r = [(a - f * b) % q for a, b in zip(r, piv)]
            if any(r):
                nxt.append(r)
        if best_v:
            ann = [x * p ** (prec - best_v) % q for x in piv]
            if any(ann):
                nxt.append(ann)
        pending = nxt
        out_rows.append(piv)
        pivots.append((c, best_v))
    for k, (c, e) in enumerate(pivots):
        pe = p**e
        row = out_rows[k]
        for j in range(k):
            other = out_rows[j]
            f = other[c] // pe
            if f:
                out_rows[j] = [(a - f * b) % q for a, b in zip(other, row)]
    return HowellBasis(tuple(tuple(r) for r in out_rows), tuple(pivots), p, prec, ncols)


def submodule_contains(B: HowellBasis, v: Sequence[int]) -> bool:
    if len(v) != B.ncols:
        raise DimensionMismatch(f"vector of length {len(v)} against {B.ncols} columns")
    return not any(B.reduce(v))


def submodule_equal(B1: HowellBasis, B2: HowellBasis) -> bool:
    if B1.ncols != B2.ncols or B1.p != B2.p or B1.prec != B2.prec:
        raise DimensionMismatch("bases live in different ambient modules")
    return B1.rows == B2.rows


def smith_valuations(rows: Sequence[Sequence[int]], p: int, prec: int) -> list[int]:
    """Valuations of the nonzero elementary divisors of an integer matrix, computed mod p^prec.

    Divisors with valuation >= prec are reported as zero (omitted).
    """
    q = p**prec
    A = [[x % q for x in r] for r in rows]
    A = [r for r in A if any(r)]
    out = []
    while A and A[0]:
        best = None
        for i, r in enumerate(A):
            for j, x in enumerate(r):
                if x:
                    v = vp(x, p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best and best[0] == 0:
                break
        if best is None:
            break
        v, i, j = best
        out.append(v)
        piv = A[i]
        pe = p**v
        inv = pow(piv[j] // pe, -1, q)
        piv = [x * inv % q for x in piv]
        rest = []
        for k, r in enumerate(A):
            if k == i:
                continue
            if r[j]:
                f = r[j] // pe
                r = [(a - f * b) % q for a, b in zip(r, piv)]
            # column operation is implicit: the pivot row is dropped, and every
            # other entry of the pivot row is a multiple of the pivot
            del r[j]
            if any(r):
                rest.append(r)
        A = rest
    return out


def kernel_basis(matrix: Sequence[Sequence[int]], ncols: int, p: int, prec: int, headroom: int = 48) -> HowellBasis:
    """Howell basis of ``ker(A) ⊗ Z/p^prec`` for an integer matrix ``A`` (rows = equations).

    A plain kernel mod p^prec over-counts (it contains lifts of torsion
    solutions), so the system is solved mod ``p^(prec+k)`` with ``k`` above the
    largest elementary-divisor valuation and the result reduced.
    """
    rows = [list(r) for r in matrix if any(r)]
    if not rows:
        return howell_form([[int(i == j) for j in range(ncols)] for i in range(ncols)], p, prec, ncols)
    vals = smith_valuations(rows, p, prec + headroom)
    k = max(vals, default=0) + 1
    if k >= headroom:
        raise PrecisionExhausted("elementary divisors exceed the kernel headroom")
    big = prec + k
    m = len(rows)
    aug = []
    for j in range(ncols):
        aug.append([rows[i][j] for i in range(m)] + [int(j == t) for t in range(ncols)])
    H = howell_form(aug, p, big, m + ncols)
    kern = [r[m:] for r in H.rows if not any(r[:m])]
    return howell_form(kern, p, prec, ncols)
