import cmath
import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from whitehead_lab.errors import DimensionMismatch, InputError, ZeroResidue
from whitehead_lab.padic import (
    CycloElt,
    PrecisionContext,
    QpApprox,
    howell_form,
    kernel_basis,
    smith_valuations,
    submodule_contains,
    submodule_equal,
    teichmueller,
    vp,
    vp_capped,
)


def test_valuations():
    assert vp(48, 2) == 4 and vp(-27, 3) == 3 and vp(7, 5) == 0
    assert vp_capped(0, 3, 10) == 10 and vp_capped(81, 3, 2) == 2


def test_precision_context_defaults():
    ctx = PrecisionContext.for_order(2, 8)
    assert (ctx.n_check, ctx.n_work) == (16, 16 + 6 + 4)
    assert PrecisionContext.for_order(3, 27).n_work == 26
    assert PrecisionContext.for_order(2, 1).n_work == 20
    assert ctx.raised(10).n_work == ctx.n_work + 10
    with pytest.raises(InputError):
        PrecisionContext(2, 16, 16)


def test_qp_from_fraction():
    x = QpApprox.from_fraction(3, 1, 3, 10)
    assert x.is_integral()
    y = QpApprox.from_fraction(1, 2, 3, 10)
    assert not y.is_integral()
    assert (y * QpApprox.from_fraction(9, 0, 3, 10)).is_integral()


def test_teichmueller_examples():
    assert teichmueller(2, 3, 8).residue == 3**8 - 1
    assert teichmueller(1, 7, 5).residue == 1
    q = 5**6
    # independent oracle: lim a^(p^n)
    oracle = pow(2, 5**20, q)
    w = teichmueller(2, 5, 6)
    assert w.residue == oracle
    assert pow(w.residue, 4, q) == 1 and (w.residue - 2) % 5 == 0
    with pytest.raises(ZeroResidue):
        teichmueller(10, 5, 4)


# -- Howell form --------------------------------------------------------------


def brute_span(rows, q, ncols):
    span = {tuple([0] * ncols)}
    for r in rows:
        span = {tuple((s[i] + c * r[i]) % q for i in range(ncols)) for s in span for c in range(q)}
    return span


small_rows = st.lists(st.lists(st.integers(0, 7), min_size=2, max_size=2), min_size=0, max_size=3)


@settings(max_examples=60, deadline=None)
@given(small_rows)
def test_howell_matches_brute_span(rows):
    B = howell_form(rows, 2, 3, 2)
    span = brute_span(rows, 8, 2)
    for v in itertools.product(range(8), repeat=2):
        assert (tuple(v) in span) == submodule_contains(B, list(v))
    assert 2 ** B.length() == len(span)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-50, 50), min_size=3, max_size=3), min_size=1, max_size=4), st.randoms())
def test_howell_canonical(rows, rnd):
    B = howell_form(rows, 3, 3, 3)
    assert howell_form(list(B.rows), 3, 3, 3) == B
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    combo = [[a + 2 * b for a, b in zip(shuffled[0], shuffled[-1])]] + shuffled
    assert submodule_equal(howell_form(combo, 3, 3, 3), B)


def test_howell_rejection_and_mismatch():
    B = howell_form([[2, 0], [0, 4]], 2, 3)
    assert [2, 4] in B and [1, 0] not in B and [0, 2] not in B
    with pytest.raises(DimensionMismatch):
        howell_form([[1, 2], [3]], 2, 3)
    with pytest.raises(DimensionMismatch):
        submodule_contains(B, [1, 2, 3])


def fraction_rank(rows):
    m = [[Fraction(x) for x in r] for r in rows]
    rank, ncols = 0, len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c]:
                f = m[i][c] / m[rank][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-9, 9), min_size=4, max_size=4), min_size=1, max_size=3))
def test_kernel_basis(rows):
    p, prec = 2, 6
    K = kernel_basis(rows, 4, p, prec)
    for v in K.rows:
        for r in rows:
            assert sum(a * b for a, b in zip(r, v)) % p**prec == 0
    assert K.length() == (4 - fraction_rank(rows)) * prec


def test_smith_example():
    assert smith_valuations([[2, 0], [0, 12]], 2, 10) == [1, 2]
    assert smith_valuations([[3, 6], [6, 12]], 3, 10) == [1]


# -- cyclotomic arithmetic -----------------------------------------------------


def to_complex(x: CycloElt):
    z = cmath.exp(2j * cmath.pi / x.p)
    q = x.p**x.prec
    return sum(((c + q // 2) % q - q // 2) * z**i for i, c in enumerate(x.coeffs))


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([3, 5]), st.data())
def test_cyclo_matches_complex(p, data):
    a = data.draw(st.lists(st.integers(-4, 4), min_size=p, max_size=p))
    b = data.draw(st.lists(st.integers(-4, 4), min_size=p, max_size=p))
    x, y = CycloElt.from_cyclic(a, p, 30), CycloElt.from_cyclic(b, p, 30)
    assert abs(to_complex(x * y) - to_complex(x) * to_complex(y)) < 1e-6
    assert abs(to_complex(x + y) - to_complex(x) - to_complex(y)) < 1e-6


def test_cyclo_basics():
    for p in (2, 3, 5):
        phi = CycloElt.from_cyclic([1] * p, p, 8)
        assert phi.is_zero()
        z = CycloElt.zeta_power(1, p, 8)
        acc = CycloElt.scalar(1, p, 8)
        for _ in range(p):
            acc = acc * z
        assert acc == CycloElt.scalar(1, p, 8)
        # norm of a base element c is c^(p-1)
        c = CycloElt.scalar(7, p, 8)
        n = CycloElt.scalar(1, p, 8)
        for _ in range(p - 1):
            n = n * c
        assert n.in_base() and n.base_value() == pow(7, p - 1, p**8)
