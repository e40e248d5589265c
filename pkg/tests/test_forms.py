import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracforms.errors import AmbientMismatch, BlockTooLarge, SignatureMismatch
from fracforms.fields import parse
from fracforms.forms import (FracForm, OrderSignature, SpectrumForm, dim, double_hodge_sign, graded_sign, hodge,
                             inner_product, signature, spectrum_hodge, spectrum_inner_product, wedge)

ORDERS = (0.5, 1.0, 1.5)


def dx(*factors, n=3, c=1.0):
    return FracForm.basis(list(factors), n, c)


def test_anticommuting_differentials():
    a, b = dx((0.5, 1)), dx((0.5, 2))
    assert wedge(a, b).terms == {((1, 2),): 1.0}
    assert wedge(b, a).terms == {((1, 2),): -1.0}
    assert not wedge(a, a).terms
    # different orders anticommute as well
    assert wedge(dx((1.0, 2)), dx((0.5, 1))).terms == {((1,), (2,)): -1.0}


def test_three_dimensional_hodge_basis():
    v = 1.0
    assert hodge(dx((v, 1))).terms == {((2, 3),): 1.0}
    assert hodge(dx((v, 2))).terms == {((1, 3),): -1.0}
    assert hodge(dx((v, 3))).terms == {((1, 2),): 1.0}
    assert hodge(FracForm.scalar(2.0, 3)).signature.degree == 0


def test_mixed_block_hodge():
    c = dx((0.5, 1), (1.0, 2))
    h = hodge(c)
    assert h.signature == OrderSignature(((0.5, 2), (1.0, 2)), 3)
    assert h.terms == {((2, 3), (1, 3)): -1.0}


def test_hodge_with_jacobian_divides_per_block():
    c = dx((0.5, 1), (1.0, 2), c=6.0)
    h = hodge(c, jacobian=lambda v: 2.0 if v == 0.5 else 3.0)
    assert list(h.terms.values()) == [-1.0]


def test_errors():
    with pytest.raises(AmbientMismatch):
        wedge(dx((0.5, 1), n=2), dx((0.5, 1), n=3))
    with pytest.raises(SignatureMismatch):
        inner_product(dx((0.5, 1)), dx((1.0, 1)))
    with pytest.raises(BlockTooLarge):
        hodge(FracForm(OrderSignature(((0.5, 4),), 3), {}))
    with pytest.raises(SignatureMismatch):
        FracForm(signature((0.5, 2), n=3), {((1,),): 1.0})


def test_json_round_trip_with_expression_coefficients():
    f = dx((0.5, 1), (0.5, 3), c=parse("x1*x2"))
    g = FracForm.from_json(f.to_json())
    assert g.signature == f.signature
    (key, c), = g.terms.items()
    assert key == ((1, 3),)
    assert c(2.0, 3.0, 0.0) == 6.0


def test_field_coefficients_need_a_point():
    f = dx((0.5, 1), c=parse("x1"))
    with pytest.raises(ValueError):
        inner_product(f, f)
    assert inner_product(f, f, point=[3.0, 0.0, 0.0]) == 9.0


def test_metric_contraction_uses_minors():
    ginv = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 4.0]])
    a = dx((0.5, 1), (0.5, 2))
    assert inner_product(a, a, metric=lambda v: ginv) == pytest.approx(2.0 - 0.25)


# ---------------------------------------------------------------------------
# properties

@st.composite
def signatures(draw, max_n=5):
    n = draw(st.integers(min_value=1, max_value=max_n))
    k = draw(st.integers(min_value=1, max_value=3))
    orders = draw(st.lists(st.sampled_from(ORDERS), min_size=k, max_size=k, unique=True))
    mults = [draw(st.integers(min_value=0, max_value=n)) for _ in orders]
    return OrderSignature(tuple(zip(orders, mults)), n)


@given(signatures())
def test_dimension_matches_enumeration(sig):
    # brute force: subsets of the n differentials of each order with the right sizes
    count = 0
    per_order = [list(itertools.product([0, 1], repeat=sig.n)) for _ in sig.blocks]
    for choice in itertools.product(*per_order):
        if all(sum(bits) == p for bits, (_, p) in zip(choice, sig.blocks)):
            count += 1
    assert dim(sig) == count == len(list(sig.keys()))


@st.composite
def monomials(draw, n=4):
    size = draw(st.integers(min_value=0, max_value=4))
    factors = draw(st.lists(st.tuples(st.sampled_from(ORDERS), st.integers(min_value=1, max_value=n)),
                            min_size=size, max_size=size, unique=True))
    c = draw(st.floats(min_value=-3, max_value=3).filter(lambda v: abs(v) > 0.1))
    return FracForm.basis(factors, n, c)


@given(monomials(), monomials())
def test_graded_commutativity(a, b):
    ab, ba = wedge(a, b), wedge(b, a)
    s = graded_sign(a, b)
    assert set(ab.terms) == set(ba.terms)
    for k in ab.terms:
        assert ab.terms[k] == pytest.approx(s * ba.terms[k])


@given(monomials(), monomials(), monomials())
def test_associativity(a, b, c):
    left, right = wedge(wedge(a, b), c), wedge(a, wedge(b, c))
    assert left.signature == right.signature or not left.terms
    assert left.terms.keys() == right.terms.keys()
    for k in left.terms:
        assert left.terms[k] == pytest.approx(right.terms[k])


@given(signatures(max_n=4), st.data())
def test_double_hodge_sign(sig, data):
    keys = list(sig.keys())
    key = data.draw(st.sampled_from(keys))
    a = FracForm(sig, {key: 1.5})
    twice = hodge(hodge(a))
    assert twice.terms == {key: 1.5 * double_hodge_sign(sig)}


@given(st.integers(min_value=1, max_value=3), st.data())
def test_wedge_with_dual_gives_inner_product(p, data):
    n = 3
    v = 0.5
    keys = list(itertools.combinations(range(1, n + 1), p))
    ca = data.draw(st.lists(st.floats(min_value=-2, max_value=2), min_size=len(keys), max_size=len(keys)))
    cb = data.draw(st.lists(st.floats(min_value=-2, max_value=2), min_size=len(keys), max_size=len(keys)))
    sig = OrderSignature(((v, p),), n)
    a = FracForm(sig, {(k,): c for k, c in zip(keys, ca)})
    b = FracForm(sig, {(k,): c for k, c in zip(keys, cb)})
    top = wedge(a, hodge(b))
    vol = top.terms.get(((1, 2, 3),), 0.0)
    assert vol == pytest.approx(inner_product(a, b), abs=1e-12)


@given(st.integers(min_value=2, max_value=4), st.data())
def test_spectrum_hodge_is_an_isometric_involution(n, data):
    M = 6
    size = M * n * n
    ca = np.array(data.draw(st.lists(st.floats(min_value=-2, max_value=2), min_size=size, max_size=size)))
    cb = np.array(data.draw(st.lists(st.floats(min_value=-2, max_value=2), min_size=size, max_size=size)))
    a = SpectrumForm(1.5, n, ca.reshape(M, n, n))
    b = SpectrumForm(1.5, n, cb.reshape(M, n, n))
    back = spectrum_hodge(spectrum_hodge(a))
    np.testing.assert_array_equal(back.coefficients, a.coefficients)
    assert spectrum_inner_product(spectrum_hodge(a), spectrum_hodge(b)) == pytest.approx(
        spectrum_inner_product(a, b), abs=1e-12)
