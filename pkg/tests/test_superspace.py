import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hktsusy.errors import MismatchedJets
from hktsusy.superspace import (
    SuperElement,
    bracket,
    check_degrees,
    d_left,
    d_right,
    residual_norm,
    shift_momenta,
)
from support import BASE, N_FERMIONS, ORDER, full_norm, random_element


def gen(a, base=BASE, order=ORDER, nf=N_FERMIONS):
    return SuperElement.generator(a, base, order, nf)


def test_elementary_brackets():
    for a in range(N_FERMIONS):
        for b in range(N_FERMIONS):
            br = bracket(gen(a), gen(b))
            want = 1j if a == b else 0.0
            assert br.constant_terms().get(((0, 0), ()), 0.0) == pytest.approx(want)
    pi = SuperElement.momentum(1, BASE, ORDER, N_FERMIONS)
    x = SuperElement.coordinate(1, BASE, ORDER, N_FERMIONS)
    y = SuperElement.coordinate(0, BASE, ORDER, N_FERMIONS)
    assert bracket(pi, x).constant_terms() == {((0, 0), ()): 1.0}
    assert not bracket(pi, y).keys
    assert not bracket(x, y).keys


def test_generators_anticommute_in_products():
    p, q = gen(0), gen(1)
    assert full_norm(p * q + q * p) == 0.0
    assert not (p * p).keys


def test_left_and_right_derivatives_differ_by_sign_on_even_terms():
    e = gen(0) * gen(1)
    assert d_left(e, 0).constant_terms() == {((0, 0), (1,)): 1.0}
    assert d_right(e, 0).constant_terms() == {((0, 0), (1,)): -1.0}


def test_parity_and_degrees():
    e = gen(0) * gen(1) * gen(2)
    assert e.parity == "odd" and e.grassmann_degree == 3
    assert (e + gen(0) * gen(1)).parity == "mixed"
    assert SuperElement.zero(BASE, ORDER, N_FERMIONS).parity == "zero"
    pi = SuperElement.momentum(0, BASE, ORDER, N_FERMIONS)
    assert (pi * pi).momentum_degree == 2
    assert check_degrees(pi * pi, 2, "even") is not None
    with pytest.raises(ValueError):
        check_degrees(pi * pi * pi)
    with pytest.raises(ValueError):
        check_degrees(e, parity="even")


def test_mismatched_elements_are_rejected():
    other = SuperElement.generator(0, np.array([0.0, 0.0]), ORDER, N_FERMIONS)
    with pytest.raises(MismatchedJets):
        gen(0) + other
    with pytest.raises(MismatchedJets):
        bracket(gen(0), SuperElement.generator(0, BASE, ORDER, 4))


def test_text_format():
    pi = SuperElement.momentum(0, BASE, ORDER, N_FERMIONS)
    e = (pi * gen(2) * gen(0)).scale(2.0) + gen(1).scale(-1j)
    lines = e.to_text().splitlines()
    assert lines == ["(0-1j) * psi[2]", "(-2+0j) * Pi_1 * psi[1,3]"]


def test_shift_momenta_substitutes():
    pi0 = SuperElement.momentum(0, BASE, ORDER, N_FERMIONS)
    pi1 = SuperElement.momentum(1, BASE, ORDER, N_FERMIONS)
    e = pi0 * pi1 * gen(0)
    shifted = shift_momenta(e, np.array([2.0, 3.0]))
    vals = shifted.constant_terms()
    assert vals[((1, 1), (0,))] == 1.0
    assert vals[((1, 0), (0,))] == 3.0
    assert vals[((0, 1), (0,))] == 2.0
    assert vals[((0, 0), (0,))] == 6.0


def test_residual_norm_uses_constant_terms():
    e = SuperElement.from_entries(BASE, 1, 1, [((0, 0), (0,), np.array([0.5, 9.0, 9.0]))])
    assert residual_norm(e) == 0.5
    assert residual_norm(SuperElement.zero(BASE, 1, 1)) == 0.0


seeds = st.integers(0, 2**32 - 1)
parities = st.integers(0, 1)


def sign(pa, pb):
    return -1 if (pa and pb) else 1


@settings(max_examples=200, deadline=None)
@given(seeds, parities, parities)
def test_graded_antisymmetry(seed, pa, pb):
    rng = np.random.default_rng(seed)
    a, b = random_element(rng, pa), random_element(rng, pb)
    lhs = bracket(a, b)
    rhs = bracket(b, a).scale(-sign(pa, pb))
    assert full_norm(lhs - rhs) <= 1e-10 * max(1.0, full_norm(lhs))


@settings(max_examples=200, deadline=None)
@given(seeds, parities, parities, parities)
def test_leibniz_rule(seed, pa, pb, pc):
    rng = np.random.default_rng(seed)
    a, b, c = (random_element(rng, p) for p in (pa, pb, pc))
    lhs = bracket(a, b * c)
    rhs = bracket(a, b) * c + (b * bracket(a, c)).scale(sign(pa, pb))
    assert full_norm(lhs - rhs) <= 1e-10 * max(1.0, full_norm(lhs))


@settings(max_examples=200, deadline=None)
@given(seeds, parities, parities, parities)
def test_graded_jacobi(seed, pa, pb, pc):
    rng = np.random.default_rng(seed)
    a, b, c = (random_element(rng, p) for p in (pa, pb, pc))
    total = (
        bracket(a, bracket(b, c)).scale(sign(pa, pc))
        + bracket(b, bracket(c, a)).scale(sign(pb, pa))
        + bracket(c, bracket(a, b)).scale(sign(pc, pb))
    )
    scale = max(1.0, full_norm(bracket(a, bracket(b, c))))
    assert full_norm(total) <= 1e-10 * scale


@settings(max_examples=100, deadline=None)
@given(seeds, parities, parities)
def test_bracket_parity_bookkeeping(seed, pa, pb):
    rng = np.random.default_rng(seed)
    br = bracket(random_element(rng, pa), random_element(rng, pb))
    assert br.parity in ("zero", "odd" if (pa + pb) % 2 else "even")


def test_bracket_lowers_order_by_one():
    rng = np.random.default_rng(3)
    a, b = random_element(rng, 1), random_element(rng, 0)
    assert bracket(a, b).order == ORDER - 1
