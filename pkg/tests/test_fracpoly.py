import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptower.errors import RamifiedInput
from ptower.fracpoly import (
    CharPRing, FracRing, pth_root_monomialwise, random_poly, reduce_mod_p, render_monomial)

RINGS = [FracRing(2, ["x", "y"], 6, 4), FracRing(3, ["x", "y", "z"], 6, 3)]


def polys(ring, level=0):
    """Random elements at ``level`` built from random level-0 data and root monomials."""
    def build(seed):
        rng = random.Random(seed)
        f = random_poly(ring, rng, 3, 2)
        if level:
            g = ring.zero(level)
            for _ in range(2):
                nums = [rng.randrange(ring.p ** level) for _ in range(ring.nvars)]
                g = g + ring.monomial(nums, rng.randrange(ring.p ** level), level,
                                      rng.randrange(ring.p ** ring.precision))
            f = f + g
        return f
    return st.integers(0, 10 ** 9).map(build)


def test_render_canonical_monomial():
    assert render_monomial((3, 4), 2, 2, 2, ("x", "y")) == "p^(1/2) * x^(3/4) * y"
    assert render_monomial((0, 0), 0, 0, 2, ("x", "y")) == "1"
    assert render_monomial((2, 0), 0, 1, 3, ("x", "y")) == "x^(2/3)"


def test_render_polynomial():
    R = FracRing(2, ["x", "y"], 6, 4)
    f = R.var("x") * R.var("y") - 3 * R.var("x") + 1
    assert f.render() == "x * y - 3 * x + 1"
    assert (2 * R.var("x")).render(p_symbol=True) == "p * x"
    assert R.zero().render() == "0"


def test_uniformizer_power_is_p():
    for p in (2, 3, 5):
        R = FracRing(p, ["x"], 4, 4)
        for h in (1, 2):
            u = R.uniformizer(h)
            assert u ** (p ** h) == R.const(p)
            assert u ** (p ** h - 1) != R.const(p)


def test_exponent_arithmetic():
    R = FracRing(2, ["x"], 6, 4)
    r = R.root_var("x", 2)
    assert r.degree() == Fraction(1, 4)
    assert r ** 4 == R.var("x")
    assert (r ** 4).normalized().level == 0


def test_truncation_flags_overflow():
    R = FracRing(2, ["x"], 3, 4)
    f = R.var("x") ** 4
    assert f.is_zero() and f.cap_overflow
    assert not (R.var("x") ** 3).cap_overflow


@pytest.mark.parametrize("ring", RINGS)
@given(data=st.data())
def test_ring_axioms(ring, data):
    level = data.draw(st.integers(0, 1))
    f, g, h = (data.draw(polys(ring, level)) for _ in range(3))
    assert f + g == g + f
    assert f * g == g * f
    assert (f + g) + h == f + (g + h)
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f - f == ring.zero()
    assert f * ring.one() == f


@pytest.mark.parametrize("ring", RINGS)
@given(data=st.data())
def test_frobenius_is_a_ring_map(ring, data):
    f, g = data.draw(polys(ring)), data.draw(polys(ring))
    assert (f + g).frobenius() == f.frobenius() + g.frobenius()
    assert (f * g).frobenius() == f.frobenius() * g.frobenius()


@pytest.mark.parametrize("ring", RINGS)
@given(data=st.data())
def test_frobenius_lifts_pth_power(ring, data):
    f = data.draw(polys(ring))
    diff = f.frobenius() - f ** ring.p
    assert all(c % ring.p == 0 for c in diff.terms.values())


def test_frobenius_rejects_slot():
    R = FracRing(2, ["x"], 4, 4)
    with pytest.raises(RamifiedInput):
        (R.uniformizer(1) * R.root_var("x", 1)).frobenius()


def test_frobenius_on_root_lowers_level():
    R = FracRing(3, ["x"], 4, 3)
    f = R.root_var("x", 1)
    assert f.frobenius() == R.var("x")


def test_reduce_modes():
    R = FracRing(2, ["x"], 4, 4)
    u = R.uniformizer(1)
    f = u * R.root_var("x", 1) + 3 * R.var("x")
    plain = reduce_mod_p(f)
    assert plain.render() == "x"
    layer = reduce_mod_p(f, "layer")
    assert layer.render() == "x + t^(1/2) * x^(1/2)"
    # in layer mode t itself vanishes, in tilt mode t^2 survives
    assert (layer.ring.t_root(0)).is_zero()
    T = CharPRing(2, ["x"], 4, t_limit=2)
    assert not (T.t_root(0) ** 2).is_zero()
    assert (T.t_root(0) ** 3).is_zero()


@pytest.mark.parametrize("p", [2, 3])
@given(seed=st.integers(0, 10 ** 6))
def test_reduction_is_a_ring_map(p, seed):
    R = FracRing(p, ["x", "y"], 6, 3)
    rng = random.Random(seed)
    f, g = random_poly(R, rng, 3, 2), random_poly(R, rng, 3, 2)
    assert reduce_mod_p(f * g) == reduce_mod_p(f) * reduce_mod_p(g)
    assert reduce_mod_p(f + g) == reduce_mod_p(f) + reduce_mod_p(g)


@pytest.mark.parametrize("p", [2, 3])
@given(seed=st.integers(0, 10 ** 6))
def test_pth_root_inverts_frobenius(p, seed):
    R = FracRing(p, ["x", "y"], 6, 3)
    f = reduce_mod_p(random_poly(R, random.Random(seed), 3, 2))
    assert pth_root_monomialwise(f.frobenius()) == f
    assert pth_root_monomialwise(f).frobenius() == f
    assert f.frobenius() == f ** p


def test_divide_by_p():
    R = FracRing(3, ["x"], 4, 3)
    f = 3 * R.var("x") + 6
    g = f.divide_by_p()
    assert g.precision == 2
    assert g == R.var("x") + 2
