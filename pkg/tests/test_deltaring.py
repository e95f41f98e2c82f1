import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptower.deltaring import (
    ConsistentUpTo, InjectiveUpTo, KernelWitness, NoSplittingUpTo, Obstruction, RingPresentation,
    SplitsUpTo, admits_delta_on_quotient, check_delta_axioms, check_phi_injective,
    check_phi_splits, delta, is_p_torsion_free, is_reduced_mod_p, phi, verify_retraction)
from ptower.errors import PrecisionExhausted, RamifiedInput
from ptower.fracpoly import FracRing, random_poly


def pres(p, names, cap, gens, n=4):
    R = FracRing(p, names, cap, n)
    v = {name: R.var(name) for name in names}
    return RingPresentation(R, [g(v, R) for g in gens])


def test_phi_and_delta_basics():
    R = FracRing(2, ["x", "y"], 8, 4)
    x, y = R.var("x"), R.var("y")
    assert phi(x) == x ** 2
    assert phi(R.const(2)) == R.const(2)
    assert phi(x * y) == x ** 2 * y ** 2
    assert delta(x).is_zero()
    assert delta(R.one()).is_zero() and delta(R.zero()).is_zero()
    d3 = delta(R.const(3))
    assert d3.precision == 3 and d3 == R.const(5, precision=3)
    assert delta(x + y) == -(x * y)
    with pytest.raises(PrecisionExhausted):
        delta(R.const(3, precision=1))


def test_phi_rejects_slot():
    R = FracRing(2, ["x"], 4, 4)
    with pytest.raises(RamifiedInput):
        phi(R.uniformizer(1))


def test_delta_identities_examples():
    R = FracRing(3, ["x", "y"], 9, 4)
    assert check_delta_axioms(R.var("x"), R.var("y")).holds
    assert check_delta_axioms(R.zero(), R.var("y") + 2).holds


@pytest.mark.parametrize("p", [2, 3, 5])
@given(seed=st.integers(0, 10 ** 9))
def test_delta_identities_random(p, seed):
    R = FracRing(p, ["x", "y"], 4 * p, 4)
    rng = random.Random(seed)
    f, g = random_poly(R, rng, 3, 2), random_poly(R, rng, 3, 2)
    v = check_delta_axioms(f, g)
    assert v.holds, v.residuals


@given(seed=st.integers(0, 10 ** 9))
def test_delta_expansion_oracle(seed):
    # at p = 2: delta(a + b) = delta(a) + delta(b) - a b for any a, b
    R = FracRing(2, ["x", "y"], 8, 5)
    rng = random.Random(seed)
    a, b = random_poly(R, rng, 2, 2), random_poly(R, rng, 2, 2)
    assert delta(a + b) == delta(a) + delta(b) - a * b


def test_phi_twice_multiplies_exponents_by_p_squared():
    R = FracRing(3, ["x", "y"], 20, 3)
    f = R.var("x") * R.var("y") ** 2 + 2
    assert phi(phi(f)) == R.var("x") ** 9 * R.var("y") ** 18 + 2


def test_injectivity_node():
    R = pres(2, ["x", "y"], 6, [lambda v, R: v["x"] * v["y"]])
    out = check_phi_injective(R)
    assert isinstance(out, InjectiveUpTo) and out.window == 3 and not out.warnings


def test_injectivity_polynomial_ring():
    R = FracRing(3, ["x"], 7, 3)
    out = check_phi_injective(RingPresentation(R, []))
    assert isinstance(out, InjectiveUpTo) and out.window == 2


def test_injectivity_nonreduced():
    R = pres(2, ["x"], 6, [lambda v, R: v["x"] ** 2])
    out = check_phi_injective(R)
    assert isinstance(out, KernelWitness)
    assert out.warnings
    # the witness is killed by phi in R but is nonzero
    G = R.quotient()
    assert not G.contains(out.element.terms)
    assert G.contains(phi(out.element).terms)


def test_reduced_and_torsion_free_checks():
    node = pres(2, ["x", "y"], 6, [lambda v, R: v["x"] * v["y"]])
    assert is_reduced_mod_p(node)[0]
    assert is_p_torsion_free(node)[0]
    px = pres(2, ["x"], 4, [lambda v, R: 2 * v["x"]])
    ok, wit = is_p_torsion_free(px)
    assert not ok and wit.render() == "x"


def test_splitting_node():
    R = pres(2, ["x", "y"], 6, [lambda v, R: v["x"] * v["y"]])
    out = check_phi_splits(R)
    assert isinstance(out, SplitsUpTo) and out.window == 3
    assert not out.warnings
    table = {v: dict(f.terms) for v, f in out.retraction.items()}
    assert verify_retraction(R, table)
    # splitting implies injectivity on the same window
    assert isinstance(check_phi_injective(R), InjectiveUpTo)


def test_splitting_line():
    R = FracRing(3, ["x"], 6, 3)
    out = check_phi_splits(RingPresentation(R, []))
    assert isinstance(out, SplitsUpTo)
    x = R.var("x")
    assert out.retraction[(3,)] == x
    assert out.retraction[(6,)] == x ** 2


def test_splitting_two_planes_warns():
    R = pres(2, list("xyzw"), 4, [lambda v, R: v["x"] * v["z"], lambda v, R: v["x"] * v["w"],
                                  lambda v, R: v["y"] * v["z"], lambda v, R: v["y"] * v["w"]])
    out = check_phi_splits(R)
    assert any("Gorenstein" in w for w in out.warnings)
    assert isinstance(out, (SplitsUpTo, NoSplittingUpTo))


def test_no_splitting_for_nonreduced():
    R = pres(2, ["x"], 6, [lambda v, R: v["x"] ** 2])
    out = check_phi_splits(R)
    assert isinstance(out, NoSplittingUpTo)


@pytest.mark.parametrize("p,expected", [(2, "x^2"), (3, "x^3")])
def test_px_has_no_delta_structure(p, expected):
    R = pres(p, ["x"], 2 * p, [lambda v, R: p * v["x"]])
    out = admits_delta_on_quotient(R)
    assert isinstance(out, Obstruction)
    assert out.witness.render() == expected
    assert out.statement.startswith(f"{expected} ∈ (p, p * x)")


def test_free_ring_admits_delta():
    R = FracRing(2, ["x"], 6, 4)
    out = admits_delta_on_quotient(RingPresentation(R, []))
    assert isinstance(out, ConsistentUpTo)
    assert out.delta_values["x"] == "0"


def test_stable_torsion_free_quotient_admits_delta():
    R = pres(3, ["x", "y"], 6, [lambda v, R: v["x"] * v["y"]], n=3)
    assert isinstance(admits_delta_on_quotient(R), ConsistentUpTo)


def test_presentation_validation():
    R = FracRing(2, ["x"], 4, 4)
    with pytest.raises(ValueError):
        RingPresentation(R, [R.zero()])
    with pytest.raises(ValueError):
        RingPresentation(R, [R.root_var("x", 1)])
    assert RingPresentation(R, [R.var("x", 1)]).generators[0].level == 0
