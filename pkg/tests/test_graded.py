"""Fine-graded pieces against one dense matrix over all truncated monomials."""

import random

import pytest

from ptower.exactnum import ZpNMatrix, module_length, solve_membership
from ptower.graded import GradedQuotient, Lattice, compositions


def monomials(nvars, top):
    return [m for s in range(top + 1) for m in compositions(s, nvars)]


def dense_model(p, nvars, level, cap, n, gens, slot, t_max=0):
    top = cap * p ** level
    E = p ** level if slot == "ramified" else 1
    T = t_max + 1 if slot == "t" else 1
    basis = [(m, e) for m in monomials(nvars, top) for e in range(max(E, T))]
    index = {b: i for i, b in enumerate(basis)}
    q = p ** n
    rows = []
    for g in gens:
        for (m, e) in basis:
            row = [0] * len(basis)
            for (nums, s), c in g.items():
                v = tuple(a + b for a, b in zip(nums, m))
                if sum(v) > top:
                    continue
                ss, cc = s + e, c
                if slot == "ramified" and ss >= E:
                    ss, cc = ss - E, c * p
                if slot == "t" and ss > t_max:
                    continue
                row[index[(v, ss)]] = (row[index[(v, ss)]] + cc) % q
            rows.append(row)
    return basis, ZpNMatrix.from_rows(rows or [[0] * len(basis)], p, n)


def random_gens(rng, p, nvars, level, cap, n, slot, t_max=0, count=2):
    E = p ** level if slot == "ramified" else 1
    top = cap * p ** level
    gens = []
    for _ in range(count):
        g = {}
        for _ in range(rng.randint(1, 3)):
            nums = [0] * nvars
            for _ in range(rng.randint(0, min(top, 3))):
                nums[rng.randrange(nvars)] += 1
            s = rng.randrange(E) if slot == "ramified" else (rng.randint(0, t_max) if slot == "t" else 0)
            g[(tuple(nums), s)] = rng.randrange(1, p ** n)
        gens.append(g)
    return gens


CASES = [
    # p, nvars, level, cap, n, slot, t_max
    (2, 2, 0, 4, 3, "none", 0),
    (3, 2, 0, 3, 2, "none", 0),
    (2, 3, 0, 3, 2, "none", 0),
    (2, 2, 1, 2, 3, "ramified", 0),
    (3, 1, 1, 2, 2, "ramified", 0),
    (2, 2, 1, 2, 1, "t", 1),
    (3, 2, 0, 3, 1, "t", 2),
]


@pytest.mark.parametrize("case", CASES)
def test_pieces_match_dense_model(case):
    p, nvars, level, cap, n, slot, t_max = case
    rng = random.Random(hash(case) & 0xFFFF)
    for _ in range(12):
        gens = random_gens(rng, p, nvars, level, cap, n, slot, t_max)
        G = GradedQuotient(p, nvars, level, cap, n, gens, slot=slot, t_max=t_max)
        basis, dense = dense_model(p, nvars, level, cap, n, gens, slot, t_max)
        assert G.quotient_length() == module_length(dense, finite_ring=True)
        for _ in range(10):
            terms = {}
            for _ in range(rng.randint(1, 3)):
                b = rng.choice(basis)
                terms[b] = rng.randrange(p ** n)
            # a random combination of ideal rows must be a member
            member = {}
            for _ in range(2):
                r = rng.choice(dense.rows)
                c = rng.randrange(p ** n)
                for i, x in enumerate(r):
                    if x:
                        member[basis[i]] = (member.get(basis[i], 0) + c * x) % p ** n
            assert G.contains(member)
            vec = [0] * len(basis)
            for b, c in terms.items():
                vec[basis.index(b)] = c
            expected = solve_membership(dense, vec) is not None
            assert G.contains(terms) == expected
            # the normal form differs from the element by an ideal member
            nf = G.normal_form(terms)
            diff = dict(terms)
            for k, c in nf.items():
                diff[k] = (diff.get(k, 0) - c) % p ** n
            assert G.contains(diff)


def test_homogeneity_detection():
    xy = {((1, 1), 0): 1}
    binom = {((1, 1), 0): 1, ((2, 0), 0): -1}
    line = {((1, 0), 0): 1, ((0, 0), 0): 2}
    assert GradedQuotient(2, 2, 0, 4, 3, [xy]).homogeneous
    assert GradedQuotient(2, 2, 0, 4, 3, [binom]).homogeneous
    assert not GradedQuotient(2, 2, 0, 4, 3, [line]).homogeneous


def test_lattice_keys_are_coset_invariants():
    L = Lattice([(1, -1, 0), (0, 2, -2)], 3)
    v = (3, 1, 4)
    assert L.key(v) == L.key((2, 2, 4)) == L.key((2, 0, 6))
    assert L.key(v) != L.key((3, 0, 4))


def test_length_of_monomial_quotient():
    # Z/4[x, y]/(x^2, y^2) truncated at degree 4: basis 1, x, y, xy
    G = GradedQuotient(2, 2, 0, 4, 2, [{((2, 0), 0): 1}, {((0, 2), 0): 1}])
    assert G.quotient_length() == 4 * 2
