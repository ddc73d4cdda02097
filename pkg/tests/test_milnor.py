from __future__ import annotations

import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from constructible.complexes import CochainComplex, cone, tensor
from constructible.field import GF, QQ
from constructible.linalg import Matrix, block_diag, kron
from constructible.milnor import (MonodromyDatum, MonodromyError, betti_bound_section4, charpoly,
                                  cyclic_nearby_datum, cyclic_point_datum, euler_stalk,
                                  lefschetz_number, seb_thom_join, wang_ker_coker)

import gen

t, x = sympy.symbols("t x")


def rand_datum(rng, f, maxrank=3, total=6):
    dims = {}
    for k in range(rng.randint(-1, 0), 2):
        dims[k] = min(rng.randint(0, maxrank), total - sum(dims.values()))
    return MonodromyDatum(dims, {k: gen.rand_invertible(rng, n, f) for k, n in dims.items()})


def poly(coeffs):
    n = len(coeffs) - 1
    return sum(sympy.Rational(str(c)) * t ** (n - i) for i, c in enumerate(coeffs))


@pytest.mark.parametrize("a", range(2, 8))
def test_cyclic_charpoly_and_lefschetz(a):
    P = cyclic_point_datum(a)
    assert P.rank() == a - 1
    assert [int(c) for c in P.charpoly()] == [1] * a  # (t^a - 1) / (t - 1)
    assert lefschetz_number(cyclic_nearby_datum(a)) == 0


def test_cyclic_over_prime_field():
    P = cyclic_point_datum(3, GF(5))
    assert P.charpoly() == [1, 1, 1]


def test_join_matches_bruteforce_tensor():
    rng = random.Random(41)
    checked = 0
    for _ in range(25):
        P, Q = rand_datum(rng, QQ), rand_datum(rng, QQ)
        J = seb_thom_join(P, Q)
        # brute force: total monodromy as one Kronecker product, graded blocks ignored
        TP = block_diag([P.T[k] for k in P.degrees()], QQ) if P.dims else None
        TQ = block_diag([Q.T[k] for k in Q.degrees()], QQ) if Q.dims else None
        if TP is None or TQ is None:
            assert J.rank() == 0
            continue
        K = kron(TP, TQ)
        assert J.rank() == K.nrows == P.rank() * Q.rank() <= 36
        assert J.charpoly() == charpoly(K)
        # resultant form: prod over eigenvalue pairs of (t - lambda mu)
        cp, cq = poly(charpoly(TP)), poly(charpoly(TQ))
        m = TQ.nrows
        res = sympy.resultant(cp.subs(t, x), sympy.expand(x ** m * cq.subs(t, t / x)), x)
        res = sympy.Poly(res, t)
        assert sympy.expand(res.as_expr() / res.LC() - poly(J.charpoly())) == 0
        checked += 1
    assert checked >= 10


def test_join_associative_and_commutative():
    rng = random.Random(42)
    for _ in range(10):
        A, B, C = (rand_datum(rng, QQ, 2) for _ in range(3))
        ab, ba = seb_thom_join(A, B), seb_thom_join(B, A)
        assert ab.dims == ba.dims
        assert all(ab.charpoly(k) == ba.charpoly(k) for k in ab.degrees())
        l, r = seb_thom_join(ab, C), seb_thom_join(A, seb_thom_join(B, C))
        assert l.dims == r.dims
        assert all(l.charpoly(k) == r.charpoly(k) for k in l.degrees())


def test_join_unit():
    P = cyclic_point_datum(4)
    J = seb_thom_join(P, MonodromyDatum.unit())
    assert J.dims == P.dims and J.charpoly() == P.charpoly()


def test_singular_monodromy_rejected():
    with pytest.raises(MonodromyError):
        MonodromyDatum({0: 1}, {0: Matrix.from_lists([[0]])})


@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=3, max_size=3))
@settings(max_examples=50, deadline=None)
def test_ker_coker_dimensions_agree(rows):
    h = Matrix.from_lists(rows)
    if not h.is_invertible():
        with pytest.raises(MonodromyError):
            wang_ker_coker(3, h)
        return
    w = wang_ker_coker(3, h)
    assert w["H0"] == w["H1"]


def test_betti_bound_examples():
    I3 = Matrix.identity(3)
    assert betti_bound_section4([(3, I3)]) == 3
    assert betti_bound_section4([(2, Matrix.from_lists([[2, 0], [0, 3]]))]) == 0
    swap = Matrix.from_lists([[0, 1], [1, 0]])
    assert betti_bound_section4([(2, swap), (2, swap)]) == 2
    with pytest.raises(MonodromyError):
        betti_bound_section4([(3, swap)])


def test_betti_bound_random():
    rng = random.Random(43)
    for _ in range(50):
        branches = []
        for _ in range(rng.randint(1, 3)):
            n = rng.randint(1, 4)
            branches.append((n, gen.rand_invertible(rng, n, QQ)))
        want = sum((Matrix.identity(n) - h).nullspace().ncols for n, h in branches)
        assert betti_bound_section4(branches) == want


def test_euler_stalk():
    assert euler_stalk(CochainComplex.zero()) == 0
    A = CochainComplex({0: 1, 1: 1}, {})
    assert euler_stalk(A) == 0
    rng = random.Random(44)
    for _ in range(10):
        X, Y = gen.rand_complex(rng, QQ, maxdim=3), gen.rand_complex(rng, QQ, maxdim=3)
        assert euler_stalk(tensor(X, Y)) == euler_stalk(X) * euler_stalk(Y)
        f = gen.rand_chain_map(rng, X, Y)
        M, _ = cone(f)
        assert euler_stalk(M) == euler_stalk(Y) - euler_stalk(X)
