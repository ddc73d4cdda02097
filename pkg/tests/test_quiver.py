from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constructible.field import GF, QQ
from constructible.linalg import Matrix
from constructible.quiver import (QuiverError, QuiverMorphism, QuiverPervObject, can_var_identities,
                                  cokernel, constant, costalk_complex, direct_sum,
                                  extension_by_zero, full_pushforward, image, intermediate_extension,
                                  kernel, kernel_support_theorem_check, phi, psi, skyscraper,
                                  stalk_complex, stalk_map, warning_sequence, zero_object,
                                  branch_ic)

import gen


def factor_through_mono(g: QuiverMorphism, i: QuiverMorphism):
    """The unique ``u`` with ``i u = g``, or None."""
    taus = [a.solve(b) for a, b in zip(i.tau, g.tau)]
    eta = i.eta.solve(g.eta)
    if eta is None or any(t is None for t in taus):
        return None
    return QuiverMorphism(g.source, i.source, taus, eta)


def factor_through_epi(g: QuiverMorphism, q: QuiverMorphism):
    """The unique ``u`` with ``u q = g``, or None."""
    taus = []
    for a, b in zip(q.tau, g.tau):
        x = a.T.solve(b.T)
        if x is None:
            return None
        taus.append(x.T)
    e = q.eta.T.solve(g.eta.T)
    if e is None:
        return None
    return QuiverMorphism(q.target, g.target, taus, e.T)


def constructors(f):
    r = Matrix.from_lists([[0, -1], [1, 0]], field=f)
    return [
        zero_object(2, f), skyscraper(3, 2, f), constant(1, 1, f), constant(3, 2, f),
        intermediate_extension([r, [[1]]], f), intermediate_extension([[[3]]], f),
        branch_ic(2, 1, [[2]], f), extension_by_zero([[[2]], [[1]]], f),
        full_pushforward([[[2]], [[5]]], f),
        direct_sum(constant(2, 1, f), intermediate_extension([r, [[1]]], f), skyscraper(2, 1, f)),
    ]


@pytest.mark.parametrize("f", [QQ, GF(7)])
def test_constructors_satisfy_identities(f):
    for P in constructors(f):
        assert P.validate()["ok"], P
        ids = can_var_identities(P)
        assert ids["var_can"] and ids["can_var"]


def test_random_objects_satisfy_identities():
    rng = random.Random(31)
    for f in (QQ, GF(5)):
        for _ in range(100):
            P = gen.rand_quiver(rng, f)
            assert P.validate()["relation"]
            ids = can_var_identities(P)
            assert ids["var_can"] and ids["can_var"]


def test_relation_violation_detected():
    P = QuiverPervObject([1], [Matrix.from_lists([[2]])], 1, Matrix.from_lists([[1]]),
                         Matrix.from_lists([[1]]))
    assert not P.validate()["relation"]
    with pytest.raises(QuiverError):
        P.check()


def test_non_commuting_morphism_rejected():
    P = intermediate_extension([[[3]]])
    with pytest.raises(QuiverError):
        QuiverMorphism(P, P, [Matrix.from_lists([[1]])], Matrix.from_lists([[2]]))


def test_basic_examples():
    C = constant(2)
    assert stalk_complex(C).betti() == {-1: 1}
    assert costalk_complex(C).betti() == {0: 1, 1: 2}
    P = intermediate_extension([[[3]]])
    assert phi(P)[0] == 1 and phi(P)[1] == Matrix.from_lists([[3]])
    assert psi(P)[0] == 1


def test_kernel_and_cokernel_universal_properties():
    rng = random.Random(32)
    for _ in range(40):
        P = gen.rand_quiver(rng, QQ)
        m = gen.rand_endomorphism(rng, P)
        a = gen.rand_endomorphism(rng, P)
        K, i = kernel(m)
        assert all(t.nullspace().ncols == 0 for t in i.tau) and i.eta.nullspace().ncols == 0
        assert (m @ i).is_zero()
        K2, i2 = kernel(m @ a)
        g = a @ i2
        assert (m @ g).is_zero()
        assert factor_through_mono(g, i) is not None
        C, q = cokernel(m)
        assert (q @ m).is_zero()
        C2, q2 = cokernel(a @ m)
        g = q2 @ a
        assert factor_through_epi(g, q) is not None
        K.check()
        C.check()
        im, j = image(m)
        assert im.total + K.total == P.total and im.W + K.W == P.W


def test_warning_sequence():
    K, i, q = warning_sequence()
    assert K.V == [0, 0] and K.W == 1
    assert (q @ i).is_zero()
    si, sq = stalk_map(i), stalk_map(q)
    # the skyscraper maps to zero on stalk cohomology, q is injective there
    assert all(si.induced(k).is_zero() for k in (-1, 0))
    Q = sq.induced(-1)
    assert Q.shape == (2, 1) and Q.rank() == 1
    C, p = cokernel(i)
    assert C.V == [1, 1] and C.W == 0


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_kernel_support_theorem(seed):
    rng = random.Random(seed)
    P = gen.rand_quiver(rng, QQ)
    T = gen.rand_endomorphism(rng, P)
    assert kernel_support_theorem_check(T)["ok"]


def test_theorem_on_zero_and_identity():
    C = constant(2)
    assert kernel_support_theorem_check(QuiverMorphism.zero(C, C))["ok"]
    assert kernel_support_theorem_check(QuiverMorphism.identity(C))["ok"]


def test_direct_sum_keeps_branches_contiguous():
    A, B = constant(2), intermediate_extension([[[2]], [[3]]])
    S = direct_sum(A, B)
    assert S.V == [2, 2] and S.W == A.W + B.W
    assert S.validate()["ok"]
