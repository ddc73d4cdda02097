from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constructible import kernels
from constructible._kernels_py import rref_dense_modp as py_dense
from constructible._kernels_py import rref_sparse as py_sparse
from constructible.complexes import (ChainMap, CochainComplex, ComplexError, Roof, RoofError,
                                     compose_roofs, cone, direct_sum, homotopic, hom_complex,
                                     hom_element_to_map, map_to_hom_element, minimal_model,
                                     octahedron, roofs_equivalent, shift, shift_map, t_cohomology,
                                     tensor, tilde_comparisons, truncate_above,
                                     truncate_above_tilde, truncate_below, truncate_below_tilde,
                                     turn_triangle)
from constructible.field import GF, QQ, FieldError, parse_field, use_field
from constructible.linalg import Matrix

import gen

FIELDS = [QQ, GF(5)]


def k_at(deg, n=1, f=QQ):
    return CochainComplex.point(n, deg, f)


# fields and matrices -----------------------------------------------------------

def test_field_parsing():
    assert parse_field("q") == QQ
    assert parse_field("fp:7") == GF(7)
    for bad in ("fp:8", "fp:65537", "zz", "fp:x"):
        with pytest.raises(FieldError):
            parse_field(bad)


def test_field_coercion_and_format():
    assert QQ("6/4") == QQ(3) / 2
    assert QQ.fmt(QQ("6/4")) == "3/2"
    assert GF(5)("1/2") == 3
    with pytest.raises(FieldError):
        GF(5)("1/5")


def test_mixing_fields_is_an_error():
    with pytest.raises(FieldError):
        Matrix.identity(2, QQ) @ Matrix.identity(2, GF(5))
    with pytest.raises(FieldError):
        CochainComplex({0: 1, 1: 1}, {0: Matrix.identity(1, GF(5))}, QQ)


def test_active_field_context():
    with use_field(GF(3)):
        assert Matrix.identity(1).field == GF(3)
    assert Matrix.identity(1).field == QQ


@given(st.lists(st.lists(st.integers(-4, 4), min_size=4, max_size=4), min_size=1, max_size=5),
       st.sampled_from(FIELDS))
@settings(max_examples=60, deadline=None)
def test_rank_nullity_and_solve(data, f):
    A = Matrix.from_lists(data, field=f)
    N = A.nullspace()
    assert A.rank() + N.ncols == A.ncols
    assert (A @ N).is_zero()
    b = A @ Matrix.from_lists([[1], [2], [0], [-1]], field=f)
    x = A.solve(b)
    assert x is not None and A @ x == b


def test_backends_agree():
    rng = random.Random(7)
    import numpy as np
    for _ in range(30):
        m, n = rng.randint(1, 8), rng.randint(1, 8)
        rows = [{j: rng.randint(0, 6) for j in range(n) if rng.random() < 0.6} for _ in range(m)]
        rows = [{j: v for j, v in r.items() if v} for r in rows]
        a = py_sparse([dict(r) for r in rows], n, 7)
        b = kernels.rref_sparse([dict(r) for r in rows], n, 7)
        assert a == b
        A = np.zeros((m, n), dtype=np.int64)
        for i, r in enumerate(rows):
            for j, v in r.items():
                A[i, j] = v
        A2 = A.copy()
        assert list(py_dense(A, 7)) == list(kernels.rref_dense_modp(A2, 7))
        assert (A == A2).all()


# complexes ---------------------------------------------------------------------

def test_shift_examples():
    A = k_at(0)
    assert shift(A, 0) == A
    assert shift(shift(A, 1), -1) == A
    assert shift(A, 2).dims == {-2: 1}


def test_shift_signs():
    A = CochainComplex({0: 1, 1: 1}, {0: Matrix.identity(1, QQ)}, QQ)
    assert shift(A, 1).diff(-1) == -Matrix.identity(1, QQ)
    f = ChainMap.identity(A)
    assert shift_map(f, 1).comp(-1) == Matrix.identity(1, QQ)


def test_cohomology_examples():
    A = CochainComplex({0: 1, 1: 1}, {0: Matrix.identity(1, QQ)}, QQ)
    assert A.betti() == {}
    B = CochainComplex({0: 2, 1: 1}, {0: Matrix.from_lists([[1, 0]], field=QQ)}, QQ)
    assert B.betti() == {0: 1}


def test_d_squared_checked():
    with pytest.raises(ComplexError):
        CochainComplex({0: 1, 1: 1, 2: 1}, {0: Matrix.identity(1, QQ),
                                            1: Matrix.identity(1, QQ)}, QQ)


def test_chain_map_checked():
    A = CochainComplex({0: 1, 1: 1}, {0: Matrix.identity(1, QQ)}, QQ)
    B = k_at(0)
    with pytest.raises(ComplexError):
        ChainMap(B, A, {0: Matrix.identity(1, QQ)})


@pytest.mark.parametrize("f", FIELDS)
def test_cone_identity_acyclic_and_turn(f):
    rng = random.Random(1)
    for _ in range(20):
        A = gen.rand_complex(rng, f)
        M, T = cone(ChainMap.identity(A))
        assert M.is_acyclic()
        assert T.is_exact()
        assert turn_triangle(T).is_exact()


def test_cone_of_zero_is_shift_plus_target():
    rng = random.Random(2)
    A, B = gen.rand_complex(rng, QQ), gen.rand_complex(rng, QQ)
    M, _ = cone(ChainMap.zero(A, B))
    assert M == direct_sum(shift(A, 1), B)


def test_homotopy_of_cone_identity():
    rng = random.Random(3)
    A = gen.rand_complex(rng, QQ)
    M, _ = cone(ChainMap.identity(A))
    assert homotopic(ChainMap.identity(M), ChainMap.zero(M, M)) is not None


def test_minimal_model_and_t_cohomology():
    rng = random.Random(4)
    for _ in range(10):
        A = gen.rand_complex(rng, QQ)
        H, i, p = minimal_model(A)
        assert i.is_quasi_iso() and p.is_quasi_iso()
        for n in range(-4, 5):
            assert t_cohomology(A, n).betti() == ({0: A.betti()[n]} if n in A.betti() else {})


@pytest.mark.parametrize("f", FIELDS)
def test_truncations(f):
    rng = random.Random(5)
    for _ in range(25):
        A = gen.rand_complex(rng, f)
        b = A.betti()
        for p in range(-4, 5):
            T, inc = truncate_below(A, p)
            U, pr = truncate_above(A, p)
            assert T.betti() == {k: v for k, v in b.items() if k <= p}
            assert U.betti() == {k: v for k, v in b.items() if k >= p}
            lo, hi = tilde_comparisons(A, p)
            assert lo.is_quasi_iso() and hi.is_quasi_iso()
            assert truncate_below_tilde(A, p)[0].betti() == T.betti()
            assert truncate_above_tilde(A, p)[0].betti() == U.betti()
            for a in range(p + 1, p + 3):
                assert truncate_above(T, a)[0].is_acyclic()


@pytest.mark.parametrize("f", FIELDS)
def test_tensor_and_hom(f):
    rng = random.Random(6)
    for _ in range(20):
        A, B = gen.rand_complex(rng, f, maxdim=3), gen.rand_complex(rng, f, maxdim=3)
        T = tensor(A, B)
        # Kunneth over a field
        kun = {}
        for p, x in A.betti().items():
            for q, y in B.betti().items():
                kun[p + q] = kun.get(p + q, 0) + x * y
        assert T.betti() == kun
        assert T.euler() == A.euler() * B.euler()
        H = hom_complex(B, A)
        hom = {}
        for p, x in B.betti().items():
            for q, y in A.betti().items():
                hom[q - p] = hom.get(q - p, 0) + x * y
        assert H.betti() == hom
        for k in (-2, 1, 3):
            assert hom_complex(B, shift(A, k)).dims == shift(H, k).dims


def test_hom_cocycles_are_chain_maps():
    rng = random.Random(8)
    A, B = gen.rand_complex(rng, QQ), gen.rand_complex(rng, QQ)
    m = gen.rand_chain_map(rng, A, B)
    assert hom_element_to_map(A, B, map_to_hom_element(m)) == m


def test_octahedron_commutes():
    rng = random.Random(9)
    for _ in range(5):
        A, B, E = (gen.rand_complex(rng, QQ, maxdim=3) for _ in range(3))
        f, b = gen.rand_chain_map(rng, A, B), gen.rand_chain_map(rng, B, E)
        o = octahedron(f, b)
        assert o.commutes() and o.all_exact()


def test_roofs():
    rng = random.Random(10)
    A = gen.rand_complex(rng, QQ)
    B = gen.rand_complex(rng, QQ)
    K = k_at(0)
    with pytest.raises(RoofError):
        Roof(ChainMap.zero(K, K), ChainMap.identity(K))
    m = gen.rand_chain_map(rng, A, B)
    r = Roof.from_map(m)
    assert roofs_equivalent(compose_roofs(Roof.identity(A), r), r)
    assert roofs_equivalent(compose_roofs(r, Roof.identity(B)), r)
