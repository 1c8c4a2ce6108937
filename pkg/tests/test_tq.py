import itertools
import json
import random

import numpy as np
import pytest

from fquad.gf2 import BitMat, Subspace, all_subspaces, enumerate_linear_maps
from fquad.quad import Isometry, isometric_embeddings, orthogonal_sum, parse_space
from fquad.tq import (DefectForm, InvalidMorphism, MorphismBatch, TqMorphism, classify_generator,
                      compose, compose_batch, compose_realized, embedding_morphism, enumerate_hom,
                      from_diagram, generator, hom_set, idempotent_e, identity, make_morphism,
                      morphism_from_json, orth_sum_morphism, realize, t_of)

import oracle

SMALL = ["0", "H0", "H1"]
SITE4 = ["0", "H0", "H1", "H0+H0", "H0+H1"]


def brute_hom(V, W):
    """Every (A, K) accepted by make_morphism, found by trying all pairs."""
    out = set()
    for A in enumerate_linear_maps(V.dim, W.dim):
        for K in all_subspaces(V.dim):
            try:
                out.add(make_morphism(V, W, A, K))
            except InvalidMorphism:
                pass
    return out


@pytest.mark.parametrize("v,w", list(itertools.product(SMALL, ["0", "H0", "H1", "H0+H1"])))
def test_hom_set_equals_brute_force(v, w):
    V, W = parse_space(v), parse_space(w)
    hs = hom_set(V, W)
    assert set(hs) == brute_hom(V, W)
    assert len(set(hs)) == len(hs)


@pytest.mark.parametrize("v,w", list(itertools.product(SITE4, SITE4)))
def test_rank_counts_match_oracle(v, w):
    V, W = parse_space(v), parse_space(w)
    counts = hom_set(V, W).rank_counts()
    expected = oracle.hom_rank_counts(V, W)
    assert counts == expected[:len(counts)] and sum(expected[len(counts):]) == 0


def test_frozen_hom_counts():
    p = parse_space
    # frozen from the brute-force oracle
    assert hom_set(p("H0"), p("H0")).rank_counts() == [16, 10, 2]
    assert hom_set(p("H1"), p("H0")).rank_counts() == [16, 6, 0]
    assert hom_set(p("H1"), p("H1")).rank_counts() == [16, 18, 6]
    assert len(hom_set(p("H0+H0"), p("H0+H0"))) == 144040
    assert len(hom_set(p("H0+H0"), p("H0+H1"))) == 132016
    assert len(hom_set(p("H0+H1"), p("H0+H1"))) == 152056


def test_enumeration_order_and_filter():
    V = parse_space("H0")
    ts = list(enumerate_hom(V, V))
    assert [t.rank for t in ts] == sorted(t.rank for t in ts)
    assert len(list(enumerate_hom(V, V, max_rank=1))) == 26
    hs = hom_set(V, V)
    for i, t in enumerate(ts):
        assert hs.index_of(t) == i


def test_invalid_morphisms_rejected():
    h0, h1 = parse_space("H0"), parse_space("H1")
    with pytest.raises(InvalidMorphism):
        make_morphism(h0, h1, BitMat.identity(2), Subspace.full(2))
    with pytest.raises(InvalidMorphism):
        make_morphism(h0, h0, BitMat.zero(2, 2), Subspace.span(2, [0b11]))


def test_defect_form():
    h0 = parse_space("H0")
    d = DefectForm(h0, h0, BitMat.identity(2))
    assert d.radical().dim == 2
    d = DefectForm(h0, h0, BitMat.zero(2, 2))
    assert all(d.q(x) == h0.q(x) for x in range(4))
    assert d.radical().dim == 0


def test_special_morphisms():
    h0 = parse_space("H0")
    assert idempotent_e(h0).rank == 0
    assert identity(h0).rank == 2
    assert generator("A", 0b01, 0b10, h0).rank == 1
    for emb in isometric_embeddings(h0, h0):
        assert embedding_morphism(emb).rank == 2


def test_classify_generator():
    h0, h1 = parse_space("H0"), parse_space("H1")
    kinds = [classify_generator(t)[0] for t in hom_set(h0, h0)]
    assert {k: kinds.count(k) for k in set(kinds)} == {"t": 16, "A": 4, "B": 4, "C": 2, "D": 2}
    kinds = [classify_generator(t)[0] for t in hom_set(h1, h1)]
    assert {k: kinds.count(k) for k in set(kinds)} == {"t": 16, "E": 6, "F": 6, "G": 6, "D": 6}
    assert classify_generator(generator("C", 0b01, 0b10, h0)) == ("C", 0b01, 0b10)


def all_small():
    return [parse_space(s) for s in SMALL]


def grid(*sets):
    """Batches holding every combination of one morphism from each hom set."""
    idx = np.meshgrid(*[np.arange(len(h)) for h in sets], indexing="ij")
    return [h.take(i.reshape(-1)) for h, i in zip(sets, idx)]


def test_scalar_and_batch_composition_agree_exhaustive():
    spaces = all_small()
    for U, V, W in itertools.product(spaces, repeat=3):
        h1, h2 = hom_set(U, V), hom_set(V, W)
        b1, b2 = grid(h1, h2)
        c = compose_batch(b2, b1)
        for r in range(len(c)):
            t = compose(b2.morphism(r), b1.morphism(r))
            assert c.morphism(r) == t
            assert t.rank <= b1.morphism(r).rank


def test_associativity_and_identities_exhaustive():
    spaces = all_small()
    for U, V, W, X in itertools.product(spaces, repeat=4):
        h1, h2, h3 = hom_set(U, V), hom_set(V, W), hom_set(W, X)
        for t1 in h1:
            assert compose(identity(V), t1) == t1 == compose(t1, identity(U))
        b1, b2, b3 = grid(h1, h2, h3)
        left = compose_batch(b3, compose_batch(b2, b1))
        right = compose_batch(compose_batch(b3, b2), b1)
        assert (left.cols == right.cols).all() and (left.kin == right.kin).all()


def test_associativity_random_dim4():
    rng = np.random.default_rng(7)
    V = parse_space("H0+H0")
    W = parse_space("H0+H1")
    h1, h2, h3 = hom_set(V, W), hom_set(W, W), hom_set(W, V)
    n = 20000
    b1 = h1.take(rng.integers(0, len(h1), n))
    b2 = h2.take(rng.integers(0, len(h2), n))
    b3 = h3.take(rng.integers(0, len(h3), n))
    left = compose_batch(b3, compose_batch(b2, b1))
    right = compose_batch(compose_batch(b3, b2), b1)
    assert (left.cols == right.cols).all() and (left.kin == right.kin).all()
    # batch composition agrees with the scalar rule
    for r in range(0, n, 997):
        assert left.morphism(r) == compose(b3.morphism(r), compose(b2.morphism(r), b1.morphism(r)))


def test_idempotents_and_linear_parts():
    for V in all_small()[1:]:
        e = idempotent_e(V)
        assert compose(e, e) == e
        for W in all_small()[1:]:
            for f in enumerate_linear_maps(V.dim, W.dim):
                for g in enumerate_linear_maps(W.dim, V.dim):
                    assert compose(t_of(f, V, W), t_of(g, W, V)) == t_of(f @ g, W, W)
    # the linear part is functorial
    rng = random.Random(3)
    hs = hom_set(parse_space("H0"), parse_space("H0+H1"))
    ht = hom_set(parse_space("H0+H1"), parse_space("H1"))
    for _ in range(200):
        a, b = hs.morphism(rng.randrange(len(hs))), ht.morphism(rng.randrange(len(ht)))
        assert compose(b, a).A == b.A @ a.A


def test_orthogonal_sum_of_morphisms():
    h0, h1 = parse_space("H0"), parse_space("H1")
    assert orth_sum_morphism(idempotent_e(h0), idempotent_e(h1)) == \
        idempotent_e(orthogonal_sum(h0, h1))
    assert orth_sum_morphism(identity(h0), identity(h0)) == identity(orthogonal_sum(h0, h0))
    for s in hom_set(h0, h0):
        for t in hom_set(h1, h1):
            assert orth_sum_morphism(s, t).rank == s.rank + t.rank


@pytest.mark.parametrize("v,w", [("H0", "H0"), ("H0", "H1"), ("H1", "H0+H0"), ("H0+H0", "H0")])
def test_realize_round_trip(v, w):
    for t in hom_set(parse_space(v), parse_space(w)):
        f, g = realize(t)
        assert from_diagram(f, g) == t


def test_from_diagram_projection_example():
    V = parse_space("H0")
    X = orthogonal_sum(V, parse_space("H0"))
    ident = Isometry(X, X, BitMat.identity(4))
    incl = Isometry(V, X, BitMat.from_columns([1, 2], 4))
    t = from_diagram(ident, incl)
    assert t.A == BitMat.from_columns([1, 2, 0, 0], 2)
    assert t.K == Subspace.span(4, [1, 2])
    assert from_diagram(Isometry(V, V, BitMat.identity(2)),
                        Isometry(V, V, BitMat.identity(2))) == identity(V)


def test_composition_through_cospans_exhaustive_small():
    spaces = all_small()
    for U, V, W in itertools.product(spaces, repeat=3):
        for t1 in hom_set(U, V):
            for t2 in hom_set(V, W):
                assert compose_realized(t2, t1) == compose(t2, t1)


def test_composition_through_cospans_random_dim4():
    rng = random.Random(11)
    h1 = hom_set(parse_space("H0+H1"), parse_space("H0+H0"))
    h2 = hom_set(parse_space("H0+H0"), parse_space("H0+H1"))
    for _ in range(300):
        a, b = h1.morphism(rng.randrange(len(h1))), h2.morphism(rng.randrange(len(h2)))
        assert compose_realized(b, a) == compose(b, a)


def test_json_round_trip():
    for t in hom_set(parse_space("H0"), parse_space("H0+H1")):
        assert morphism_from_json(json.loads(json.dumps(t.to_json()))) == t


def test_batch_round_trip():
    hs = hom_set(parse_space("H1"), parse_space("H0+H0"))
    batch = MorphismBatch.from_morphisms(list(hs))
    assert (batch.cols == hs.cols).all() and (batch.kin == hs.kin).all()
    assert isinstance(hs.morphism(3), TqMorphism)
