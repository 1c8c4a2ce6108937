"""End-to-end acceptance suite, one test group per criterion.

Every comparison is exact equality over GF(2). Each test also enforces its
wall-clock budget. The conftest prints a PASS/FAIL line per criterion at the
end of the run.
"""
import io
import itertools
import json
import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

from fquad import cli
from fquad.checks import run_check
from fquad.decomp import end_ring, find_idempotents, identity_coords, site_spaces, swap
from fquad.functors import SHIPPED, functor_by_name
from fquad.gf2 import BitMat
from fquad.quad import arf, is_isometric, orthogonal_group_order, parse_space
from fquad.tq import classify_generator, compose, compose_batch, enumerate_hom, hom_set, identity

import oracle

SITE = site_spaces(4)
TARGETS = ["H0", "H1", "H0+H0", "H0+H1"]


@contextmanager
def budget(seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.1f}s, budget {seconds}s"


def assert_check(cid):
    res = run_check(cid, SITE)
    assert res.ok, (cid, {k: v for k, v in res.checks.items() if not v}, res.failure)
    return res


# 1 --------------------------------------------------------------------------------------

def test_criterion_01_group_orders():
    with budget(1):
        h0, h1 = parse_space("H0"), parse_space("H1")
        assert orthogonal_group_order(h0) == 2
        assert orthogonal_group_order(h1) == 6
        assert oracle.orthogonal_group_order(h0) == 2
        assert oracle.orthogonal_group_order(h1) == 6


# 2 --------------------------------------------------------------------------------------

def test_criterion_02_arf_classification():
    with budget(1):
        h0, h1 = parse_space("H0"), parse_space("H1")
        assert arf(h0) == 0 and arf(h1) == 1
        assert oracle.arf_by_count(h0) == 0 and oracle.arf_by_count(h1) == 1
        X, Y = parse_space("H0+H0"), parse_space("H1+H1")
        iso = is_isometric(X, Y)
        assert iso is not None
        assert iso.map.rank() == 4
        _, qx = oracle.of(X)
        _, qy = oracle.of(Y)
        assert all(qy[oracle.apply(iso.map.columns, v)] == qx[v] for v in range(16))
        assert is_isometric(h0, h1) is None


# 3 --------------------------------------------------------------------------------------

def test_criterion_03_mix_dimensions():
    with budget(1):
        h0 = parse_space("H0")
        assert functor_by_name("Mix01").dim(h0) == 4
        assert functor_by_name("Mix11").dim(h0) == 2


# 4 --------------------------------------------------------------------------------------

def _pair_counts(W, kinds):
    """Pairs (v, w) in W with B(v, w) = 1 and the stated value of q."""
    n, q = oracle.of(W)
    out = dict.fromkeys(kinds, 0)
    for v in range(1 << n):
        for w in range(1 << n):
            if (q[v ^ w] + q[v] + q[w]) % 2 != 1:
                continue
            for kind, cond in kinds.items():
                out[kind] += cond(q, v, w)
    return out


H0_TYPES = {"A": lambda q, v, w: q[v] == 0, "B": lambda q, v, w: q[w] == 0,
            "C": lambda q, v, w: q[v ^ w] == 1}
H1_TYPES = {"E": lambda q, v, w: q[v] == 1, "F": lambda q, v, w: q[w] == 1,
            "G": lambda q, v, w: q[v ^ w] == 1}


@pytest.mark.parametrize("source,types", [("H0", H0_TYPES), ("H1", H1_TYPES)])
def test_criterion_04_rank_filtration_bases(source, types):
    with budget(30):
        V = parse_space(source)
        for w in TARGETS:
            W = parse_space(w)
            by_rank = [0, 0, 0]
            kinds = {}
            for t in enumerate_hom(V, W):
                by_rank[t.rank] += 1
                if t.rank == 1:
                    k = classify_generator(t)[0]
                    kinds[k] = kinds.get(k, 0) + 1
            assert by_rank[0] == 1 << (2 * W.dim)
            assert set(kinds) <= set(types)
            assert {k: kinds.get(k, 0) for k in types} == _pair_counts(W, types)
            assert by_rank[2] == oracle.count_embeddings(V, W)
            assert by_rank == oracle.hom_rank_counts(V, W)


# 5 --------------------------------------------------------------------------------------

def test_criterion_05_composition_case_table():
    with budget(120):
        res = assert_check("lemma3.9-table")
        covered = {r["target"] for r in res.rows if r["source"] == "H0"}
        assert covered == {S.name for S in SITE}
        assert all(r["mismatches"] == 0 and r["pairs"] > 0 for r in res.rows)


# 6 --------------------------------------------------------------------------------------

def test_criterion_06_splitting_and_decomposition_certificates():
    with budget(300):
        for cid in ("ph0-split", "ph1-split"):
            res = assert_check(cid)
            rows = {r["space"]: r for r in res.rows}
            if cid == "ph0-split":
                assert rows["H0"]["total"] == 28 == 16 + 10 + 2
            else:
                assert [rows["H1"][k] for k in ("rank0", "layer1", "top", "total")] == [16, 18, 6, 40]
            assert all(res.checks.values())
        # the decomposition of P:H0 through the command line, as a user would run it
        buf = io.StringIO()
        assert cli.run(["verify", "ph0-decomposition", "--max-dim", "4", "--format", "json"], buf) == 0
        blob = json.loads(buf.getvalue())["results"][0]
        h0 = next(r for r in blob["rows"] if r["space"] == "H0")
        assert [h0[k] for k in ("rank0", "typeA", "typeB", "typeC", "top")] == [16, 4, 4, 2, 2]
        assert h0["total"] == 28
        for key in ("natural", "invertible", "orthogonal_idempotents", "idempotents_sum_to_identity"):
            assert blob["checks"][key]
        res = assert_check("ph1-decomposition")
        h1 = next(r for r in res.rows if r["space"] == "H1")
        assert [h1[k] for k in ("rank0", "typeE", "typeF", "typeG", "top")] == [16, 6, 6, 6, 6]
        assert h1["total"] == 40 == 16 + 18 + 6


# 7 --------------------------------------------------------------------------------------

def test_criterion_07_indecomposability():
    with budget(60):
        res = assert_check("mix-indecomposable")
        ring = end_ring(functor_by_name("Mix01"), SITE)
        one, tau = identity_coords(ring), ring.coordinates(swap(0))
        assert ring.dim == 2
        elems = [0, one, tau, one ^ tau]
        assert len(set(elems)) == 4
        table = [[ring.multiply(x, y) for y in elems] for x in elems]
        assert table == [[0, 0, 0, 0],
                         [0, one, tau, one ^ tau],
                         [0, tau, one, one ^ tau],
                         [0, one ^ tau, one ^ tau, 0]]
        assert sorted(find_idempotents(ring)) == sorted([0, one])
        ring11 = end_ring(functor_by_name("Mix11"), SITE)
        assert sorted(find_idempotents(ring11)) == sorted([0, identity_coords(ring11)])
        assert res.checks["Mix11:only_trivial_idempotents"]


# 8 --------------------------------------------------------------------------------------

@pytest.mark.parametrize("v", ["H0", "H1"])
def test_criterion_08_top_quotient(v):
    with budget(60):
        res = assert_check(f"top-quotient-{v}")
        V = parse_space(v)
        for row in res.rows:
            W = parse_space(row["space"])
            expected = oracle.count_embeddings(V, W) if W.dim else 0
            assert row["top"] == expected
        assert res.checks["natural"] and res.checks["bijective"]


# 9 --------------------------------------------------------------------------------------

def test_criterion_09_idempotent_calculus():
    with budget(60):
        res = assert_check("e-idempotent")
        assert res.rows[0]["mismatches"] == 0 and res.rows[0]["pairs"] == 8 * 16 * 16
        res = assert_check("orthsum-e")
        assert {r["spaces"] for r in res.rows} == {"H0+H0", "H0+H1", "H1+H0", "H1+H1"}


# 10 -------------------------------------------------------------------------------------

def test_criterion_10_difference_functors():
    with budget(120):
        res = assert_check("delta-lemma4.4")
        shipped = {r["functor"] for r in res.rows}
        assert shipped == set(SHIPPED)
        for r in res.rows:
            assert r["delta0_zero"] == r["delta1_zero"]
        const = next(r for r in res.rows if r["functor"] == "const")
        assert const["delta0_zero"]
        survey = assert_check("simple-survey")
        for r in survey.rows:
            assert r["delta0_nonzero"] == (r["functor"] != "const")


# 11 -------------------------------------------------------------------------------------

SMALL = [parse_space(s) for s in ("0", "H0", "H1")]
BIG = [parse_space("H0+H0"), parse_space("H0+H1")]


def _grid(h1, h2):
    i, j = np.meshgrid(np.arange(len(h1)), np.arange(len(h2)), indexing="ij")
    return h1.take(i.reshape(-1)), h2.take(j.reshape(-1))


def _chain(i1, i2):
    """Indices of F(t2) F(t1) from the monomial images of each factor."""
    rows = np.arange(len(i1))[:, None]
    ext = np.concatenate([i2, np.full((len(i1), 1), -1, dtype=i2.dtype)], axis=1)
    return ext[rows, np.where(i1 < 0, i2.shape[1], i1)]


@pytest.mark.parametrize("name", SHIPPED)
def test_criterion_11_functoriality(name):
    F = functor_by_name(name)
    triples = 0
    for U, V, W in itertools.product(SMALL, repeat=3):
        h1, h2 = hom_set(U, V), hom_set(V, W)
        if F.monomial:
            b1, b2 = _grid(h1, h2)
            ic = F.act_indices(compose_batch(b2, b1))
            assert (_chain(F.act_indices(b1), F.act_indices(b2)) == ic).all()
        else:
            m1 = [F.act(t) for t in h1]
            m2 = [F.act(t) for t in h2]
            for a, t1 in enumerate(h1):
                for b, t2 in enumerate(h2):
                    assert F.act(compose(t2, t1)) == m2[b] @ m1[a]
    for S in SMALL + BIG:
        assert F.act(identity(S)) == BitMat.identity(F.dim(S))
    rng = np.random.default_rng(2024)
    for U, V, W in [(BIG[0], BIG[1], BIG[0]), (BIG[1], BIG[0], BIG[1]), (BIG[0], BIG[0], BIG[1])]:
        h1, h2 = hom_set(U, V), hom_set(V, W)
        n = 3400
        b1 = h1.take(rng.integers(0, len(h1), n))
        b2 = h2.take(rng.integers(0, len(h2), n))
        if F.monomial:
            ic = F.act_indices(compose_batch(b2, b1))
            assert (_chain(F.act_indices(b1), F.act_indices(b2)) == ic).all()
        else:
            c = compose_batch(b2, b1)
            for r in range(n):
                t1, t2 = b1.morphism(r), b2.morphism(r)
                assert F.act(c.morphism(r)) == F.act(t2) @ F.act(t1)
        triples += n
    assert triples >= 10_000


def test_criterion_11_associativity():
    for U, V, W, X in itertools.product(SMALL, repeat=4):
        h1, h2, h3 = hom_set(U, V), hom_set(V, W), hom_set(W, X)
        idx = np.meshgrid(*[np.arange(len(h)) for h in (h1, h2, h3)], indexing="ij")
        b1, b2, b3 = [h.take(i.reshape(-1)) for h, i in zip((h1, h2, h3), idx)]
        left = compose_batch(b3, compose_batch(b2, b1))
        right = compose_batch(compose_batch(b3, b2), b1)
        assert (left.cols == right.cols).all() and (left.kin == right.kin).all()
        for t in h1:
            assert compose(identity(V), t) == t == compose(t, identity(U))
    rng = np.random.default_rng(17)
    n = 12_000
    A, B = BIG
    h1, h2, h3 = hom_set(A, B), hom_set(B, A), hom_set(A, B)
    b1 = h1.take(rng.integers(0, len(h1), n))
    b2 = h2.take(rng.integers(0, len(h2), n))
    b3 = h3.take(rng.integers(0, len(h3), n))
    left = compose_batch(b3, compose_batch(b2, b1))
    right = compose_batch(compose_batch(b3, b2), b1)
    assert (left.cols == right.cols).all() and (left.kin == right.kin).all()
    pick = random.Random(3)
    for r in pick.sample(range(n), 200):
        t = compose(b3.morphism(r), compose(b2.morphism(r), b1.morphism(r)))
        assert left.morphism(r) == t

