import random

import pytest

from fquad.gf2 import (BitMat, BitVec, Eliminator, Subspace, all_subspaces, bitstring,
                       enumerate_linear_maps, enumerate_subspaces, gaussian_binomial, image,
                       intersect, inverse, kernel, pack_columns, parse_bitstring, preimage, rref,
                       solve, subspace_sum, unpack_columns)

import oracle


def random_matrix(rng, rows, cols):
    return BitMat(rows, cols, tuple(rng.getrandbits(cols) for _ in range(rows)))


def span_set(vectors):
    s = {0}
    for v in vectors:
        s |= {x ^ v for x in s}
    return s


@pytest.fixture
def rng():
    return random.Random(12345)


def test_bitstrings_round_trip():
    assert bitstring(0b0110, 4) == "0110"
    assert bitstring(0b0001, 4) == "1000"
    for x in range(64):
        assert parse_bitstring(bitstring(x, 6)) == x


def test_bitvec_ops():
    a, b = BitVec.from_list([1, 0, 1, 1]), BitVec.from_list([0, 0, 1, 1])
    assert (a ^ b).to_list() == [1, 0, 0, 0]
    assert a.dot(b) == 0
    assert a.weight() == 3
    with pytest.raises(ValueError):
        a ^ BitVec.from_list([1, 0])


def test_matrix_construction_and_entries():
    m = BitMat.from_lists([[1, 0, 1], [0, 1, 1]])
    assert m.rows == 2 and m.cols == 3
    assert m.to_lists() == [[1, 0, 1], [0, 1, 1]]
    assert m.entry(0, 2) == 1 and m.entry(1, 0) == 0
    assert m.columns == (0b01, 0b10, 0b11)
    assert BitMat.from_columns(m.columns, 2) == m
    assert m.transpose().transpose() == m
    assert m.apply(0b101) == 0b11 ^ 0b01
    assert BitMat.from_bitstrings(m.to_bitstrings(), 3) == m


def test_product_matches_definition(rng):
    for _ in range(50):
        a, b = random_matrix(rng, 3, 4), random_matrix(rng, 4, 5)
        c = a @ b
        for i in range(3):
            for j in range(5):
                assert c.entry(i, j) == sum(a.entry(i, k) * b.entry(k, j) for k in range(4)) % 2


def test_rank_kernel_image_brute_force(rng):
    for _ in range(80):
        r, c = rng.randint(1, 5), rng.randint(1, 5)
        m = random_matrix(rng, r, c)
        ker = {x for x in range(1 << c) if m.apply(x) == 0}
        img = {m.apply(x) for x in range(1 << c)}
        assert set(kernel(m).elements) == ker
        assert set(image(m).elements) == img
        assert m.rank() == len(img).bit_length() - 1
        assert len(ker) * len(img) == 1 << c


def test_rref_is_canonical(rng):
    for _ in range(40):
        m = random_matrix(rng, 4, 6)
        # a random invertible row operation leaves the row space alone
        while True:
            p = random_matrix(rng, 4, 4)
            if p.rank() == 4:
                break
        r1, k1 = rref(m)
        r2, k2 = rref(p @ m)
        assert r1 == r2 and k1 == k2 == m.rank()


def test_preimage_intersect_sum(rng):
    for _ in range(60):
        m = random_matrix(rng, 4, 4)
        s = Subspace.span(4, [rng.getrandbits(4) for _ in range(2)])
        t = Subspace.span(4, [rng.getrandbits(4) for _ in range(2)])
        assert set(preimage(m, s).elements) == {x for x in range(16) if s.contains(m.apply(x))}
        assert set(intersect(s, t).elements) == set(s.elements) & set(t.elements)
        assert set(subspace_sum(s, t).elements) == span_set(s.basis + t.basis)
        assert (s & t) == intersect(s, t) and (s + t) == subspace_sum(s, t)


def test_solve_and_inverse(rng):
    for _ in range(60):
        m = random_matrix(rng, 4, 4)
        b = rng.getrandbits(4)
        x = solve(m, b)
        if x is None:
            assert all(m.apply(y) != b for y in range(16))
        else:
            assert m.apply(x) == b
        if m.rank() == 4:
            assert m @ inverse(m) == BitMat.identity(4)
        else:
            with pytest.raises(ValueError):
                inverse(m)


def test_subspace_coordinates_and_complement(rng):
    for s in all_subspaces(4):
        for c in range(1 << s.dim):
            assert s.coordinates(s.combine(c)) == c
        comp = Subspace.span(4, s.complement_basis())
        assert (s & comp).dim == 0 and (s + comp).dim == 4
        assert s.is_subspace_of(Subspace.full(4))


@pytest.mark.parametrize("n", range(5))
def test_subspace_enumeration_counts(n):
    for d in range(n + 1):
        subs = enumerate_subspaces(n, d)
        assert len(subs) == gaussian_binomial(n, d) == oracle.count_subspaces(n, d)
        assert len(set(subs)) == len(subs)
        assert {frozenset(s.elements) for s in subs} == \
            {s for s in oracle.subspace_sets(n) if len(s) == 1 << d}
    assert list(all_subspaces(n)) == sorted(all_subspaces(n), key=Subspace.sort_key)


def test_gaussian_binomial_values():
    assert [gaussian_binomial(4, d) for d in range(5)] == [1, 15, 35, 15, 1]
    assert gaussian_binomial(6, 3) == 1395


def test_pack_columns_round_trip():
    for key in range(1 << 6):
        assert pack_columns(unpack_columns(key, 3, 2), 2) == key
    assert len(list(enumerate_linear_maps(2, 2))) == 16


def test_eliminator_nullspace(rng):
    for _ in range(30):
        rows = [rng.getrandbits(6) for _ in range(4)]
        el = Eliminator()
        for r in rows:
            el.add(r)
        null = el.nullspace(6)
        # null vectors are orthogonal to every row, and there are 6 - rank of them
        assert len(null) == 6 - BitMat(4, 6, tuple(rows)).rank()
        for v in null:
            assert all(bin(v & r).count("1") % 2 == 0 for r in rows)
