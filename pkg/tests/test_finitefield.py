import random

import pytest

from thetaparam.finitefield import (
    DegreeTooLarge,
    DividesInput,
    NotPrime,
    ZeroInput,
    fq_canonical_nonsquare,
    fq_embedding,
    fq_is_square,
    fq_legendre,
    fq_make,
    fq_multiplicative_generator,
    fq_norm1_generator,
    fq_sqrt,
)


def test_fq_make_prime_field_degenerate_modulus():
    f3 = fq_make(3, 1)
    assert f3.modulus == (0, 1)  # the class of x, i.e. the prime field itself
    assert f3.order == 3


def test_fq_make_f9_group_order():
    f9 = fq_make(3, 2)
    nonzero = [x for x in f9.elements() if not x.is_zero()]
    assert len(nonzero) == 8
    g = fq_multiplicative_generator(f9)
    assert g.multiplicative_order() == 8


def test_fq_make_f25_generator_order_by_enumeration():
    f25 = fq_make(5, 2)
    g = fq_multiplicative_generator(f25)
    seen = set()
    cur = f25.one()
    for _ in range(24):
        cur = cur * g
        seen.add(cur.coeffs)
    assert len(seen) == 24


def test_fq_make_rejections():
    with pytest.raises(NotPrime):
        fq_make(9, 1)
    with pytest.raises(NotPrime):
        fq_make(2, 3)
    with pytest.raises(DegreeTooLarge):
        fq_make(7, 8)  # 7^8 exceeds the default bound


def test_fq_make_deterministic():
    assert fq_make(5, 3).modulus == fq_make(5, 3).modulus
    assert fq_make(3, 4) is fq_make(3, 4)


def test_is_square_examples():
    f5 = fq_make(5, 1)
    assert fq_is_square(f5.one())
    assert not fq_is_square(f5.from_int(2))
    assert fq_is_square(f5.from_int(-1))  # 2^2 = 4 = -1 mod 5
    with pytest.raises(ZeroInput):
        fq_is_square(f5.zero())


def test_is_square_multiplicative():
    rng = random.Random(0)
    for (p, f) in [(3, 2), (5, 2), (7, 1)]:
        k = fq_make(p, f)
        elems = [x for x in k.elements() if not x.is_zero()]
        for _ in range(200):
            x, y = rng.choice(elems), rng.choice(elems)
            sx = 1 if fq_is_square(x) else -1
            sy = 1 if fq_is_square(y) else -1
            sxy = 1 if fq_is_square(x * y) else -1
            assert sxy == sx * sy


def test_legendre_examples():
    assert fq_legendre(1, 7) == 1
    assert fq_legendre(2, 5) == -1
    assert fq_legendre(-1, 5) == 1
    with pytest.raises(DividesInput):
        fq_legendre(10, 5)


def test_norm1_generator_orders():
    assert fq_norm1_generator(fq_make(3, 1), 1).multiplicative_order() == 4
    assert fq_norm1_generator(fq_make(5, 1), 1).multiplicative_order() == 6
    g = fq_norm1_generator(fq_make(3, 1), 2)
    assert g.multiplicative_order() == 10
    # norm to F_9 via the explicit product of conjugates g * g^{q^m}
    assert g * g**9 == g.field.one()


def test_norm1_generator_norm_is_one_by_enumeration():
    base = fq_make(3, 1)
    g = fq_norm1_generator(base, 2)
    field = g.field
    kernel = {x.coeffs for x in field.elements() if not x.is_zero() and x * x**9 == field.one()}
    powers = set()
    cur = field.one()
    for _ in range(10):
        powers.add(cur.coeffs)
        cur = cur * g
    assert powers == kernel


def test_embedding_is_ring_hom_and_frobenius_compatible():
    rng = random.Random(1)
    for (a, b) in [(1, 2), (2, 4), (1, 3), (2, 6), (3, 6)]:
        src, tgt = fq_make(3, a), fq_make(3, b)
        emb = fq_embedding(src, tgt)
        elems = list(src.elements())
        for _ in range(50):
            x, y = rng.choice(elems), rng.choice(elems)
            assert emb.apply(x + y) == emb.apply(x) + emb.apply(y)
            assert emb.apply(x * y) == emb.apply(x) * emb.apply(y)
            assert emb.apply(x**3) == emb.apply(x) ** 3
        assert emb.apply(src.one()) == tgt.one()


def test_embedding_pullback_roundtrip():
    src, tgt = fq_make(5, 2), fq_make(5, 4)
    emb = fq_embedding(src, tgt)
    for x in src.elements():
        assert emb.pullback(emb.apply(x)) == x


def test_sqrt():
    for (p, f) in [(3, 2), (5, 1), (5, 2), (7, 2)]:
        k = fq_make(p, f)
        for x in k.elements():
            if x.is_zero() or not fq_is_square(x):
                continue
            s = fq_sqrt(x)
            assert s * s == x


def test_canonical_nonsquare():
    for (p, f) in [(3, 1), (5, 1), (7, 1), (5, 2)]:
        k = fq_make(p, f)
        u = fq_canonical_nonsquare(k)
        assert not fq_is_square(u)


def test_norm1_generator_size_bound():
    from thetaparam.finitefield import FieldTooLarge

    with pytest.raises(FieldTooLarge):
        fq_norm1_generator(fq_make(7, 1), 4)  # F_{7^8} exceeds the bound
