import itertools
import random

import pytest

from thetaparam.errors import DomainError
from thetaparam.finitefield import fq_canonical_nonsquare, fq_make
from thetaparam.localfield import (
    SQ_ONE,
    SQ_PI,
    SQ_U,
    SQ_UPI,
    STEP_UNRAMIFIED,
    SYM_FIXED,
    LeadingTerm,
    base_field,
    factor_field,
    lt_make,
    lt_mul,
    lt_neg,
)
from thetaparam.quadform import (
    QuadInvariants,
    SymmetryFlagViolation,
    brute_force_hilbert,
    diagonal_invariants,
    hilbert_class,
    hilbert_symbol,
    invariants_of_orthogonal_datum,
    invariants_via_gram,
    orthogonal_sum,
    so_type,
    symplectic_sanity,
    witt_equal,
)
from thetaparam.torusdata import Factor, POLARITY_ORTHOGONAL, TorusDatum

import gen


def class_reps(p):
    base = base_field(p)
    u = fq_canonical_nonsquare(fq_make(p, 1)).coeffs[0]
    return base, {
        SQ_ONE: lt_make(base, 0, [1]),
        SQ_U: lt_make(base, 0, [u]),
        SQ_PI: lt_make(base, 1, [1]),
        SQ_UPI: lt_make(base, 1, [u]),
    }


# -- Hilbert symbol table properties


@pytest.mark.parametrize("p", [3, 5, 7])
def test_symbol_table_properties(p):
    base, reps = class_reps(p)
    classes = list(reps)
    q = p
    # symmetry and bimultiplicativity on the class table
    for a, b in itertools.product(classes, repeat=2):
        assert hilbert_class(a, b, q) == hilbert_class(b, a, q)
        for c in classes:
            assert hilbert_class(a * c, b, q) == hilbert_class(a, b, q) * hilbert_class(c, b, q)
    # (x, -x) = 1 for every leading term representative
    k = fq_make(p, 1)
    for v in (0, 1, 2, 3):
        for r in k.elements():
            if r.is_zero():
                continue
            x = LeadingTerm(base, v, r)
            assert hilbert_symbol(x, lt_neg(x)) == 1
    # nondegeneracy: every nontrivial class pairs to -1 with some class
    for a in classes:
        if a == SQ_ONE:
            continue
        assert any(hilbert_class(a, b, q) == -1 for b in classes)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_symbol_agrees_with_solubility_oracle_exhaustive(p):
    base, reps = class_reps(p)
    for a, b in itertools.product(reps.values(), repeat=2):
        assert hilbert_symbol(a, b) == brute_force_hilbert(a, b)


def test_symbol_agrees_with_solubility_oracle_random():
    rng = random.Random(23)
    for _ in range(100):
        p = rng.choice([3, 5, 7])
        base = base_field(p)
        k = fq_make(p, 1)
        a = LeadingTerm(base, rng.randint(0, 3), k.from_int(rng.randint(1, p - 1)))
        b = LeadingTerm(base, rng.randint(0, 3), k.from_int(rng.randint(1, p - 1)))
        assert hilbert_symbol(a, b) == brute_force_hilbert(a, b)


def test_symbol_pinned_values():
    base = base_field(5)
    assert hilbert_symbol(lt_make(base, 0, [2]), lt_make(base, 1, [1])) == -1  # (2, 5)
    assert hilbert_symbol(lt_make(base, 0, [2]), lt_make(base, 0, [2])) == 1  # (u, u)


# -- invariants of orthogonal data


def single_factor(p, m, step, val, residue_coeffs):
    base = base_field(p)
    field = factor_field(base, m, step)
    c = LeadingTerm(field, val, field.residue_field().element(residue_coeffs), SYM_FIXED)
    return TorusDatum(base, (Factor(m, step, c, 0),), POLARITY_ORTHOGONAL)


def test_invariants_unramified_examples():
    # c = 1: Gram <2, -2u>, disc u, hasse +1
    d = single_factor(5, 1, STEP_UNRAMIFIED, 0, [1, 0])
    inv = invariants_of_orthogonal_datum(d)
    assert inv == QuadInvariants(2, SQ_U, 1)
    # c = pi: Gram <2 pi, -2u pi>, hasse flips
    d2 = single_factor(5, 1, STEP_UNRAMIFIED, 1, [1, 0])
    inv2 = invariants_of_orthogonal_datum(d2)
    assert inv2 == QuadInvariants(2, SQ_U, -1)
    # hyperbolic comparison: sum has dim 4 and trivial disc
    total = orthogonal_sum(inv, inv2, 5)
    assert total.dim == 4 and total.disc == SQ_ONE


def test_invariants_need_fixed_flags():
    base = base_field(5)
    field = factor_field(base, 1, STEP_UNRAMIFIED)
    from thetaparam.localfield import canonical_tau

    bad = TorusDatum(base, (Factor(1, STEP_UNRAMIFIED, canonical_tau(field), 0),), POLARITY_ORTHOGONAL)
    with pytest.raises(SymmetryFlagViolation):
        invariants_of_orthogonal_datum(bad)


def test_symplectic_sanity():
    rng = random.Random(2)
    d = gen.random_mixed_datum(5, rng, 3)
    assert symplectic_sanity(d) == 2 * d.n
    base = base_field(5)
    field = factor_field(base, 1, STEP_UNRAMIFIED)
    fixed_c = LeadingTerm(field, 0, field.residue_field().one(), SYM_FIXED)
    bad = TorusDatum(base, (Factor(1, STEP_UNRAMIFIED, fixed_c, 0),), "symplectic")
    with pytest.raises(SymmetryFlagViolation):
        symplectic_sanity(bad)


def test_so_type_rows():
    assert so_type(QuadInvariants(4, SQ_ONE, 1)).label == "split"
    assert so_type(QuadInvariants(4, SQ_ONE, -1)).label == "nonsplit_inner"
    assert so_type(QuadInvariants(2, SQ_U, 1)).label == "quasi_split_unramified"
    assert so_type(QuadInvariants(2, SQ_U, -1)).label == "quasi_split_unramified"
    assert so_type(QuadInvariants(2, SQ_PI, 1)).label == "quasi_split_ramified"
    with pytest.raises(DomainError):
        so_type(QuadInvariants(2, SQ_ONE, -1))  # no such binary space


def test_witt_equal_and_norm_scaling():
    from thetaparam.localfield import TruncatedElement, ring_for, tr_norm_step

    rng = random.Random(3)
    for _ in range(40):
        p = rng.choice([3, 5, 7])
        d = gen.random_orthogonal_datum(p, rng, 3)
        inv = invariants_of_orthogonal_datum(d)
        assert witt_equal(inv, inv)
        # rescale one c by the norm of a random truncated element
        i = rng.randrange(len(d.factors))
        f = d.factors[i]
        ring = ring_for(f.c.field, 6)
        while True:
            y = TruncatedElement(
                f.c.field,
                ring,
                tuple(rng.randrange(ring.pN) for _ in range(ring.d)),
                tuple(rng.randrange(ring.pN) for _ in range(ring.d)) if ring.ram else None,
                0,
            )
            v = y.val_or_none()
            if v is not None and v <= 1:
                break
        nm_lt = tr_norm_step(y).leading_term(sym=SYM_FIXED)
        factors = list(d.factors)
        factors[i] = Factor(f.m, f.step, lt_mul(f.c, nm_lt), 0)
        d2 = d.replace_factors(factors)
        assert witt_equal(inv, invariants_of_orthogonal_datum(d2))
    flipped = QuadInvariants(4, SQ_ONE, -1)
    assert not witt_equal(QuadInvariants(4, SQ_ONE, 1), flipped)


def test_orthogonal_sum_law_against_concatenation():
    rng = random.Random(4)
    for _ in range(50):
        p = rng.choice([3, 5, 7])
        a = gen.random_orthogonal_datum(p, rng, 2)
        b = gen.random_orthogonal_datum(p, rng, 2)
        joint = TorusDatum(a.base, a.factors + b.factors, POLARITY_ORTHOGONAL)
        lhs = invariants_of_orthogonal_datum(joint)
        rhs = orthogonal_sum(
            invariants_of_orthogonal_datum(a), invariants_of_orthogonal_datum(b), p
        )
        assert lhs == rhs


def test_transfer_and_gram_routes_agree_small_sweep():
    rng = random.Random(5)
    for _ in range(60):
        p = rng.choice([3, 5, 7])
        d = gen.random_orthogonal_datum(p, rng, 3)
        assert invariants_of_orthogonal_datum(d) == invariants_via_gram(d)


def test_diagonal_invariants_hyperbolic():
    from thetaparam.localfield import minus_one_class

    # <1, -1> over Q_5: trivial Hasse
    dim, det, hasse = diagonal_invariants([SQ_ONE, minus_one_class(5)], 5)
    assert dim == 2 and hasse == 1
    assert det == minus_one_class(5)


def test_precision_env_override(monkeypatch):
    rng = random.Random(31)
    d = gen.random_orthogonal_datum(5, rng, 2)
    expected = invariants_of_orthogonal_datum(d)
    monkeypatch.setenv("THETA_PARAM_PRECISION", "25")
    assert invariants_via_gram(d) == expected
