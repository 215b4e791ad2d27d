"""Torus data (L, L0, c, chi, gamma): validation, equivalence, residue
reduction, finite Weyl action, and block decomposition by depth.

A datum is a product of factors.  Factor i carries the tower (an
unramified layer of degree m_i over the base, then a quadratic step), the
element c_i as a leading term, the depth-zero character exponent chi0_i
against the canonical norm-one generator, and the declared positive-depth
levels (r, gamma) of the character.  Symplectic data have anti-flagged c,
orthogonal data fixed-flagged c.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import DomainError
from .finitefield import FqDescriptor, fq_make
from .localfield import (
    STEP_RAMIFIED,
    STEP_UNRAMIFIED,
    SYM_ANTI,
    SYM_FIXED,
    LeadingTerm,
    TameFieldDescriptor,
    factor_field,
    flag_consistent,
    is_norm,
    lt_inv,
    lt_mul,
)


class NotDepthZero(DomainError):
    pass


class PolarityMismatch(DomainError):
    pass


POLARITY_SYMPLECTIC = "symplectic"
POLARITY_ORTHOGONAL = "orthogonal"


@dataclass(frozen=True)
class Factor:
    """One factor (L_i, L_i0, c_i, chi_i) of a datum.

    gamma_levels lists (depth r, leading term of gamma) with strictly
    increasing positive rational r; val_L(gamma) = -r in F-normalized units,
    i.e. val = -r * e as an integer.
    """

    m: int
    step: str
    c: LeadingTerm
    chi0: int = 0
    gamma_levels: tuple = ()

    @property
    def depth(self) -> Fraction:
        return self.gamma_levels[-1][0] if self.gamma_levels else Fraction(0)

    def top_gamma(self) -> LeadingTerm:
        if not self.gamma_levels:
            raise NotDepthZero("factor has no positive-depth data")
        return self.gamma_levels[-1][1]

    def chi0_modulus(self, q: int) -> int:
        """Order of the depth-zero quotient of L^1: q^m + 1 unramified, 2 ramified."""
        return q**self.m + 1 if self.step == STEP_UNRAMIFIED else 2


@dataclass(frozen=True)
class TorusDatum:
    base: TameFieldDescriptor
    factors: tuple
    polarity: str

    @property
    def n(self) -> int:
        return sum(f.m for f in self.factors)

    def replace_factors(self, factors) -> "TorusDatum":
        return TorusDatum(self.base, tuple(factors), self.polarity)


def make_factor(base, m, step, val, residue_coeffs, sym, chi0=0, gammas=(), sigma_sym="none"):
    field = factor_field(base, m, step)
    c = LeadingTerm(field, val, field.residue_field().element(residue_coeffs), sym, sigma_sym)
    levels = tuple(
        (Fraction(r), LeadingTerm(field, gval, field.residue_field().element(gres), SYM_ANTI, gsig))
        for (r, gval, gres, gsig) in gammas
    )
    return Factor(m, step, c, chi0, levels)


@dataclass
class ValidationReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self):
        return {"ok": self.ok, "violations": list(self.violations)}


def validate(datum: TorusDatum) -> ValidationReport:
    """Collect all structural violations; an empty report means valid."""
    v = []
    base = datum.base
    if base.f != 1 or base.e != 1 or base.step is not None:
        v.append("base descriptor must be a plain base field")
        return ValidationReport(v)
    if datum.polarity not in (POLARITY_SYMPLECTIC, POLARITY_ORTHOGONAL):
        v.append(f"unknown polarity {datum.polarity!r}")
    if not datum.factors:
        v.append("datum has no factors")
    want_sym = SYM_ANTI if datum.polarity == POLARITY_SYMPLECTIC else SYM_FIXED
    for i, f in enumerate(datum.factors):
        tag = f"factor {i}"
        if f.step not in (STEP_UNRAMIFIED, STEP_RAMIFIED):
            v.append(f"{tag}: unknown step {f.step!r}")
            continue
        field = factor_field(base, f.m, f.step)
        if f.c.field != field:
            v.append(f"{tag}: c lives on the wrong field")
            continue
        if f.c.sym != want_sym:
            v.append(f"{tag}: c flag {f.c.sym} does not match polarity {datum.polarity}")
        elif not flag_consistent(f.c):
            v.append(f"{tag}: declared {f.c.sym} flag contradicts the leading term of c")
        if not f.gamma_levels:
            if f.step != STEP_UNRAMIFIED:
                v.append(f"{tag}: depth-zero factor on a ramified tower "
                         "(no trace-zero unit exists there)")
        else:
            last = Fraction(0)
            for r, g in f.gamma_levels:
                if r <= last:
                    v.append(f"{tag}: gamma depths not strictly increasing at r={r}")
                last = r
                if g.field != field:
                    v.append(f"{tag}: gamma at r={r} lives on the wrong field")
                    continue
                if g.sym != SYM_ANTI:
                    v.append(f"{tag}: gamma at r={r} is not anti-flagged")
                elif not flag_consistent(g):
                    v.append(f"{tag}: gamma at r={r} contradicts its anti flag")
                if g.val != -r * field.e:
                    v.append(f"{tag}: gamma at r={r} has val {g.val}, expected {-r * field.e}")
    if not v:
        zero = [f for f in datum.factors if not f.gamma_levels]
        if zero:
            sub = datum.replace_factors(zero)
            fd1, fd2 = residue_reduction(sub)
            for fd in (fd1, fd2):
                if fd.entries and not is_general_position(fd, fd.exponents):
                    v.append("depth-zero character exponents are not in general position")
                    break
    return ValidationReport(v)


# ---------------------------------------------------------------------------
# depth-zero residue reduction


@dataclass(frozen=True)
class FiniteTorusDatum:
    """Finite-field shadow of a depth-zero block: factors (m_i, L_i0, L_i)
    with character exponents on the norm-one groups of order q^{m_i} + 1."""

    q: int
    p: int
    f0: int
    entries: tuple  # of m_i
    exponents: tuple

    def residue_fields(self, i: int) -> tuple[FqDescriptor, FqDescriptor]:
        m = self.entries[i]
        return fq_make(self.p, self.f0 * m), fq_make(self.p, self.f0 * 2 * m)

    @property
    def dim(self) -> int:
        return 2 * sum(self.entries)

    def orders(self):
        return tuple(self.q**m + 1 for m in self.entries)


def normalize_c_valuations(datum: TorusDatum) -> TorusDatum:
    """Equivalent datum with val_L(c) in {0, 1}: c is rescaled by the norm
    Nm(pi_L^{-k}), which is pi^{-2k} for an unramified step and (-pi0)^{-k}
    for the ramified one."""
    out = []
    for f in datum.factors:
        c = f.c
        k = c.val // 2
        if k:
            res = c.residue
            if f.step == STEP_RAMIFIED and k % 2:
                res = -res
            c = replace(c, val=c.val - 2 * k, residue=res)
        out.append(replace(f, c=c))
    return datum.replace_factors(out)


def residue_reduction(datum: TorusDatum):
    """Split the depth-zero datum by val(c) parity into the two residue
    torus data (I1: even, I2: odd), after unit normalization."""
    for f in datum.factors:
        if f.gamma_levels or f.step != STEP_UNRAMIFIED:
            raise NotDepthZero("residue reduction needs an unramified, gamma-free datum")
    norm = normalize_c_valuations(datum)
    q = datum.base.q_base
    packs = {0: [], 1: []}
    for f in norm.factors:
        packs[f.c.val % 2].append((f.m, f.chi0 % (q**f.m + 1)))
    out = []
    for parity in (0, 1):
        ms = tuple(m for m, _ in packs[parity])
        ks = tuple(k for _, k in packs[parity])
        out.append(FiniteTorusDatum(q, datum.base.base_p, datum.base.base_f, ms, ks))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# finite Weyl action


def _factor_orbit(k: int, q: int, modulus: int):
    """Orbit of an exponent under <q> mod (q^m + 1); contains -k since
    q^m = -1 there."""
    out = set()
    cur = k % modulus
    while cur not in out:
        out.add(cur)
        cur = (cur * q) % modulus
    return out


def weyl_group_order(fd: FiniteTorusDatum) -> int:
    order = 1
    for m in fd.entries:
        order *= 2 * m
    counts = {}
    for m in fd.entries:
        counts[m] = counts.get(m, 0) + 1
    for c in counts.values():
        for j in range(2, c + 1):
            order *= j
    return order


def weyl_orbit(fd: FiniteTorusDatum, chi) -> frozenset:
    """Full orbit of the exponent vector under per-factor signed Frobenius
    twists and permutations of identical factors."""
    mods = fd.orders()
    start = tuple(k % n for k, n in zip(chi, mods))
    seen = {start}
    frontier = [start]
    same = [
        (i, j)
        for i in range(len(fd.entries))
        for j in range(i + 1, len(fd.entries))
        if fd.entries[i] == fd.entries[j]
    ]
    while frontier:
        cur = frontier.pop()
        nxt = []
        for i in range(len(cur)):
            t = list(cur)
            t[i] = (t[i] * fd.q) % mods[i]
            nxt.append(tuple(t))
        for i, j in same:
            t = list(cur)
            t[i], t[j] = t[j], t[i]
            nxt.append(tuple(t))
        for t in nxt:
            if t not in seen:
                seen.add(t)
                frontier.append(t)
    return frozenset(seen)


def is_general_position(fd: FiniteTorusDatum, chi) -> bool:
    """Trivial stabilizer test: the orbit has full size exactly then."""
    if not fd.entries:
        return True
    return len(weyl_orbit(fd, chi)) == weyl_group_order(fd)


# ---------------------------------------------------------------------------
# block decomposition


@dataclass(frozen=True)
class BlockDecomposition:
    """Factor indices grouped by top gamma depth, depths strictly decreasing;
    depth 0 collects the gamma-free factors."""

    levels: tuple  # of (Fraction depth, tuple of factor indices)

    def as_dict(self):
        return {str(r): list(ix) for r, ix in self.levels}

    def zero_block(self):
        for r, ix in self.levels:
            if r == 0:
                return ix
        return ()

    def positive_blocks(self):
        return [(r, ix) for r, ix in self.levels if r > 0]


def block_decompose(datum: TorusDatum) -> BlockDecomposition:
    groups = {}
    for i, f in enumerate(datum.factors):
        groups.setdefault(f.depth, []).append(i)
    levels = tuple(
        (r, tuple(groups[r])) for r in sorted(groups.keys(), reverse=True)
    )
    return BlockDecomposition(levels)


def recombine(datum: TorusDatum, decomposition: BlockDecomposition) -> TorusDatum:
    """Round-trip check helper: rebuild the datum from its blocks."""
    order = [i for _, ix in decomposition.levels for i in ix]
    if sorted(order) != list(range(len(datum.factors))):
        raise DomainError("block decomposition does not partition the factors")
    return datum.replace_factors(datum.factors[i] for i in sorted(order))


# ---------------------------------------------------------------------------
# equivalence


def _tower_isos(factor: Factor, q: int):
    """F-isomorphisms of the factor tower at descriptor level.

    Unramified step: the 2m Frobenius twists.  Ramified step: m Frobenius
    twists times the sign of the uniformizer square root.
    """
    if factor.step == STEP_UNRAMIFIED:
        return [(j, 1) for j in range(2 * factor.m)]
    return [(j, s) for j in range(factor.m) for s in (1, -1)]


def _apply_iso(lt: LeadingTerm, iso, q: int) -> LeadingTerm:
    j, sign = iso
    res = lt.residue ** (q**j)
    if sign == -1 and lt.val % 2:
        res = -res
    return replace(lt, residue=res)


def _iso_matches_c(fa: Factor, fb: Factor, iso, q: int) -> bool:
    moved = _apply_iso(fa.c, iso, q)
    ratio = lt_mul(moved, lt_inv(fb.c))
    return is_norm(ratio)


def _iso_matches_character(fa: Factor, fb: Factor, iso, q: int) -> bool:
    j, _ = iso
    mod = fa.chi0_modulus(q)
    if (fa.chi0 * q**j - fb.chi0) % mod != 0:
        return False
    if len(fa.gamma_levels) != len(fb.gamma_levels):
        return False
    for (ra, ga), (rb, gb) in zip(fa.gamma_levels, fb.gamma_levels):
        if ra != rb:
            return False
        moved = _apply_iso(ga, iso, q)
        if moved.val != gb.val or moved.residue != gb.residue:
            return False
    return True


def _factor_pair_equivalent(fa: Factor, fb: Factor, q: int, mode: str) -> bool:
    if fa.m != fb.m or fa.step != fb.step:
        return False
    isos = _tower_isos(fa, q)
    if mode == "strict":
        return any(
            _iso_matches_c(fa, fb, iso, q) and _iso_matches_character(fa, fb, iso, q)
            for iso in isos
        )
    # up to Weyl conjugacy the character may be twisted independently of c
    return any(_iso_matches_c(fa, fb, iso, q) for iso in isos) and any(
        _iso_matches_character(fa, fb, iso, q) for iso in isos
    )


def datum_equivalent(a: TorusDatum, b: TorusDatum, mode: str = "weyl") -> bool:
    """Equivalence of data: a factor bijection respecting towers such that
    some tower isomorphism carries c into the norm class of its partner and
    transports the character data (exactly for mode='strict', up to the
    finite Weyl action for mode='weyl', the default)."""
    if mode not in ("weyl", "strict"):
        raise DomainError(f"unknown equivalence mode {mode!r}")
    if a.polarity != b.polarity:
        raise PolarityMismatch(f"{a.polarity} vs {b.polarity}")
    if a.base != b.base or len(a.factors) != len(b.factors):
        return False
    q = a.base.q_base
    n = len(a.factors)
    feasible = [
        [_factor_pair_equivalent(fa, fb, q, mode) for fb in b.factors] for fa in a.factors
    ]
    return _has_perfect_matching(feasible, n)


def _has_perfect_matching(feasible, n) -> bool:
    matched_b = [None] * n

    def try_assign(i, seen):
        for j in range(n):
            if feasible[i][j] and j not in seen:
                seen.add(j)
                if matched_b[j] is None or try_assign(matched_b[j], seen):
                    matched_b[j] = i
                    return True
        return False

    return all(try_assign(i, set()) for i in range(n))
