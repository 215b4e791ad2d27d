"""Tame extensions of p-adic fields in two models.

The primary model is the exact "leading term" of an element of L^x modulo
1 + m_L: an L-normalized valuation, an angular residue in the residue
field of L (taken with respect to the canonical uniformizer), and a
declared symmetry flag for the relative involution of a marked quadratic
step L/L0.  For p odd and tame towers this determines square classes and
norm classes exactly, which is everything the theta parameter maps need.

Towers handled here are an unramified layer over the base followed by an
optional quadratic step, either unramified (residue degree doubles) or
ramified (the canonical step adjoins a square root of the uniformizer).

The secondary model, TruncatedElement, is honest p-adic arithmetic at a
tracked finite precision (coefficients live in Z/p^N over the deterministic
unramified modulus, plus an optional t with t^2 = p).  It exists only as a
brute-force oracle: Gram matrices of trace forms, norm-image enumeration,
and solubility searches are computed here and compared against the exact
leading-term routes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError
from .finitefield import (
    FqDescriptor,
    FqElement,
    fq_canonical_nonsquare,
    fq_embedding,
    fq_is_square,
    fq_make,
    fq_sqrt,
)

SYM_FIXED = "fixed"
SYM_ANTI = "anti"
SYM_NONE = "none"

STEP_UNRAMIFIED = "unramified"
STEP_RAMIFIED = "ramified"


class FieldMismatch(DomainError):
    pass


class NoQuadraticStep(DomainError):
    pass


class PrecisionExhausted(DomainError):
    """The truncated model cannot certify the requested digits; retry higher."""


def sym_compose(a: str, b: str) -> str:
    """fixed*fixed = anti*anti = fixed; fixed*anti = anti; none absorbs."""
    if a == SYM_NONE or b == SYM_NONE:
        return SYM_NONE
    return SYM_FIXED if a == b else SYM_ANTI


# ---------------------------------------------------------------------------
# field descriptors


@dataclass(frozen=True)
class TameFieldDescriptor:
    """A tame tower L over the base field F (p odd, p does not divide e).

    base_p, base_f describe F (unramified over Q_p of residue degree base_f).
    f is the residue degree of L over F and e the ramification index; the
    optional step marker records the relative quadratic step L/L0.
    """

    base_p: int
    base_f: int
    f: int
    e: int
    step: str | None = None

    def __post_init__(self):
        if self.e not in (1, 2):
            raise DomainError("ramification index must be 1 or 2")
        if self.base_p % 2 == 0:
            raise DomainError("p must be odd")
        if self.step == STEP_UNRAMIFIED and self.f % 2 != 0:
            raise DomainError("unramified step needs even residue degree")
        if self.step == STEP_RAMIFIED and self.e != 2:
            raise DomainError("ramified step needs e = 2")

    @property
    def q_base(self) -> int:
        return self.base_p**self.base_f

    @property
    def m(self) -> int:
        """Degree of L0 over F for a marked quadratic step."""
        self._need_step()
        return self.f // 2 if self.step == STEP_UNRAMIFIED else self.f

    def residue_field(self) -> FqDescriptor:
        return fq_make(self.base_p, self.base_f * self.f)

    def subfield_residue(self) -> FqDescriptor:
        """Residue field of L0 (equal to that of L for a ramified step)."""
        self._need_step()
        return fq_make(self.base_p, self.base_f * self.m)

    @property
    def relative_residue_size(self) -> int:
        """|residue field of L0|, the power used by the step involution."""
        return self.base_p ** (self.base_f * self.m)

    def subfield_descriptor(self) -> "TameFieldDescriptor":
        self._need_step()
        return TameFieldDescriptor(self.base_p, self.base_f, self.m, 1, None)

    def _need_step(self):
        if self.step is None:
            raise NoQuadraticStep(f"{self} carries no quadratic step")

    def __repr__(self):
        tag = f",{self.step}" if self.step else ""
        return f"Tame(p={self.base_p},f0={self.base_f},f={self.f},e={self.e}{tag})"


def base_field(p: int, f0: int = 1) -> TameFieldDescriptor:
    return TameFieldDescriptor(p, f0, 1, 1, None)


def factor_field(base: TameFieldDescriptor, m: int, step: str) -> TameFieldDescriptor:
    """The field L of a datum factor: unramified degree m over the base,
    then the quadratic step."""
    if base.f != 1 or base.e != 1:
        raise DomainError("factor towers build on a base field descriptor")
    if step == STEP_UNRAMIFIED:
        return TameFieldDescriptor(base.base_p, base.base_f, 2 * m, 1, step)
    if step == STEP_RAMIFIED:
        return TameFieldDescriptor(base.base_p, base.base_f, m, 2, step)
    raise DomainError(f"unknown step {step!r}")


# ---------------------------------------------------------------------------
# leading terms


@dataclass(frozen=True)
class LeadingTerm:
    """An element class of L^x/(1 + m_L): valuation, angular residue, flags.

    val is L-normalized (val_L(L^x) = Z).  sym declares behavior under the
    relative involution of the marked step; sigma_sym optionally declares
    behavior under an unramified base involution (used in distinction mode).
    """

    field: TameFieldDescriptor
    val: int
    residue: FqElement
    sym: str = SYM_NONE
    sigma_sym: str = SYM_NONE

    def __post_init__(self):
        if self.residue.is_zero():
            raise DomainError("leading term needs a nonzero residue")
        if self.residue.field != self.field.residue_field():
            raise FieldMismatch("residue lives in the wrong field")

    def fval(self) -> Fraction:
        """F-normalized valuation val_L / e."""
        return Fraction(self.val, self.field.e)

    def with_sym(self, sym: str, sigma_sym: str | None = None) -> "LeadingTerm":
        return replace(self, sym=sym, sigma_sym=self.sigma_sym if sigma_sym is None else sigma_sym)

    def __repr__(self):
        tags = self.sym + ("" if self.sigma_sym == SYM_NONE else f"/s:{self.sigma_sym}")
        return f"LT(val={self.val},res={list(self.residue.coeffs)},{tags})"


def lt_make(field, val, residue_coeffs, sym=SYM_NONE, sigma_sym=SYM_NONE) -> LeadingTerm:
    return LeadingTerm(field, val, field.residue_field().element(residue_coeffs), sym, sigma_sym)


def lt_one(field: TameFieldDescriptor) -> LeadingTerm:
    return LeadingTerm(field, 0, field.residue_field().one(), SYM_FIXED, SYM_FIXED)


def lt_mul(a: LeadingTerm, b: LeadingTerm) -> LeadingTerm:
    if a.field != b.field:
        raise FieldMismatch(f"{a.field} != {b.field}")
    return LeadingTerm(
        a.field,
        a.val + b.val,
        a.residue * b.residue,
        sym_compose(a.sym, b.sym),
        sym_compose(a.sigma_sym, b.sigma_sym),
    )


def lt_neg(a: LeadingTerm) -> LeadingTerm:
    # negation commutes with both involutions, so the flags survive
    return replace(a, residue=-a.residue)


def lt_inv(a: LeadingTerm) -> LeadingTerm:
    return replace(a, val=-a.val, residue=a.residue.inverse())


def lt_pow(a: LeadingTerm, n: int) -> LeadingTerm:
    if n == 0:
        return lt_one(a.field)
    b = a if n > 0 else lt_inv(a)
    out = b
    for _ in range(abs(n) - 1):
        out = lt_mul(out, b)
    return out


def lt_scale_unit(a: LeadingTerm, c: int) -> LeadingTerm:
    """Multiply by a nonzero rational integer unit (e.g. 2); both flags survive."""
    if c % a.field.base_p == 0:
        raise DomainError("integer scale must be a unit")
    return replace(a, residue=a.residue * c)


def relative_conjugate(a: LeadingTerm) -> LeadingTerm:
    """The involution of the marked quadratic step L/L0 on leading terms.

    Unramified step: angular residues are taken against a step-fixed
    uniformizer, so only the residue moves (by the relative Frobenius).
    Ramified step: the canonical uniformizer is negated, so the angular
    residue picks up (-1)^val and the residue field is untouched.
    """
    field = a.field
    field._need_step()
    if field.step == STEP_UNRAMIFIED:
        return replace(a, residue=a.residue ** field.relative_residue_size)
    res = a.residue if a.val % 2 == 0 else -a.residue
    return replace(a, residue=res)


def flag_consistent(a: LeadingTerm) -> bool:
    """Necessary residue/valuation conditions for the declared sym flag."""
    if a.sym == SYM_NONE:
        return True
    field = a.field
    if field.step is None:
        return a.sym == SYM_FIXED  # no involution: only "fixed" is sensible
    if field.step == STEP_UNRAMIFIED:
        conj = a.residue ** field.relative_residue_size
        return conj == a.residue if a.sym == SYM_FIXED else conj == -a.residue
    # ramified: fixed elements of L0 have even val, anti elements odd val
    return (a.val % 2 == 0) if a.sym == SYM_FIXED else (a.val % 2 == 1)


def is_norm(x: LeadingTerm, strict: bool = True) -> bool:
    """Membership of x in Nm_{L/L0}(L^x), for x in L0 (decided at leading order).

    Unramified step: the norm group is exactly the even part of val_{L0}.
    Ramified step with L = L0(sqrt(w0)): Nm(sqrt(w0)) = -w0, and unit norms
    have square residue, so x = w0^v u is a norm iff leg(u * (-1)^v) = 1.
    """
    field = x.field
    field._need_step()
    if field.step == STEP_UNRAMIFIED:
        if strict and (x.residue ** field.relative_residue_size) != x.residue:
            raise DomainError("is_norm input must lie in L0 (fixed residue)")
        return x.val % 2 == 0
    if x.val % 2 != 0:
        if strict:
            raise DomainError("is_norm input must lie in L0 (even valuation)")
        return False
    v0 = x.val // 2
    corrected = x.residue if v0 % 2 == 0 else -x.residue
    return fq_is_square(corrected)


@dataclass(frozen=True)
class SquareClass:
    """An element of F^x / (F^x)^2 = {1, u, pi, u*pi} for p odd."""

    pi: int  # valuation parity
    ns: int  # 1 iff the unit part is a non-square

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        return SquareClass((self.pi + other.pi) % 2, (self.ns + other.ns) % 2)

    @property
    def label(self) -> str:
        return {(0, 0): "1", (0, 1): "u", (1, 0): "pi", (1, 1): "u*pi"}[(self.pi, self.ns)]

    def is_trivial(self) -> bool:
        return self.pi == 0 and self.ns == 0

    def __repr__(self):
        return f"SquareClass({self.label})"


SQ_ONE = SquareClass(0, 0)
SQ_U = SquareClass(0, 1)
SQ_PI = SquareClass(1, 0)
SQ_UPI = SquareClass(1, 1)


def square_class(x: LeadingTerm) -> SquareClass:
    """Square class of x with respect to the canonical uniformizer of its field."""
    return SquareClass(x.val % 2, 0 if fq_is_square(x.residue) else 1)


def minus_one_class(q: int) -> SquareClass:
    """Square class of -1 over a field with residue size q."""
    return SquareClass(0, 0 if (q - 1) // 2 % 2 == 0 else 1)


# canonical elements -------------------------------------------------------


def lt_uniformizer_base(field: TameFieldDescriptor) -> LeadingTerm:
    """The base uniformizer p as a leading term of L (val = e, fixed)."""
    return LeadingTerm(field, field.e, field.residue_field().one(), SYM_FIXED, SYM_FIXED)


def lt_uniformizer(field: TameFieldDescriptor) -> LeadingTerm:
    """The canonical uniformizer of L itself; anti for a ramified step."""
    sym = SYM_ANTI if field.step == STEP_RAMIFIED else SYM_FIXED
    return LeadingTerm(field, 1, field.residue_field().one(), sym, SYM_NONE)


@lru_cache(maxsize=None)
def canonical_tau(field: TameFieldDescriptor) -> LeadingTerm:
    """Deterministic trace-zero unit of an unramified step: a square root of
    the canonical non-square of L0, whose residue s satisfies s^Q0 = -s."""
    if field.step != STEP_UNRAMIFIED:
        raise NoQuadraticStep("trace-zero units of valuation 0 need an unramified step")
    k_big = field.residue_field()
    k_small = field.subfield_residue()
    u = fq_canonical_nonsquare(k_small)
    s = fq_sqrt(fq_embedding(k_small, k_big).apply(u))
    assert s ** field.relative_residue_size == -s
    return LeadingTerm(field, 0, s, SYM_ANTI, SYM_NONE)


# ---------------------------------------------------------------------------
# truncated model


class TruncatedRing:
    """O_L to absolute p-adic precision N, as (Z/p^N)[x]/(modulus)[t]/(t^2-p).

    d is the degree of the maximal unramified part of L over Q_p; ram marks
    the ramified quadratic step.  The modulus is the integer lift of the
    deterministic F_{p^d} modulus, so residues match the finite field layer.
    Instances are interned by _make_ring, so identity comparison is safe.
    """

    def __init__(self, p: int, d: int, ram: bool, prec: int):
        self.p = p
        self.d = d
        self.ram = ram
        self.prec = prec
        self.pN = p**prec
        self.k = fq_make(p, d)
        self.modulus = tuple(int(c) for c in self.k.modulus)
        self._auto_cache: dict[int, list[tuple[int, ...]]] = {}

    # -- raw polynomial arithmetic on length-d integer tuples mod p^N

    def uadd(self, a, b):
        pN = self.pN
        return tuple((x + y) % pN for x, y in zip(a, b))

    def usub(self, a, b):
        pN = self.pN
        return tuple((x - y) % pN for x, y in zip(a, b))

    def uneg(self, a):
        pN = self.pN
        return tuple((-x) % pN for x in a)

    def uscale(self, a, c):
        pN = self.pN
        return tuple((x * c) % pN for x in a)

    def umul(self, a, b):
        d, pN = self.d, self.pN
        out = [0] * (2 * d - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] = (out[i + j] + ai * bj) % pN
        # reduce degrees d .. 2d-2 by the monic modulus
        for k in range(2 * d - 2, d - 1, -1):
            c = out[k]
            if c:
                out[k] = 0
                for i in range(d):
                    out[k - d + i] = (out[k - d + i] - c * self.modulus[i]) % pN
        return tuple(out[:d])

    def uone(self):
        return (1,) + (0,) * (self.d - 1)

    def uzero(self):
        return (0,) * self.d

    def uinv(self, a):
        """Inverse of a unit (Hensel lift of the residue inverse)."""
        res = self.k.element(a)
        if res.is_zero():
            raise PrecisionExhausted("inverting a non-unit in the truncated ring")
        y = tuple(int(c) for c in res.inverse().coeffs)
        prec = 1
        while prec < self.prec:
            # y <- y(2 - a y), doubling correct digits
            ay = self.umul(a, y)
            two_minus = self.usub(self.uscale(self.uone(), 2), ay)
            y = self.umul(y, two_minus)
            prec *= 2
        return y

    def upow(self, a, e):
        out = self.uone()
        base = a
        while e > 0:
            if e & 1:
                out = self.umul(out, base)
            base = self.umul(base, base)
            e >>= 1
        return out

    def _eval_int_poly(self, coeffs, at):
        acc = self.uzero()
        for c in reversed(coeffs):
            acc = self.umul(acc, at)
            acc = self.uadd(acc, self.uscale(self.uone(), c))
        return acc

    def automorphism_images(self, j: int) -> list[tuple[int, ...]]:
        """Images of the power basis under the Frobenius lift x -> x^{p^j}.

        The root of the modulus congruent to x^{p^j} mod p is Hensel-lifted
        by Newton iteration; entry k is the expansion of root^k.
        """
        j %= self.d
        if j in self._auto_cache:
            return self._auto_cache[j]
        if j == 0:
            images = [self.uzero() for _ in range(self.d)]
            for k in range(self.d):
                img = [0] * self.d
                img[k] = 1
                images[k] = tuple(img)
        else:
            gen = tuple([0, 1] + [0] * (self.d - 2)) if self.d > 1 else (0,)
            r = self.upow(gen, self.p**j)
            fprime = [(i * self.modulus[i]) % self.pN for i in range(1, self.d + 1)]
            for _ in range(self.prec.bit_length() + 2):
                fr = self._eval_int_poly(self.modulus, r)
                fpr = self._eval_int_poly(fprime, r)
                r = self.usub(r, self.umul(fr, self.uinv(fpr)))
            assert not any(self._eval_int_poly(self.modulus, r))
            images = [self.uone()]
            for _ in range(self.d - 1):
                images.append(self.umul(images[-1], r))
        self._auto_cache[j] = images
        return images

    def apply_automorphism(self, a, j: int):
        images = self.automorphism_images(j)
        out = self.uzero()
        for k, c in enumerate(a):
            if c:
                out = self.uadd(out, self.uscale(images[k], c))
        return out


@lru_cache(maxsize=None)
def _make_ring(p: int, d: int, ram: bool, prec: int) -> TruncatedRing:
    return TruncatedRing(p, d, ram, prec)


def ring_for(field: TameFieldDescriptor, prec: int) -> TruncatedRing:
    return _make_ring(field.base_p, field.base_f * field.f, field.e == 2, prec)


def _valp_int(c: int, p: int, cap: int) -> int:
    if c == 0:
        return cap
    v = 0
    while c % p == 0:
        c //= p
        v += 1
    return v


@dataclass(frozen=True)
class TruncatedElement:
    """(a + b t) / p^shift with a, b in the unramified part mod p^N.

    t is absent (b = None) unless the field has a ramified step, in which
    case t^2 = p and t is the canonical uniformizer.  The digit expansion
    (a strictly increasing list of (valuation, residue) pairs) is exposed
    as a derived view.
    """

    field: TameFieldDescriptor
    ring: TruncatedRing
    a: tuple
    b: tuple | None
    shift: int = 0

    @property
    def precision(self) -> int:
        """Absolute precision in val_L units: digits below this are exact."""
        return self.field.e * (self.ring.prec - self.shift)

    def _parts_valp(self):
        cap = self.ring.prec
        va = min((_valp_int(c, self.ring.p, cap) for c in self.a), default=cap)
        vb = (
            min((_valp_int(c, self.ring.p, cap) for c in self.b), default=cap)
            if self.b is not None
            else cap
        )
        return va, vb

    def val_or_none(self):
        """L-normalized valuation, or None when zero to working precision."""
        va, vb = self._parts_valp()
        cap = self.ring.prec
        if self.field.e == 1:
            return None if va >= cap else va - self.shift
        cands = []
        if va < cap:
            cands.append(2 * (va - self.shift))
        if vb < cap:
            cands.append(2 * (vb - self.shift) + 1)
        return min(cands) if cands else None

    def val(self) -> int:
        v = self.val_or_none()
        if v is None:
            raise PrecisionExhausted("valuation exceeds working precision")
        return v

    def is_certified_nonzero(self) -> bool:
        return self.val_or_none() is not None

    def leading_term(self, sym=SYM_NONE, sigma_sym=SYM_NONE) -> LeadingTerm:
        v = self.val()
        p = self.ring.p
        if self.field.e == 1:
            k = v + self.shift
            res = self.field.residue_field().element([(c // p**k) % p for c in self.a])
        else:
            part = self.a if v % 2 == 0 else self.b
            k = (v if v % 2 == 0 else v - 1) // 2 + self.shift
            res = self.field.residue_field().element([(c // p**k) % p for c in part])
        return LeadingTerm(self.field, v, res, sym, sigma_sym)

    def expansion(self):
        """Digit list [(val_L, residue)] for all certified digits."""
        out = []
        x = self
        guard = self.precision + 2
        while x.is_certified_nonzero() and guard > 0:
            lt = x.leading_term()
            out.append((lt.val, lt.residue))
            x = tr_sub(x, tr_lift(lt, self.ring.prec))
            guard -= 1
        return out

    def __repr__(self):
        return f"Trunc({self.field}, a={list(self.a)}, b={self.b and list(self.b)}, /p^{self.shift})"


def _align(x: TruncatedElement, y: TruncatedElement):
    if x.field != y.field:
        raise FieldMismatch("truncated elements on different fields")
    if x.ring is not y.ring:
        raise FieldMismatch("truncated elements at different precisions")
    s = max(x.shift, y.shift)
    return _reshift(x, s), _reshift(y, s), s


def _reshift(x: TruncatedElement, s: int) -> TruncatedElement:
    if s == x.shift:
        return x
    mult = x.ring.p ** (s - x.shift)
    a = x.ring.uscale(x.a, mult)
    b = x.ring.uscale(x.b, mult) if x.b is not None else None
    return TruncatedElement(x.field, x.ring, a, b, s)


def _normalized(x: TruncatedElement) -> TruncatedElement:
    p = x.ring.p
    a, b, s = x.a, x.b, x.shift
    while s > 0 and all(c % p == 0 for c in a) and (b is None or all(c % p == 0 for c in b)):
        a = tuple(c // p for c in a)
        b = tuple(c // p for c in b) if b is not None else None
        s -= 1
    return TruncatedElement(x.field, x.ring, a, b, s)


def tr_zero(field: TameFieldDescriptor, prec: int) -> TruncatedElement:
    ring = ring_for(field, prec)
    b = ring.uzero() if ring.ram else None
    return TruncatedElement(field, ring, ring.uzero(), b, 0)


def tr_from_int(field: TameFieldDescriptor, n: int, prec: int) -> TruncatedElement:
    ring = ring_for(field, prec)
    a = ring.uscale(ring.uone(), n % ring.pN)
    b = ring.uzero() if ring.ram else None
    return TruncatedElement(field, ring, a, b, 0)


def tr_lift(lt: LeadingTerm, prec: int) -> TruncatedElement:
    """The coefficient lift of a leading term: lift(residue) * pi_L^val."""
    ring = ring_for(lt.field, prec)
    unit = tuple(int(c) for c in lt.residue.coeffs)
    zero = ring.uzero()
    if ring.ram:
        v, s = lt.val, 0
        if v < 0:
            s = (-v + 1) // 2
            v += 2 * s
        k, odd = divmod(v, 2)
        a = ring.uscale(unit, ring.p**k) if not odd else zero
        b = ring.uscale(unit, ring.p**k) if odd else zero
        return _normalized(TruncatedElement(lt.field, ring, a, b, s))
    v, s = lt.val, 0
    if v < 0:
        s, v = -v, 0
    return TruncatedElement(lt.field, ring, ring.uscale(unit, ring.p**v), None, s)


def tr_add(x: TruncatedElement, y: TruncatedElement) -> TruncatedElement:
    x, y, s = _align(x, y)
    ring = x.ring
    b = ring.uadd(x.b, y.b) if x.b is not None else None
    return TruncatedElement(x.field, ring, ring.uadd(x.a, y.a), b, s)


def tr_sub(x: TruncatedElement, y: TruncatedElement) -> TruncatedElement:
    return tr_add(x, tr_neg(y))


def tr_neg(x: TruncatedElement) -> TruncatedElement:
    b = x.ring.uneg(x.b) if x.b is not None else None
    return TruncatedElement(x.field, x.ring, x.ring.uneg(x.a), b, x.shift)


def tr_mul(x: TruncatedElement, y: TruncatedElement) -> TruncatedElement:
    if x.field != y.field or x.ring is not y.ring:
        raise FieldMismatch("truncated elements on different fields")
    ring = x.ring
    if x.b is None:
        return _normalized(
            TruncatedElement(x.field, ring, ring.umul(x.a, y.a), None, x.shift + y.shift)
        )
    a = ring.uadd(ring.umul(x.a, y.a), ring.uscale(ring.umul(x.b, y.b), ring.p))
    b = ring.uadd(ring.umul(x.a, y.b), ring.umul(x.b, y.a))
    return _normalized(TruncatedElement(x.field, ring, a, b, x.shift + y.shift))


def tr_inv(x: TruncatedElement) -> TruncatedElement:
    """Inverse of a certified-nonzero element."""
    ring = x.ring
    v = x.val()
    if x.b is None:
        # strip p^k to a unit, invert, restore
        k = v + x.shift
        a = tuple(c // ring.p**k for c in x.a)
        inv = ring.uinv(a)
        out = TruncatedElement(x.field, ring, inv, None, 0)
        return _mul_base_power(out, -v)
    if v % 2 != 0:
        # y = x*t has even valuation and 1/x = t * (1/y) since t^2 = p
        y = tr_mul(x, _t_element(x.field, ring))
        return tr_mul(tr_inv(y), _t_element(x.field, ring))
    k = v // 2 + x.shift
    a = tuple(c // ring.p**k for c in x.a)
    b = tuple(c // ring.p**k for c in x.b)
    # (a + bt)^{-1} = (a - bt) / (a^2 - p b^2)
    denom = ring.usub(ring.umul(a, a), ring.uscale(ring.umul(b, b), ring.p))
    dinv = ring.uinv(denom)
    out = TruncatedElement(x.field, ring, ring.umul(a, dinv), ring.uneg(ring.umul(b, dinv)), 0)
    return _mul_base_power(out, -v)


def _t_element(field, ring) -> TruncatedElement:
    return TruncatedElement(field, ring, ring.uzero(), ring.uone(), 0)


def _mul_base_power(x: TruncatedElement, v: int) -> TruncatedElement:
    """Multiply by pi_L^v where pi_L is the canonical uniformizer of L."""
    ring = x.ring
    if ring.ram:
        out = x
        if v % 2 != 0:
            out = tr_mul(out, _t_element(x.field, ring))
            v -= 1
        k = v // 2
    else:
        out, k = x, v
    if k >= 0:
        a = ring.uscale(out.a, ring.p**k)
        b = ring.uscale(out.b, ring.p**k) if out.b is not None else None
        return _normalized(TruncatedElement(out.field, ring, a, b, out.shift))
    return _normalized(TruncatedElement(out.field, ring, out.a, out.b, out.shift - k))


def tr_conj(x: TruncatedElement) -> TruncatedElement:
    """The involution of the marked quadratic step, exactly."""
    x.field._need_step()
    if x.field.step == STEP_RAMIFIED:
        return TruncatedElement(x.field, x.ring, x.a, x.ring.uneg(x.b), x.shift)
    j = x.ring.d // 2
    return TruncatedElement(x.field, x.ring, x.ring.apply_automorphism(x.a, j), None, x.shift)


def tr_trace_step(x: TruncatedElement) -> TruncatedElement:
    return tr_add(x, tr_conj(x))


def tr_norm_step(x: TruncatedElement) -> TruncatedElement:
    return tr_mul(x, tr_conj(x))


def tr_trace_to_base(x: TruncatedElement) -> TruncatedElement:
    """Tr_{L/F}: sum over the Galois automorphisms fixing the base field F."""
    ring = x.ring
    f0 = x.field.base_f
    acc_a = ring.uzero()
    for j in range(0, ring.d, f0):
        acc_a = ring.uadd(acc_a, ring.apply_automorphism(x.a, j))
    if x.b is not None:
        acc_a = ring.uscale(acc_a, 2)  # t-parts of the two t-conjugates cancel
        return TruncatedElement(x.field, ring, acc_a, ring.uzero(), x.shift)
    return TruncatedElement(x.field, ring, acc_a, None, x.shift)
