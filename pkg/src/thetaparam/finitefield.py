"""Exact arithmetic in small finite fields F_{p^f}, p odd.

Fields are represented as F_p[x]/(modulus) with a deterministic modulus:
monic polynomials are enumerated in lexicographic coefficient order
(constant coefficient varies fastest) and the first irreducible one is
taken, so the same (p, f) always yields the same field on every run.

Elements are coefficient vectors of length f.  The module also provides
embeddings between fields of compatible degree, quadratic residue tests,
square roots (Tonelli-Shanks with a deterministic non-residue), and
generators of norm-one subgroups of quadratic extensions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import DomainError

DEFAULT_SIZE_BOUND = 10**6


class NotPrime(DomainError):
    pass


class DegreeTooLarge(DomainError):
    pass


class ZeroInput(DomainError):
    pass


class DividesInput(DomainError):
    pass


class FieldTooLarge(DomainError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


# ---------------------------------------------------------------------------
# polynomial helpers over F_p (coefficient tuples, constant term first)

def _poly_trim(c):
    i = len(c)
    while i > 0 and c[i - 1] == 0:
        i -= 1
    return tuple(c[:i])


def _poly_mul(a, b, p):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_trim(out)


def _poly_mod(a, m, p):
    # m monic
    a = list(a)
    dm = len(m) - 1
    while len(a) - 1 >= dm and len(a) > 0:
        lead = a[-1]
        if lead:
            shift = len(a) - 1 - dm
            for i in range(dm):
                a[shift + i] = (a[shift + i] - lead * m[i]) % p
        a.pop()
    return _poly_trim(a)


def _poly_powmod(a, e, m, p):
    result = (1,)
    base = _poly_mod(a, m, p)
    while e > 0:
        if e & 1:
            result = _poly_mod(_poly_mul(result, base, p), m, p)
        base = _poly_mod(_poly_mul(base, base, p), m, p)
        e >>= 1
    return result


def _poly_sub(a, b, p):
    n = max(len(a), len(b))
    out = [0] * n
    for i in range(n):
        ai = a[i] if i < len(a) else 0
        bi = b[i] if i < len(b) else 0
        out[i] = (ai - bi) % p
    return _poly_trim(out)


def _poly_gcd(a, b, p):
    a, b = _poly_trim(a), _poly_trim(b)
    while b:
        # make b monic before reducing
        inv = pow(b[-1], p - 2, p)
        bm = tuple((c * inv) % p for c in b)
        a, b = b, _poly_mod(a, bm, p)
    return a


def _prime_factors(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def _is_irreducible(modulus, p):
    """Rabin test: x^{p^f} = x mod m and gcd(x^{p^{f/l}} - x, m) = 1 for prime l | f."""
    f = len(modulus) - 1
    if f == 1:
        return True
    x = (0, 1)
    xq = _poly_powmod(x, p**f, modulus, p)
    if _poly_sub(xq, x, p):
        return False
    for ell in _prime_factors(f):
        d = f // ell
        xd = _poly_powmod(x, p**d, modulus, p)
        g = _poly_gcd(_poly_sub(xd, x, p), modulus, p)
        if len(g) - 1 != 0:
            return False
    return True


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FqDescriptor:
    """A finite field F_{p^f} with its deterministic defining modulus."""

    p: int
    f: int
    modulus: tuple  # monic, length f+1, constant coefficient first

    @property
    def order(self) -> int:
        return self.p**self.f

    def element(self, coeffs) -> "FqElement":
        c = list(coeffs)[: self.f] + [0] * max(0, self.f - len(coeffs))
        return FqElement(self, tuple(x % self.p for x in c))

    def zero(self) -> "FqElement":
        return self.element([])

    def one(self) -> "FqElement":
        return self.element([1])

    def from_int(self, n: int) -> "FqElement":
        """Image of the integer n under Z -> F_p -> F_{p^f}."""
        return self.element([n % self.p])

    def gen(self) -> "FqElement":
        """The class of x (for f = 1 this is the class of 0)."""
        if self.f == 1:
            return self.zero()
        return self.element([0, 1])

    def elements(self):
        """All p^f elements in lexicographic coefficient order (c0 fastest)."""
        n = self.order
        for k in range(n):
            coeffs = []
            m = k
            for _ in range(self.f):
                coeffs.append(m % self.p)
                m //= self.p
            yield self.element(coeffs)

    def __repr__(self):
        return f"F_{self.p}^{self.f}"


@lru_cache(maxsize=None)
def fq_make(p: int, f: int, bound: int = DEFAULT_SIZE_BOUND) -> FqDescriptor:
    """Create the deterministic descriptor of F_{p^f}; p odd prime, p^f <= bound."""
    if not is_prime(p) or p == 2:
        raise NotPrime(f"p = {p} is not an odd prime")
    if f < 1 or p**f > bound:
        raise DegreeTooLarge(f"p^f = {p}**{f} exceeds bound {bound}")
    for k in range(p**f):
        coeffs = []
        m = k
        for _ in range(f):
            coeffs.append(m % p)
            m //= p
        modulus = tuple(coeffs) + (1,)
        if _is_irreducible(modulus, p):
            return FqDescriptor(p, f, modulus)
    raise DegreeTooLarge("no irreducible modulus found")  # unreachable


@dataclass(frozen=True)
class FqElement:
    field: FqDescriptor
    coeffs: tuple

    def __post_init__(self):
        assert len(self.coeffs) == self.field.f

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __add__(self, other):
        self._check(other)
        p = self.field.p
        return FqElement(self.field, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        self._check(other)
        p = self.field.p
        return FqElement(self.field, tuple((a - b) % p for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        p = self.field.p
        return FqElement(self.field, tuple((-a) % p for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, int):
            p = self.field.p
            return FqElement(self.field, tuple((a * other) % p for a in self.coeffs))
        self._check(other)
        prod = _poly_mul(self.coeffs, other.coeffs, self.field.p)
        red = _poly_mod(prod, self.field.modulus, self.field.p)
        return self.field.element(red)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        red = _poly_powmod(self.coeffs, e, self.field.modulus, self.field.p)
        return self.field.element(red)

    def inverse(self):
        if self.is_zero():
            raise ZeroInput("inverse of zero")
        return self ** (self.field.order - 2)

    def __truediv__(self, other):
        return self * other.inverse()

    def frobenius(self, j: int = 1):
        """x -> x^{p^j}."""
        return self ** (self.field.p ** (j % self.field.f) if self.field.f > 1 else 1)

    def multiplicative_order(self) -> int:
        if self.is_zero():
            raise ZeroInput("order of zero")
        n = self.field.order - 1
        order = n
        for ell in _prime_factors(n):
            while order % ell == 0 and (self ** (order // ell)) == self.field.one():
                order //= ell
        return order

    def _check(self, other):
        if self.field != other.field:
            raise DomainError("elements of different fields")

    def __repr__(self):
        return f"{list(self.coeffs)} in {self.field}"


def fq_is_square(x: FqElement) -> bool:
    """True iff x is a nonzero square; x^{(q-1)/2} = 1 test (q odd)."""
    if x.is_zero():
        raise ZeroInput("square test of zero")
    q = x.field.order
    return x ** ((q - 1) // 2) == x.field.one()


def fq_legendre(a: int, p: int) -> int:
    """Legendre symbol of the integer a mod the odd prime p; +1 iff square."""
    if not is_prime(p) or p == 2:
        raise NotPrime(f"p = {p} is not an odd prime")
    if a % p == 0:
        raise DividesInput(f"{p} divides {a}")
    return 1 if pow(a % p, (p - 1) // 2, p) == 1 else -1


def fq_legendre_element(x: FqElement) -> int:
    """+1 / -1 according to fq_is_square."""
    return 1 if fq_is_square(x) else -1


@lru_cache(maxsize=None)
def fq_multiplicative_generator(field: FqDescriptor) -> FqElement:
    """First element (coefficient-lex order) of multiplicative order q - 1."""
    n = field.order - 1
    primes = _prime_factors(n)
    for x in field.elements():
        if x.is_zero():
            continue
        if all((x ** (n // ell)) != field.one() for ell in primes):
            return x
    raise DomainError("no generator found")  # unreachable


def fq_norm1_generator(q_desc: FqDescriptor, m: int, bound: int = DEFAULT_SIZE_BOUND) -> FqElement:
    """Generator of ker(Nm: F_{q^{2m}}^x -> F_{q^m}^x), cyclic of order q^m + 1.

    Returns z^{q^m - 1} for the canonical multiplicative generator z of
    F_{q^{2m}}.  q_desc describes the base field F_q.
    """
    q = q_desc.order
    if q ** (2 * m) > bound:
        raise FieldTooLarge(f"F_{q}^{2 * m} exceeds bound {bound}")
    big = fq_make(q_desc.p, q_desc.f * 2 * m, bound)
    z = fq_multiplicative_generator(big)
    return z ** (q**m - 1)


@lru_cache(maxsize=None)
def fq_canonical_nonsquare(field: FqDescriptor) -> FqElement:
    """First non-square in coefficient-lex order."""
    for x in field.elements():
        if not x.is_zero() and not fq_is_square(x):
            return x
    raise DomainError("no nonsquare found")  # unreachable


def fq_sqrt(x: FqElement) -> FqElement:
    """A square root of x (Tonelli-Shanks with the canonical non-residue)."""
    if x.is_zero():
        return x
    if not fq_is_square(x):
        raise DomainError("element is not a square")
    field = x.field
    q = field.order
    if q % 4 == 3:
        return x ** ((q + 1) // 4)
    # q - 1 = 2^s * t, t odd
    t, s = q - 1, 0
    while t % 2 == 0:
        t //= 2
        s += 1
    z = fq_canonical_nonsquare(field) ** t
    r = x ** ((t + 1) // 2)
    w = x**t
    while w != field.one():
        # find least k with w^{2^k} = 1
        k, wk = 0, w
        while wk != field.one():
            wk = wk * wk
            k += 1
        b = z
        for _ in range(s - k - 1):
            b = b * b
        r = r * b
        w = w * b * b
        z = b * b
        s = k
    return r


# ---------------------------------------------------------------------------
# embeddings


@dataclass(frozen=True)
class FqEmbedding:
    """A ring embedding F_{p^a} -> F_{p^b} (a | b), via the image of x."""

    source: FqDescriptor
    target: FqDescriptor
    image_of_generator: FqElement

    def apply(self, x: FqElement) -> FqElement:
        if x.field != self.source:
            raise DomainError("element not in the source field")
        acc = self.target.zero()
        power = self.target.one()
        for c in x.coeffs:
            if c:
                acc = acc + c * power
            power = power * self.image_of_generator
        return acc

    def pullback(self, y: FqElement) -> FqElement:
        """Inverse on the image; raises if y is not in the embedded subfield."""
        if y.field != self.target:
            raise DomainError("element not in the target field")
        p = self.source.p
        a, b = self.source.f, self.target.f
        # columns: images of the source power basis, as F_p-vectors of length b
        cols = []
        power = self.target.one()
        for _ in range(a):
            cols.append(list(power.coeffs))
            power = power * self.image_of_generator
        sol = _solve_mod_p(cols, list(y.coeffs), p, b, a)
        if sol is None:
            raise DomainError("element is not in the embedded subfield")
        return self.source.element(sol)


def _solve_mod_p(cols, rhs, p, nrows, ncols):
    # solve sum_j sol[j] * cols[j] = rhs over F_p; None if inconsistent
    aug = [[cols[j][i] % p for j in range(ncols)] + [rhs[i] % p] for i in range(nrows)]
    pivots = []
    row = 0
    for col in range(ncols):
        piv = next((r for r in range(row, nrows) if aug[r][col]), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = pow(aug[row][col], p - 2, p)
        aug[row] = [(v * inv) % p for v in aug[row]]
        for r in range(nrows):
            if r != row and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [(aug[r][k] - factor * aug[row][k]) % p for k in range(ncols + 1)]
        pivots.append(col)
        row += 1
    for r in range(row, nrows):
        if aug[r][ncols]:
            return None
    sol = [0] * ncols
    for r, col in enumerate(pivots):
        sol[col] = aug[r][ncols]
    return sol


@lru_cache(maxsize=None)
def fq_embedding(source: FqDescriptor, target: FqDescriptor) -> FqEmbedding:
    """Deterministic embedding F_{p^a} -> F_{p^b}.

    The subfield {z : z^{p^a} = z} of the target is computed by linear
    algebra over F_p; its elements (at most p^a of them) are scanned in a
    deterministic order for a root of the source modulus.
    """
    if source.p != target.p or target.f % source.f != 0:
        raise DomainError("no embedding: incompatible fields")
    if source == target:
        return FqEmbedding(source, target, target.gen())
    p, a, b = source.p, source.f, target.f
    # matrix of Frobenius^a - id on the power basis of the target
    xp = target.gen() ** (p**a)
    cols = []
    power = target.one()
    for k in range(b):
        shifted = list(power.coeffs)
        shifted[k] = (shifted[k] - 1) % p
        cols.append(shifted)
        power = power * xp
    kernel = _kernel_mod_p([[cols[j][i] for j in range(b)] for i in range(b)], p, b, b)
    # scan F_p-combinations of the kernel basis for a root of the source modulus
    dim = len(kernel)
    assert dim == a
    for k in range(p**dim):
        coeffs = []
        m = k
        for _ in range(dim):
            coeffs.append(m % p)
            m //= p
        cand = target.element(
            [sum(coeffs[j] * kernel[j][i] for j in range(dim)) % p for i in range(b)]
        )
        # evaluate source modulus at cand
        acc = target.zero()
        power = target.one()
        for c in source.modulus:
            if c:
                acc = acc + c * power
            power = power * cand
        if acc.is_zero():
            emb = FqEmbedding(source, target, cand)
            return emb
    raise DomainError("embedding root not found")  # unreachable


def _kernel_mod_p(matrix, p, nrows, ncols):
    # kernel basis (list of length-ncols vectors) of matrix over F_p
    aug = [row[:] for row in matrix]
    pivots = {}
    row = 0
    for col in range(ncols):
        piv = next((r for r in range(row, nrows) if aug[r][col]), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = pow(aug[row][col], p - 2, p)
        aug[row] = [(v * inv) % p for v in aug[row]]
        for r in range(nrows):
            if r != row and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [(aug[r][k] - factor * aug[row][k]) % p for k in range(ncols)]
        pivots[col] = row
        row += 1
    basis = []
    free = [c for c in range(ncols) if c not in pivots]
    for fc in free:
        vec = [0] * ncols
        vec[fc] = 1
        for col, r in pivots.items():
            vec[col] = (-aug[r][fc]) % p
        basis.append(vec)
    return basis
