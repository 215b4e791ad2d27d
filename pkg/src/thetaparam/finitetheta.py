"""Brute-force oracle for the rank-one finite theta correspondence.

For the dual pair (SL2(q), O(V)) with dim V = 2 and q in {3, 5} this module
builds the oscillator representation explicitly in the Schroedinger model
(functions on V, dimension q^2): the orthogonal group permutes V, the
upper unipotent n(b) acts by the quadratic character multiplication
psi(b Q(v)), and the Weyl element acts by the finite Fourier transform
whose scalar normalization is pinned by the group relations
(n(1) w)^3 = w^4 = 1 and then verified exhaustively.

Deligne-Lusztig characters of SL2(q) (discrete and principal series in
general position) and the induced characters of the dihedral groups
O(V+-)(q) are provided in closed form, cross-checked against numerically
computed character tables, and fed into multiplicity sums that verify the
rank-one theta pattern: a regular nonsplit-torus character lifts with
multiplicity one to the anisotropic pair and vanishes on the split pair.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .finitefield import (
    fq_make,
    fq_multiplicative_generator,
    fq_norm1_generator,
)


class NormalizationFailure(DomainError):
    pass


class NonIntegralMultiplicity(DomainError):
    pass


class VerificationFailure(DomainError):
    pass


MULT_TOL = 1e-6
MAT_TOL = 1e-8


def _psi(q):
    return lambda t: cmath.exp(2j * cmath.pi * (t % q) / q)


def _mat_key(m):
    return tuple(tuple(int(x) for x in row) for row in m)


def _matmul(a, b, q):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) % q for j in range(len(b[0])))
        for i in range(len(a))
    )


def _matvec(m, v, q):
    return tuple(sum(m[i][j] * v[j] for j in range(len(v))) % q for i in range(len(m)))


def _identity(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


# ---------------------------------------------------------------------------
# the two binary quadratic spaces and their isometry groups


@dataclass(frozen=True)
class BinarySpace:
    """V = F_q^2 with Q hyperbolic (variant '+') or the field norm form
    of F_{q^2} in the deterministic modulus basis (variant '-')."""

    q: int
    variant: str
    gram: tuple  # matrix of the polar form B(u, v) = Q(u+v) - Q(u) - Q(v)

    def quad(self, v) -> int:
        if self.variant == "+":
            return (v[0] * v[1]) % self.q
        g = self.gram
        return ((g[0][0] * v[0] * v[0] + g[1][1] * v[1] * v[1]) * pow(2, -1, self.q)
                + g[0][1] * v[0] * v[1]) % self.q

    def bilinear(self, u, v) -> int:
        g = self.gram
        return (
            g[0][0] * u[0] * v[0] + g[0][1] * (u[0] * v[1] + u[1] * v[0]) + g[1][1] * u[1] * v[1]
        ) % self.q

    def vectors(self):
        return [(a, b) for a in range(self.q) for b in range(self.q)]


def _binary_space(q: int, variant: str) -> BinarySpace:
    if variant == "+":
        return BinarySpace(q, "+", ((0, 1), (1, 0)))
    field = fq_make(q, 2)
    # Q(a + b x) = Nm(a + b x); polarize to get the Gram matrix over F_q
    def nm(a, b):
        z = field.element([a, b])
        w = z * z.frobenius()
        assert all(c == 0 for c in w.coeffs[1:])
        return w.coeffs[0]

    q11 = nm(1, 0)
    q22 = nm(0, 1)
    b12 = (nm(1, 1) - q11 - q22) % q
    gram = ((2 * q11 % q, b12), (b12, 2 * q22 % q))
    return BinarySpace(q, "-", gram)


@dataclass(frozen=True)
class FiniteDualPair:
    """SL2(q) paired with the isometry group of one binary quadratic space."""

    q: int
    variant: str
    space: BinarySpace
    sp_elements: tuple
    o_elements: tuple
    rotations: tuple  # o-element keys in the order of powers of the norm-one generator

    @property
    def rotation_order(self) -> int:
        return len(self.rotations)


def _sl2_elements(q: int):
    out = []
    for a in range(q):
        for b in range(q):
            for c in range(q):
                for d in range(q):
                    if (a * d - b * c) % q == 1:
                        out.append(((a, b), (c, d)))
    return out


def _orthogonal_elements(space: BinarySpace):
    q = space.q
    vecs = space.vectors()
    out = []
    for m in _sl2_candidates(q):
        if all(space.quad(_matvec(m, v, q)) == space.quad(v) for v in vecs):
            out.append(m)
    return out


def _sl2_candidates(q: int):
    for a in range(q):
        for b in range(q):
            for c in range(q):
                for d in range(q):
                    if (a * d - b * c) % q != 0:
                        yield ((a, b), (c, d))


def _rotation_list(space: BinarySpace):
    """Rotations indexed by powers of the canonical generator: for '-' the
    multiplications by the norm-one group of F_{q^2}, for '+' the maps
    diag(g0^j, g0^-j)."""
    q = space.q
    if space.variant == "-":
        base = fq_make(q, 1)
        g = fq_norm1_generator(base, 1)
        field = g.field
        order = q + 1
        mats = []
        cur = field.one()
        for _ in range(order):
            one_img = cur
            x_img = cur * field.gen()
            mats.append(((one_img.coeffs[0], x_img.coeffs[0]), (one_img.coeffs[1], x_img.coeffs[1])))
            cur = cur * g
        return mats
    g0 = fq_multiplicative_generator(fq_make(q, 1)).coeffs[0]
    order = q - 1
    mats = []
    a = 1
    for _ in range(order):
        mats.append(((a % q, 0), (0, pow(a, -1, q))))
        a = a * g0
    return mats


@lru_cache(maxsize=None)
def dual_pair(q: int, variant: str) -> FiniteDualPair:
    if q not in (3, 5):
        raise DomainError("the finite oracle is built for q in {3, 5}")
    if variant not in ("+", "-"):
        raise DomainError("variant must be '+' or '-'")
    space = _binary_space(q, variant)
    sp = tuple(_sl2_elements(q))
    o = tuple(_orthogonal_elements(space))
    expect = 2 * (q - 1) if variant == "+" else 2 * (q + 1)
    if len(sp) != q * (q * q - 1) or len(o) != expect:
        raise VerificationFailure("group orders are off")
    rotations = tuple(_rotation_list(space))
    rot_set = set(rotations)
    if not rot_set <= set(o) or len(rot_set) != expect // 2:
        raise VerificationFailure("rotation subgroup does not sit in O(V)")
    return FiniteDualPair(q, variant, space, sp, o, rotations)


# ---------------------------------------------------------------------------
# oscillator representation


@dataclass
class RepMatrixSet:
    """Matrices of the oscillator representation on functions on V.

    sp_mats and o_mats are keyed by the group elements; the two actions
    commute, and omega(g, h) = sp_mats[g] @ o_mats[h].
    """

    pair: FiniteDualPair
    dimension: int
    sp_mats: dict
    o_mats: dict
    o_perms: dict

    def omega(self, g, h):
        return self.sp_mats[g] @ self.o_mats[h]

    def pair_trace(self, g, h) -> complex:
        perm = self.o_perms[h]
        m = self.sp_mats[g]
        return complex(sum(m[i, perm[i]] for i in range(self.dimension)))


def _scalar_of(mat, dim) -> complex:
    lam = mat[0, 0]
    if np.max(np.abs(mat - lam * np.eye(dim))) > MAT_TOL:
        raise NormalizationFailure("matrix is not scalar where a relation demands it")
    return complex(lam)


def build_weil_rep(q: int, variant: str) -> RepMatrixSet:
    """Construct the oscillator representation for the pair (SL2(q), O(V)).

    The unipotent action is exact; the Fourier candidate for the Weyl
    element carries an unknown scalar c, pinned uniquely by
    (n(1) w)^3 = 1 and w^4 = 1 (as c = mu3 / mu4 for the measured scalar
    defects), after which the whole group is generated breadth-first with
    every Cayley collision checked, and commutation with the permutation
    action of O(V) is verified.
    """
    pair = dual_pair(q, variant)
    space = pair.space
    psi = _psi(q)
    vecs = space.vectors()
    dim = len(vecs)
    index = {v: i for i, v in enumerate(vecs)}

    def n_mat(b):
        return np.diag([psi(b * space.quad(v)) for v in vecs])

    fourier = np.array(
        [[psi(space.bilinear(v, u)) for u in vecs] for v in vecs], dtype=complex
    ) / q

    n1 = n_mat(1)
    mu3 = _scalar_of(np.linalg.matrix_power(n1 @ fourier, 3), dim)
    mu4 = _scalar_of(np.linalg.matrix_power(fourier, 4), dim)
    c = mu3 / mu4
    w_mat = c * fourier
    if (
        np.max(np.abs(np.linalg.matrix_power(n1 @ w_mat, 3) - np.eye(dim))) > MAT_TOL
        or np.max(np.abs(np.linalg.matrix_power(w_mat, 4) - np.eye(dim))) > MAT_TOL
    ):
        raise NormalizationFailure("relation normalization failed")

    w_key = ((0, 1), (q - 1, 0))
    gens = {w_key: w_mat}
    for b in range(1, q):
        gens[((1, b), (0, 1))] = n_mat(b)

    identity = _identity(2)
    sp_mats = {identity: np.eye(dim, dtype=complex)}
    frontier = [identity]
    while frontier:
        nxt = []
        for cur in frontier:
            for gk, gm in gens.items():
                new = _matmul(gk, cur, q)
                cand = gm @ sp_mats[cur]
                if new in sp_mats:
                    if np.max(np.abs(sp_mats[new] - cand)) > MAT_TOL:
                        raise NormalizationFailure("inconsistent Cayley collision")
                else:
                    sp_mats[new] = cand
                    nxt.append(new)
        frontier = nxt
    if len(sp_mats) != len(pair.sp_elements):
        raise NormalizationFailure("generators did not reach the whole group")

    o_mats = {}
    o_perms = {}
    for h in pair.o_elements:
        hinv = _mat_inverse(h, q)
        perm = [index[_matvec(hinv, v, q)] for v in vecs]
        mat = np.zeros((dim, dim), dtype=complex)
        for i, j in enumerate(perm):
            mat[i, j] = 1.0
        o_mats[h] = mat
        o_perms[h] = perm

    rep = RepMatrixSet(pair, dim, sp_mats, o_mats, o_perms)
    _check_commutation(rep)
    return rep


def _mat_inverse(m, q):
    n = len(m)
    if n == 2:
        det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) % q
        dinv = pow(det, -1, q)
        return (
            ((m[1][1] * dinv) % q, (-m[0][1] * dinv) % q),
            ((-m[1][0] * dinv) % q, (m[0][0] * dinv) % q),
        )
    # Gauss-Jordan over F_q
    aug = [[m[i][j] % q for j in range(n)] + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = pow(aug[col][col], -1, q)
        aug[col] = [(v * inv) % q for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [(aug[r][k] - f * aug[col][k]) % q for k in range(2 * n)]
    return tuple(tuple(aug[i][n + j] for j in range(n)) for i in range(n))


def _check_commutation(rep: RepMatrixSet):
    gens = [rep.pair.sp_elements[1], rep.pair.sp_elements[-1]]
    for g in gens:
        for h in rep.pair.o_elements:
            if np.max(np.abs(rep.sp_mats[g] @ rep.o_mats[h] - rep.o_mats[h] @ rep.sp_mats[g])) > MAT_TOL:
                raise NormalizationFailure("Sp and O actions do not commute")


# ---------------------------------------------------------------------------
# class functions


@dataclass
class ClassFunction:
    """A class function given by its values on every group element."""

    group: str  # 'sp' or 'o'
    values: dict
    label: str

    def degree(self) -> complex:
        key = next(k for k in self.values if _is_identity(k))
        return self.values[key]

    def inner(self, other: "ClassFunction") -> complex:
        n = len(self.values)
        return sum(self.values[k] * other.values[k].conjugate() for k in self.values) / n

    def close_to(self, other: "ClassFunction", tol=MULT_TOL) -> bool:
        return all(abs(self.values[k] - other.values[k]) < tol for k in self.values)


def _is_identity(key):
    n = len(key)
    return all(key[i][j] == (1 if i == j else 0) for i in range(n) for j in range(n))


def _legendre_int(a: int, q: int) -> int:
    a %= q
    if a == 0:
        return 0
    return 1 if pow(a, (q - 1) // 2, q) == 1 else -1


@lru_cache(maxsize=None)
def _sl2_class_keys(q: int):
    """Class label of every SL2(q) element.

    Labels: identity, minus, (unipot, sign, eps) for +-(unipotent) with the
    square class of the symplectic invariant <Nv, v>, (split, {x, 1/x}),
    (ell, trace)."""
    out = {}
    for g in _sl2_elements(q):
        (a, b), (c, d) = g
        tr = (a + d) % q
        if g == ((1, 0), (0, 1)):
            out[g] = ("id",)
        elif g == ((q - 1, 0), (0, q - 1)):
            out[g] = ("minus",)
        elif tr == 2 or tr == q - 2:
            sign = 1 if tr == 2 else -1
            h = g if sign == 1 else _matmul(((q - 1, 0), (0, q - 1)), g, q)
            nmat = ((h[0][0] - 1, h[0][1]), (h[1][0], h[1][1] - 1))
            v = (1, 0) if _matvec(nmat, (1, 0), q) != (0, 0) else (0, 1)
            nv = _matvec(nmat, v, q)
            inv = (nv[0] * v[1] - nv[1] * v[0]) % q
            out[g] = ("unipot", sign, _legendre_int(inv, q))
        elif _legendre_int((tr * tr - 4) % q, q) == 1:
            roots = [x for x in range(1, q) if (x * x - tr * x + 1) % q == 0]
            out[g] = ("split", frozenset(roots))
        else:
            out[g] = ("ell", tr)
    return out


def _nonsplit_trace_index(q: int):
    """For each elliptic trace t, the exponent j with y0^j + y0^{-j} = t,
    y0 the canonical norm-one generator of F_{q^2}."""
    base = fq_make(q, 1)
    y0 = fq_norm1_generator(base, 1)
    field = y0.field
    out = {}
    cur = field.one()
    for j in range(q + 1):
        tr = cur + cur.frobenius()
        assert all(c == 0 for c in tr.coeffs[1:])
        out.setdefault(tr.coeffs[0], j)
        cur = cur * y0
    return out


def dl_regular_character(q: int, torus: str, exponent: int) -> ClassFunction:
    """Deligne-Lusztig character of SL2(q) for a torus character in general
    position: discrete series of degree q - 1 for the nonsplit torus,
    principal series of degree q + 1 for the split torus."""
    keys = _sl2_class_keys(q)
    if torus == "nonsplit":
        n = q + 1
        if (2 * exponent) % n == 0:
            raise NotGeneralPositionFinite(f"exponent {exponent} mod {n} is not regular")
        zeta = cmath.exp(2j * cmath.pi / n)
        sign_z = (-1) ** (exponent % 2) if n % 2 == 0 else zeta ** (exponent * (n // 2))
        tr_index = _nonsplit_trace_index(q)
        values = {}
        for g, key in keys.items():
            if key == ("id",):
                values[g] = complex(q - 1)
            elif key == ("minus",):
                values[g] = sign_z * (q - 1)
            elif key[0] == "unipot":
                values[g] = complex(-1) if key[1] == 1 else -sign_z
            elif key[0] == "split":
                values[g] = 0j
            else:
                j = tr_index[key[1]]
                values[g] = -(zeta ** (exponent * j) + zeta ** (-exponent * j))
        return ClassFunction("sp", values, f"ds[{exponent}]")
    if torus == "split":
        n = q - 1
        if (2 * exponent) % n == 0:
            raise NotGeneralPositionFinite(f"exponent {exponent} mod {n} is not regular")
        zeta = cmath.exp(2j * cmath.pi / n)
        g0 = fq_multiplicative_generator(fq_make(q, 1)).coeffs[0]
        dlog = {pow(g0, j, q): j for j in range(n)}
        sign_z = zeta ** (exponent * (n // 2))
        values = {}
        for g, key in keys.items():
            if key == ("id",):
                values[g] = complex(q + 1)
            elif key == ("minus",):
                values[g] = sign_z * (q + 1)
            elif key[0] == "unipot":
                values[g] = complex(1) if key[1] == 1 else sign_z
            elif key[0] == "split":
                x = min(key[1])
                j = dlog[x]
                values[g] = zeta ** (exponent * j) + zeta ** (-exponent * j)
            else:
                values[g] = 0j
        return ClassFunction("sp", values, f"ps[{exponent}]")
    raise DomainError("torus must be 'split' or 'nonsplit'")


class NotGeneralPositionFinite(DomainError):
    pass


def _o2_decompose(pair: FiniteDualPair):
    """(rotation index, is_reflection) for every element of O(V); a
    reflection h is written as rotation * seed with a fixed seed."""
    rot_index = {m: j for j, m in enumerate(pair.rotations)}
    seed = _reflection_seed(pair)
    out = {}
    for h in pair.o_elements:
        if h in rot_index:
            out[h] = (rot_index[h], False)
            continue
        found = None
        for m, j in rot_index.items():
            if _matmul(m, seed, pair.q) == h:
                found = j
                break
        if found is None:
            raise VerificationFailure("element is neither rotation nor reflection")
        out[h] = (found, True)
    return out


@lru_cache(maxsize=None)
def _reflection_seed(pair: FiniteDualPair):
    rot = set(pair.rotations)
    for h in pair.o_elements:
        if h not in rot:
            return h
    raise VerificationFailure("no reflection found")


def o2_induced_character(pair: FiniteDualPair, exponent: int) -> ClassFunction:
    """Induction to O(V) of the rotation character of the given exponent;
    irreducible exactly when 2 * exponent != 0 mod the rotation order."""
    n = pair.rotation_order
    if (2 * exponent) % n == 0:
        raise NotGeneralPositionFinite(f"exponent {exponent} mod {n} does not induce irreducibly")
    zeta = cmath.exp(2j * cmath.pi / n)
    dec = _o2_decompose(pair)
    values = {}
    for h, (j, refl) in dec.items():
        values[h] = 0j if refl else zeta ** (exponent * j) + zeta ** (-exponent * j)
    return ClassFunction("o", values, f"ind[{exponent}]")


def o2_one_dimensionals(pair: FiniteDualPair):
    """The four linear characters of the dihedral O(V); the rotation order
    q -+ 1 is even here, so the rotation sign character exists."""
    n = pair.rotation_order
    if n % 2:
        raise VerificationFailure("rotation order should be even for odd q")
    dec = _o2_decompose(pair)
    out = []
    for rot_sign in (1, -1):
        for refl_sign in (1, -1):
            values = {
                h: complex(rot_sign**j * (refl_sign if refl else 1))
                for h, (j, refl) in dec.items()
            }
            out.append(ClassFunction("o", values, f"lin[{rot_sign},{refl_sign}]"))
    return out


def o2_irreducibles(pair: FiniteDualPair):
    """Complete list of irreducible characters of the dihedral group O(V)."""
    n = pair.rotation_order
    out = list(o2_one_dimensionals(pair))
    for k in range(1, (n + 1) // 2 + 1):
        if (2 * k) % n != 0:
            out.append(o2_induced_character(pair, k))
    # drop duplicates ind[k] = ind[n-k]
    seen = []
    uniq = []
    for ch in out:
        if not any(ch.close_to(prev) for prev in seen):
            seen.append(ch)
            uniq.append(ch)
    return uniq


def sl2_regular_exponents(q: int):
    n = q + 1
    return [k for k in range(1, n) if (2 * k) % n != 0]


# ---------------------------------------------------------------------------
# multiplicities


def theta_multiplicity(rep: RepMatrixSet, pi: ClassFunction, rho: ClassFunction) -> int:
    """Multiplicity of pi x rho in the oscillator representation:
    the normalized double character sum, with an integrality assertion."""
    total = 0j
    for g in rep.pair.sp_elements:
        cg = pi.values[g].conjugate()
        if abs(cg) < 1e-14:
            continue
        for h in rep.pair.o_elements:
            total += rep.pair_trace(g, h) * cg * rho.values[h].conjugate()
    total /= len(rep.pair.sp_elements) * len(rep.pair.o_elements)
    m = round(total.real)
    if abs(total - m) > MULT_TOL or m < 0:
        raise NonIntegralMultiplicity(f"<omega, {pi.label} x {rho.label}> = {total}")
    return m


def verify_finite_theta(q: int) -> dict:
    """Check the rank-one theta pattern for every regular nonsplit-torus
    character: multiplicity one with the single induced character of
    matching exponent on the anisotropic pair, zero with everything else
    there and with every irreducible of the split pair; and the inverse
    exponent yields the same character.  Returns the full report."""
    rep_minus = build_weil_rep(q, "-")
    rep_plus = build_weil_rep(q, "+")
    pair_minus = rep_minus.pair
    report = {"q": q, "characters": [], "ok": True}
    for k in sl2_regular_exponents(q):
        pi = dl_regular_character(q, "nonsplit", k)
        pi_inv = dl_regular_character(q, "nonsplit", (q + 1) - k)
        entry = {
            "exponent": k,
            "inverse_pair_identical": pi.close_to(pi_inv),
            "minus": [],
            "plus": [],
        }
        hits = []
        for rho in o2_irreducibles(pair_minus):
            m = theta_multiplicity(rep_minus, pi, rho)
            entry["minus"].append({"rho": rho.label, "multiplicity": m})
            if m:
                hits.append((rho, m))
        for rho in o2_irreducibles(rep_plus.pair):
            m = theta_multiplicity(rep_plus, pi, rho)
            entry["plus"].append({"rho": rho.label, "multiplicity": m})
            if m:
                entry.setdefault("unexpected_plus", []).append(rho.label)
        expected = o2_induced_character(pair_minus, k)
        entry["matched"] = (
            len(hits) == 1
            and hits[0][1] == 1
            and hits[0][0].close_to(expected)
        )
        if not entry["matched"] or entry.get("unexpected_plus") or not entry["inverse_pair_identical"]:
            report["ok"] = False
        report["characters"].append(entry)
    if not report["ok"]:
        raise VerificationFailure(f"finite theta pattern failed for q = {q}: {report}")
    return report


# ---------------------------------------------------------------------------
# numerical character tables (class-algebra eigenvectors) and group tools


def conjugacy_classes(elements, q):
    elems = list(elements)
    index = {e: i for i, e in enumerate(elems)}
    unassigned = set(elems)
    classes = []
    while unassigned:
        g = next(iter(unassigned))
        orbit = {
            _matmul(_matmul(x, g, q), _mat_inverse(x, q), q) for x in elems
        }
        classes.append(sorted(orbit, key=lambda e: index[e]))
        unassigned -= orbit
    classes.sort(key=lambda cl: (not _is_identity(cl[0]), len(cl), index[cl[0]]))
    return classes


def numerical_character_table(elements, q, seed: int = 1):
    """Irreducible characters of a small matrix group, via simultaneous
    eigenvectors of the class-sum multiplication matrices.  Returns
    (classes, list of per-element ClassFunction-style dicts)."""
    elems = list(elements)
    classes = conjugacy_classes(elems, q)
    ncl = len(classes)
    cls_of = {}
    for ci, cl in enumerate(classes):
        for e in cl:
            cls_of[e] = ci
    reps = [cl[0] for cl in classes]
    # class multiplication: T_i[j][k] = #{x in C_i : x * (y_k-ish)} with fixed
    # z_k representative: count pairs x in C_i, y in C_j with x y = z_k
    tables = np.zeros((ncl, ncl, ncl))
    for i, cl in enumerate(classes):
        for k, z in enumerate(reps):
            for x in cl:
                y = _matmul(_mat_inverse(x, q), z, q)
                tables[i, cls_of[y], k] += 1
    rng = np.random.default_rng(seed)
    for _ in range(8):
        coeffs = rng.standard_normal(ncl)
        m = sum(c * tables[i] for i, c in enumerate(coeffs))
        vals, vecs = np.linalg.eig(m)
        if np.min(np.abs(vals[:, None] - vals[None, :]) + np.eye(ncl)) > 1e-6:
            break
    else:
        raise VerificationFailure("could not split the class algebra")
    order = len(elems)
    sizes = np.array([len(cl) for cl in classes], dtype=float)
    chars = []
    for t in range(ncl):
        v = vecs[:, t]
        v = v / v[0]  # central character values omega_j, normalized at 1
        # chi_j = d * omega_j / |C_j| with d fixed by sum |C_j||chi_j|^2 = |G|
        norm = float(np.real(np.sum(v * np.conj(v) / sizes)))
        d = (order / norm) ** 0.5
        chi = d * v / sizes
        chars.append({reps[j]: complex(chi[j]) for j in range(ncl)})
    return classes, cls_of, chars


def decomposition_dimension_check(q: int, variant: str) -> bool:
    """Full decomposition accounting: sum over all irreducible pairs of
    multiplicity * deg(pi) * deg(rho) equals q^2."""
    rep = build_weil_rep(q, variant)
    pair = rep.pair
    cls_sp, cls_of_sp, chars_sp = numerical_character_table(pair.sp_elements, q)
    cls_o, cls_of_o, chars_o = numerical_character_table(pair.o_elements, q)
    total = 0
    for chi_sp in chars_sp:
        pi = ClassFunction("sp", {g: chi_sp[cls_sp[cls_of_sp[g]][0]] for g in pair.sp_elements}, "num")
        for chi_o in chars_o:
            rho = ClassFunction("o", {h: chi_o[cls_o[cls_of_o[h]][0]] for h in pair.o_elements}, "num")
            m = theta_multiplicity(rep, pi, rho)
            total += m * round(abs(pi.degree())) * round(abs(rho.degree()))
    return total == q * q


# ---------------------------------------------------------------------------
# Weyl-group form validation by brute-force normalizers


def _mulclose(gens, q, limit=10**7):
    seen = {_identity(len(gens[0]))}
    frontier = list(seen)
    while frontier:
        nxt = []
        for cur in frontier:
            for g in gens:
                new = _matmul(g, cur, q)
                if new not in seen:
                    seen.add(new)
                    nxt.append(new)
        frontier = nxt
        if len(seen) > limit:
            raise VerificationFailure("closure exceeded the size limit")
    return seen


def torus_normalizer_order(group, torus_elements, q) -> int:
    tset = set(torus_elements)
    gen = torus_elements[1]
    count = 0
    for g in group:
        gi = _mat_inverse(g, q)
        if _matmul(_matmul(g, gen, q), gi, q) in tset:
            count += 1
    return count


def normalizer_exponent_actions(group, torus_elements, q):
    """The exponent maps j -> a*j induced on the cyclic torus by its
    normalizer, as a set of multipliers a mod the torus order."""
    tset = {t: j for j, t in enumerate(torus_elements)}
    n = len(torus_elements)
    gen = torus_elements[1]
    actions = set()
    for g in group:
        gi = _mat_inverse(g, q)
        img = _matmul(_matmul(g, gen, q), gi, q)
        if img in tset:
            actions.add(tset[img] % n)
    return actions


def validate_weyl_form_rank1(q: int) -> dict:
    """In SL2(q) and both O(V)(q): the normalizer of the nonsplit torus has
    index-two image (order 2m with m = 1), acting by the signed Frobenius
    powers {1, q} on exponents."""
    out = {}
    pair = dual_pair(q, "-")
    sp = set(pair.sp_elements)
    rot = list(pair.rotations)
    n_order = torus_normalizer_order(sp, rot, q)
    actions = normalizer_exponent_actions(sp, rot, q)
    out["sl2"] = {
        "weyl_order": n_order // len(rot),
        "actions": sorted(actions),
        "expected_actions": sorted({1 % (q + 1), q % (q + 1)}),
    }
    o = set(pair.o_elements)
    n_order_o = torus_normalizer_order(o, rot, q)
    actions_o = normalizer_exponent_actions(o, rot, q)
    out["o2"] = {
        "weyl_order": n_order_o // len(rot),
        "actions": sorted(actions_o),
        "expected_actions": sorted({1 % (q + 1), q % (q + 1)}),
    }
    ok = (
        out["sl2"]["weyl_order"] == 2
        and out["o2"]["weyl_order"] == 2
        and out["sl2"]["actions"] == out["sl2"]["expected_actions"]
        and out["o2"]["actions"] == out["o2"]["expected_actions"]
    )
    out["ok"] = ok
    if not ok:
        raise VerificationFailure(f"rank-one Weyl validation failed: {out}")
    return out


def _torus_matrices_in_sp4(q: int):
    """The elliptic torus of Sp4(q) with m = 2: the norm-one group of
    F_{q^4} over F_{q^2} acting by multiplication on F_{q^4} with the
    symplectic form Tr(c x conj(y)), c trace-zero."""
    base = fq_make(q, 1)
    big = fq_make(q, 4)
    g = fq_norm1_generator(base, 2)
    # basis 1, x, x^2, x^3 of F_{q^4}; c with c^{q^2} = -c
    x = big.gen()
    basis = [big.one(), x, x * x, x * x * x]
    cand = None
    for e in big.elements():
        if not e.is_zero() and e ** (q * q) == -e:
            cand = e
            break
    c = cand

    def tr_to_base(z):
        acc = big.zero()
        cur = z
        for _ in range(4):
            acc = acc + cur
            cur = cur.frobenius()
        assert all(co == 0 for co in acc.coeffs[1:])
        return acc.coeffs[0]

    gram = [[tr_to_base(c * basis[i] * (basis[j] ** (q * q))) for j in range(4)] for i in range(4)]

    def mult_matrix(y):
        cols = []
        for b in basis:
            prod = y * b
            cols.append(list(prod.coeffs))
        return tuple(tuple(cols[j][i] % q for j in range(4)) for i in range(4))

    torus = []
    cur = big.one()
    order = q * q + 1
    for _ in range(order):
        torus.append(mult_matrix(cur))
        cur = cur * g
    return torus, gram


def _sp4_group(q: int, gram):
    """Sp4(q) by closure from symplectic transvections x -> x + <x, v> v."""
    def form(u, v):
        return sum(gram[i][j] * u[i] * v[j] for i in range(4) for j in range(4)) % q

    gens = []
    seeds = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1), (1, 1, 0, 0), (0, 1, 1, 1)]
    for v in seeds:
        cols = []
        for k in range(4):
            e = tuple(1 if i == k else 0 for i in range(4))
            w = tuple((e[i] + form(e, v) * v[i]) % q for i in range(4))
            cols.append(w)
        gens.append(tuple(tuple(cols[j][i] for j in range(4)) for i in range(4)))
    return _mulclose(gens, q)


def validate_weyl_form_rank2(q: int = 3) -> dict:
    """Brute-force normalizer of the m = 2 elliptic torus inside Sp4(q):
    the relative Weyl group is cyclic of order 4, acting on exponents by
    powers of q mod q^2 + 1."""
    torus, gram = _torus_matrices_in_sp4(q)
    group = _sp4_group(q, gram)
    expected_order = q**4 * (q**2 - 1) * (q**4 - 1)
    if len(group) != expected_order:
        raise VerificationFailure(f"|Sp4({q})| = {len(group)} != {expected_order}")
    if not set(torus) <= group:
        raise VerificationFailure("the torus does not sit inside the generated group")
    n = len(torus)
    n_order = torus_normalizer_order(group, torus, q)
    actions = normalizer_exponent_actions(group, torus, q)
    expected = sorted({pow(q, j, n) for j in range(4)})
    out = {
        "group_order": len(group),
        "weyl_order": n_order // n,
        "actions": sorted(actions),
        "expected_actions": expected,
        "ok": n_order // n == 4 and sorted(actions) == expected,
    }
    if not out["ok"]:
        raise VerificationFailure(f"rank-two Weyl validation failed: {out}")
    return out
