"""Graded phase-space algebra with jet coefficients.

Elements are polynomials in the commuting momenta ``Pi_M`` and the
anticommuting flat-frame generators ``psi^A`` whose coefficients are jets in
the coordinates.  The graded Poisson bracket is fixed by

    {Pi_M, x^N} = delta_M^N,    {psi^A, psi^B} = i delta^{AB},

all other elementary brackets vanishing.  Written with derivatives,

    {a, b} = sum_M (d a/d Pi_M  d b/d x^M - d a/d x^M  d b/d Pi_M)
             + i sum_A (a <-d/d psi^A)(d/d psi^A -> b)

with a right Grassmann derivative on ``a`` and a left one on ``b``.  Curved
fermions ``psi^M = e^M_A psi^A`` are composite elements, so ``{psi^M, psi^N}
= i g^{MN}`` follows from the vielbein.

Debug text form (:meth:`SuperElement.to_text`): one term per line,

    (re+imj) * Pi_1^2 * Pi_3 * psi[1,2,4]

where the complex number is the coefficient's value at the base point, momenta
and generators are 1-based, the momentum part is omitted when trivial and a
pure-momentum term has no ``psi[...]`` factor.  Lines are sorted by momentum
degree, momentum exponents, Grassmann degree, then generator indices.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import MismatchedJets
from .jets import JetScalar, jet_space

# physical charges are linear in momenta and their brackets quadratic
MAX_MOMENTUM_DEGREE = 2


@lru_cache(maxsize=1 << 16)
def merge_monomials(a, b):
    """Product of two sorted Grassmann monomials: ``(sorted indices, sign)``.

    ``sign`` is 0 when an index repeats.
    """
    if not a:
        return b, 1
    if not b:
        return a, 1
    if set(a) & set(b):
        return (), 0
    inversions = sum(1 for x in a for y in b if x > y)
    return tuple(sorted(a + b)), (-1 if inversions & 1 else 1)


def canonical_monomial(indices):
    """Sort an index sequence, returning ``(sorted, sign)``; sign 0 on repeats."""
    indices = tuple(indices)
    if len(set(indices)) != len(indices):
        return (), 0
    sign = 1
    for i in range(len(indices)):
        for j in range(i + 1, len(indices)):
            if indices[i] > indices[j]:
                sign = -sign
    return tuple(sorted(indices)), sign


@lru_cache(maxsize=1 << 16)
def _merge_keys(ka, kb):
    grass, sign = merge_monomials(ka[1], kb[1])
    if not sign:
        return None, 0
    mom = tuple(x + y for x, y in zip(ka[0], kb[0]))
    return (mom, grass), sign


class SuperElement:
    """Immutable graded phase-space polynomial at a fixed base point.

    Terms are stored as parallel ``keys`` and ``coeffs``: each key is a pair
    ``(momentum exponents, sorted generator indices)`` (0-based) and each row
    of ``coeffs`` is the jet coefficient array of that term.
    """

    __slots__ = ("base_point", "order", "n_fermions", "keys", "coeffs")

    def __init__(self, base_point, order, n_fermions, keys, coeffs):
        base_point = np.asarray(base_point, dtype=float)
        sp = jet_space(len(base_point), order)
        coeffs = np.asarray(coeffs, dtype=complex).reshape(len(keys), sp.size)
        keys = tuple(keys)
        for mom, grass in keys:
            if grass and grass[-1] >= n_fermions:
                raise ValueError(f"generator index {grass[-1]} out of range")
        coeffs.setflags(write=False)
        object.__setattr__(self, "base_point", base_point)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "n_fermions", n_fermions)
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("SuperElement is immutable")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_entries(cls, base_point, order, n_fermions, entries):
        """Sum of ``(momentum exponents, generator indices, coeff)`` entries.

        Generator indices may be unsorted or repeated; they are put in
        canonical order with the permutation sign.  ``coeff`` is a jet array
        of at least the given order, a :class:`JetScalar` or a number.
        """
        sp = jet_space(len(base_point), order)
        acc = {}
        for mom, gens, coeff in entries:
            grass, sign = canonical_monomial(gens)
            if not sign:
                continue
            if isinstance(coeff, JetScalar):
                coeff = coeff.coeffs
            if np.isscalar(coeff):
                row = sp.constant(coeff)
            else:
                row = np.asarray(coeff, dtype=complex)[: sp.size]
            key = (tuple(mom), grass)
            if key in acc:
                acc[key] = acc[key] + sign * row
            else:
                acc[key] = sign * row
        return cls._from_dict(base_point, order, n_fermions, acc)

    @classmethod
    def _from_dict(cls, base_point, order, n_fermions, acc):
        keys = [k for k, v in acc.items() if np.any(v != 0)]
        sp = jet_space(len(base_point), order)
        coeffs = np.array([acc[k] for k in keys]) if keys else np.zeros((0, sp.size))
        return cls(base_point, order, n_fermions, keys, coeffs)

    @classmethod
    def zero(cls, base_point, order, n_fermions):
        return cls(base_point, order, n_fermions, (), np.zeros((0, 1)))

    @classmethod
    def scalar(cls, value, base_point, order, n_fermions):
        """Element with no momenta or generators: a number, jet array or JetScalar."""
        D = len(base_point)
        return cls.from_entries(base_point, order, n_fermions, [((0,) * D, (), value)])

    @classmethod
    def momentum(cls, m, base_point, order, n_fermions):
        D = len(base_point)
        mom = tuple(1 if i == m else 0 for i in range(D))
        return cls.from_entries(base_point, order, n_fermions, [(mom, (), 1.0)])

    @classmethod
    def coordinate(cls, m, base_point, order, n_fermions):
        sp = jet_space(len(base_point), order)
        jet = sp.variable(np.asarray(base_point, dtype=float), m)
        return cls.scalar(jet, base_point, order, n_fermions)

    @classmethod
    def generator(cls, a, base_point, order, n_fermions):
        D = len(base_point)
        return cls.from_entries(base_point, order, n_fermions, [((0,) * D, (a,), 1.0)])

    # -- inspection -------------------------------------------------------

    @property
    def dim(self):
        return len(self.base_point)

    @property
    def space(self):
        return jet_space(self.dim, self.order)

    def __len__(self):
        return len(self.keys)

    def terms(self):
        """Mapping key -> JetScalar."""
        return {
            k: JetScalar(self.base_point, self.order, row)
            for k, row in zip(self.keys, self.coeffs)
        }

    def coefficient(self, mom, grass):
        """Coefficient jet array of one term (zeros if absent)."""
        key = (tuple(mom), tuple(grass))
        for k, row in zip(self.keys, self.coeffs):
            if k == key:
                return row
        return self.space.zeros()

    def constant_terms(self):
        """Mapping key -> complex value at the base point."""
        return {k: complex(row[0]) for k, row in zip(self.keys, self.coeffs)}

    @property
    def parity(self):
        """``'even'``, ``'odd'``, ``'mixed'`` or ``'zero'`` for the empty element."""
        degrees = {len(g) % 2 for _, g in self.keys}
        if not degrees:
            return "zero"
        if degrees == {0}:
            return "even"
        if degrees == {1}:
            return "odd"
        return "mixed"

    @property
    def momentum_degree(self):
        return max((sum(m) for m, _ in self.keys), default=0)

    @property
    def grassmann_degree(self):
        return max((len(g) for _, g in self.keys), default=0)

    # -- compatibility ------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, SuperElement):
            raise TypeError(f"expected SuperElement, got {type(other).__name__}")
        if self.dim != other.dim or not np.array_equal(self.base_point, other.base_point):
            raise MismatchedJets("elements have different base points")
        if self.n_fermions != other.n_fermions:
            raise MismatchedJets("elements have different generator counts")

    def truncate(self, order):
        if order == self.order:
            return self
        return SuperElement(
            self.base_point, order, self.n_fermions, self.keys,
            self.space.truncate(self.coeffs, order),
        )

    # -- linear structure ---------------------------------------------------

    def _combine(self, other, sign):
        self._check(other)
        order = min(self.order, other.order)
        size = jet_space(self.dim, order).size
        acc = {k: row[:size].copy() for k, row in zip(self.keys, self.coeffs)}
        for k, row in zip(other.keys, other.coeffs):
            if k in acc:
                acc[k] = acc[k] + sign * row[:size]
            else:
                acc[k] = sign * row[:size]
        return SuperElement._from_dict(self.base_point, order, self.n_fermions, acc)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return SuperElement(self.base_point, self.order, self.n_fermions, self.keys, -self.coeffs)

    def scale(self, c):
        return SuperElement(self.base_point, self.order, self.n_fermions, self.keys, c * self.coeffs)

    def __mul__(self, other):
        if isinstance(other, SuperElement):
            return super_mul(self, other)
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(1 / other)
        return NotImplemented

    # -- text -------------------------------------------------------------

    def to_text(self, tol=0.0):
        """Debug serialization; see the module docstring for the format."""

        def sort_key(k):
            mom, grass = k
            return (sum(mom), tuple(-e for e in mom), len(grass), grass)

        lines = []
        for key in sorted(self.keys, key=sort_key):
            c = self.constant_terms()[key]
            if abs(c) <= tol:
                continue
            mom, grass = key
            parts = [f"({c.real:.12g}{c.imag:+.12g}j)"]
            for m, e in enumerate(mom):
                if e:
                    parts.append(f"Pi_{m + 1}" + (f"^{e}" if e > 1 else ""))
            if grass:
                parts.append("psi[" + ",".join(str(a + 1) for a in grass) + "]")
            lines.append(" * ".join(parts))
        return "\n".join(lines)

    def __repr__(self):
        return (
            f"SuperElement(terms={len(self)}, parity={self.parity}, order={self.order}, "
            f"at={self.base_point.tolist()})"
        )


# ---------------------------------------------------------------------------
# products and derivatives
# ---------------------------------------------------------------------------

def super_mul(a, b):
    """Graded product ``a b``; generators are reordered with their sign."""
    a._check(b)
    order = min(a.order, b.order)
    sp = jet_space(a.dim, order)
    if not a.keys or not b.keys:
        return SuperElement.zero(a.base_point, order, a.n_fermions)
    rows_a, rows_b, signs, targets = [], [], [], []
    index = {}
    keys = []
    for i, ka in enumerate(a.keys):
        for j, kb in enumerate(b.keys):
            key, sign = _merge_keys(ka, kb)
            if not sign:
                continue
            t = index.get(key)
            if t is None:
                t = index[key] = len(keys)
                keys.append(key)
            rows_a.append(i)
            rows_b.append(j)
            signs.append(sign)
            targets.append(t)
    if not keys:
        return SuperElement.zero(a.base_point, order, a.n_fermions)
    A = a.coeffs[rows_a, : sp.size]
    B = b.coeffs[rows_b, : sp.size]
    prods = sp.mul(A, B) * np.asarray(signs)[:, None]
    out = np.zeros((len(keys), sp.size), dtype=complex)
    np.add.at(out, np.asarray(targets), prods)
    keep = np.any(out != 0, axis=1)
    keys = [k for k, kk in zip(keys, keep) if kk]
    return SuperElement(a.base_point, order, a.n_fermions, keys, out[keep])


def _relabel(a, new_keys, factors, order=None, coeffs=None):
    coeffs = a.coeffs if coeffs is None else coeffs
    order = a.order if order is None else order
    acc = {}
    for key, f, row in zip(new_keys, factors, coeffs):
        if key is None or not f:
            continue
        acc[key] = acc[key] + f * row if key in acc else f * row
    return SuperElement._from_dict(a.base_point, order, a.n_fermions, acc)


def d_momentum(a, m):
    """``d a / d Pi_m``."""
    keys, facs = [], []
    for mom, grass in a.keys:
        e = mom[m]
        if e:
            keys.append((mom[:m] + (e - 1,) + mom[m + 1:], grass))
            facs.append(e)
        else:
            keys.append(None)
            facs.append(0)
    return _relabel(a, keys, facs)


def d_coordinate(a, m):
    """``d a / d x^m``; lowers the jet order by one."""
    sp = a.space
    return SuperElement(
        a.base_point, a.order - 1, a.n_fermions, a.keys, sp.partial(a.coeffs, m)
    )


def d_left(a, g):
    """Left Grassmann derivative ``d/d psi^g -> a``."""
    keys, facs = [], []
    for mom, grass in a.keys:
        if g in grass:
            j = grass.index(g)
            keys.append((mom, grass[:j] + grass[j + 1:]))
            facs.append(-1 if j & 1 else 1)
        else:
            keys.append(None)
            facs.append(0)
    return _relabel(a, keys, facs)


def d_right(a, g):
    """Right Grassmann derivative ``a <- d/d psi^g``."""
    keys, facs = [], []
    for mom, grass in a.keys:
        if g in grass:
            j = grass.index(g)
            keys.append((mom, grass[:j] + grass[j + 1:]))
            facs.append(-1 if (len(grass) - 1 - j) & 1 else 1)
        else:
            keys.append(None)
            facs.append(0)
    return _relabel(a, keys, facs)


def graded_poisson_bracket(a, b):
    """Graded Poisson bracket ``{a, b}``; the result has jet order one lower."""
    a._check(b)
    order = min(a.order, b.order) - 1
    result = SuperElement.zero(a.base_point, order, a.n_fermions)
    for m in range(a.dim):
        pa = d_momentum(a, m)
        pb = d_momentum(b, m)
        if pa.keys and b.keys:
            result = result + super_mul(pa, d_coordinate(b, m))
        if pb.keys and a.keys:
            result = result - super_mul(d_coordinate(a, m), pb)
    for g in range(a.n_fermions):
        ra = d_right(a, g)
        if not ra.keys:
            continue
        lb = d_left(b, g)
        if not lb.keys:
            continue
        result = result + super_mul(ra, lb).scale(1j)
    return result.truncate(order) if result.order > order else result


bracket = graded_poisson_bracket


def check_degrees(a, max_momentum=MAX_MOMENTUM_DEGREE, parity=None, what="element"):
    """Raise ``ValueError`` if ``a`` exceeds a momentum degree or has the wrong parity.

    The element type itself places no bound on the momentum degree; charge
    constructors call this to catch construction mistakes.
    """
    if a.momentum_degree > max_momentum:
        raise ValueError(f"{what} has momentum degree {a.momentum_degree} > {max_momentum}")
    if a.grassmann_degree > a.n_fermions:
        raise ValueError(f"{what} has Grassmann degree above {a.n_fermions}")
    if parity is not None and a.parity not in (parity, "zero"):
        raise ValueError(f"{what} should be {parity}, is {a.parity}")
    return a


def residual_norm(a):
    """Largest modulus among the term values at the base point (0 if empty)."""
    if not a.keys:
        return 0.0
    return float(np.max(np.abs(a.coeffs[:, 0])))


def shift_momenta(a, shifts):
    """Substitute ``Pi_M -> Pi_M + shifts[M]`` in every term.

    ``shifts`` is a ``(D, size)`` jet array of at least the element's order or
    a length-``D`` vector of constants.
    """
    D = a.dim
    sp = a.space
    shifts = np.asarray(shifts, dtype=complex)
    if shifts.ndim == 1:
        shifts = sp.constant(shifts)
    shifts = shifts[..., : sp.size]
    base = a.base_point
    factors = [
        SuperElement.momentum(m, base, a.order, a.n_fermions)
        + SuperElement.scalar(shifts[m], base, a.order, a.n_fermions)
        for m in range(D)
    ]
    result = SuperElement.zero(base, a.order, a.n_fermions)
    zero_mom = (0,) * D
    for (mom, grass), row in zip(a.keys, a.coeffs):
        term = SuperElement(base, a.order, a.n_fermions, [(zero_mom, grass)], row[None, :])
        for m, e in enumerate(mom):
            for _ in range(e):
                term = super_mul(term, factors[m])
        result = result + term
    return result
