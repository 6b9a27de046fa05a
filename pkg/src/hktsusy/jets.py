"""Truncated multivariate Taylor arithmetic.

A jet of order ``K`` at a base point ``p`` stores the Taylor coefficients
``d^alpha f(p) / alpha!`` for every multi-index ``|alpha| <= K``.  Multi-indices
are laid out by total degree, so the coefficients of a lower-order jet are a
prefix of the higher-order array and truncation is a slice.

Most of the package works on raw coefficient arrays of shape ``(..., size)``
through the methods of :class:`JetSpace`; :class:`JetScalar` is the immutable
single-field wrapper used at the public surface.

Field expressions (:class:`FieldExpr`) are small expression trees over the
coordinates ``x1..xD``.  They can be parsed from infix text, evaluated at a
point, differentiated symbolically and lifted to jets.
"""
from __future__ import annotations

import ast
import cmath
import itertools
import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import MismatchedJets, OrderExhausted, ParseError, SingularEvaluation

DEFAULT_ORDER = 3

# below this modulus a constant term counts as zero for division/log/sqrt
_SINGULAR_EPS = 1e-14


# ---------------------------------------------------------------------------
# jet spaces: index bookkeeping and array kernels
# ---------------------------------------------------------------------------

def multi_indices(dim, order):
    """All exponent tuples of total degree ``<= order``, ordered by degree."""
    out = []
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(dim), deg):
            exps = [0] * dim
            for m in combo:
                exps[m] += 1
            out.append(tuple(exps))
    return out


@lru_cache(maxsize=None)
def jet_space(dim, order):
    """Cached :class:`JetSpace` for the given dimension and order."""
    return JetSpace(dim, order)


class JetSpace:
    """Index tables and vectorised kernels for jets in ``dim`` variables.

    All kernels act on complex arrays whose last axis has length ``size``;
    leading axes broadcast.
    """

    def __init__(self, dim, order):
        if dim < 1:
            raise ValueError("dimension must be positive")
        if order < 0:
            raise ValueError("jet order must be non-negative")
        self.dim = dim
        self.order = order
        self.indices = multi_indices(dim, order)
        self.position = {a: i for i, a in enumerate(self.indices)}
        self.size = len(self.indices)
        self.degrees = np.array([sum(a) for a in self.indices])

        left, right, target = [], [], []
        for i, a in enumerate(self.indices):
            for j, b in enumerate(self.indices):
                if self.degrees[i] + self.degrees[j] <= order:
                    left.append(i)
                    right.append(j)
                    target.append(self.position[tuple(x + y for x, y in zip(a, b))])
        self._left = np.array(left)
        self._right = np.array(right)
        scatter = np.zeros((len(target), self.size))
        scatter[np.arange(len(target)), target] = 1.0
        self._scatter = scatter

        self._partials = []
        if order >= 1:
            lower = multi_indices(dim, order - 1)
            for m in range(dim):
                src, fac = [], []
                for b in lower:
                    a = list(b)
                    a[m] += 1
                    src.append(self.position[tuple(a)])
                    fac.append(b[m] + 1)
                self._partials.append((np.array(src), np.array(fac, dtype=float)))

    def __repr__(self):
        return f"JetSpace(dim={self.dim}, order={self.order})"

    def lower(self, by=1):
        return jet_space(self.dim, self.order - by)

    # -- construction -----------------------------------------------------

    def zeros(self, shape=()):
        return np.zeros(tuple(shape) + (self.size,), dtype=complex)

    def constant(self, value):
        """Jet array of a constant (scalar or array of constants)."""
        value = np.asarray(value, dtype=complex)
        out = self.zeros(value.shape)
        out[..., 0] = value
        return out

    def variable(self, point, m):
        """Jet of the coordinate ``x^m`` at ``point``."""
        out = self.zeros()
        out[0] = point[m]
        if self.order >= 1:
            e = [0] * self.dim
            e[m] = 1
            out[self.position[tuple(e)]] = 1.0
        return out

    # -- arithmetic -------------------------------------------------------

    def mul(self, a, b):
        """Truncated product, broadcasting over leading axes."""
        return (a[..., self._left] * b[..., self._right]) @ self._scatter

    def einsum(self, subscripts, a, b):
        """``np.einsum`` over tensor axes with jet multiplication of entries.

        ``subscripts`` names only the tensor axes, e.g. ``'ml,lnk->mnk'``.
        """
        spare = next(c for c in "tuvwyz" if c not in subscripts)
        ins, out = subscripts.split("->")
        sa, sb = ins.split(",")
        spec = f"{sa}{spare},{sb}{spare}->{out}{spare}"
        pairs = np.einsum(spec, a[..., self._left], b[..., self._right])
        return pairs @ self._scatter

    def power(self, a, n):
        if n < 0:
            return self.power(self.reciprocal(a), -n)
        result = self.constant(np.ones(a.shape[:-1]))
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return result

    def reciprocal(self, a):
        """Series reciprocal by Newton iteration ``r <- r (2 - a r)``."""
        a0 = a[..., 0]
        if np.any(np.abs(a0) < _SINGULAR_EPS):
            raise SingularEvaluation("division by a jet with zero constant term")
        r = self.constant(1.0 / a0)
        # each step doubles the number of correct orders
        for _ in range(max(1, math.ceil(math.log2(self.order + 1)))):
            r = 2 * r - self.mul(a, self.mul(r, r))
        return r

    def div(self, a, b):
        return self.mul(a, self.reciprocal(b))

    def _compose(self, a, coeffs):
        """``sum_n coeffs[n] * (a - a0)^n`` with ``coeffs[n]`` shaped like a0."""
        h = a.copy()
        h[..., 0] = 0
        result = self.constant(coeffs[0])
        hn = None
        for n in range(1, self.order + 1):
            hn = h if hn is None else self.mul(hn, h)
            result = result + coeffs[n][..., None] * hn
        return result

    @staticmethod
    def _check_positive(a0, what):
        a0 = np.asarray(a0)
        real_axis = np.abs(a0.imag) <= 1e-12 * np.maximum(1.0, np.abs(a0))
        bad = (np.abs(a0) < _SINGULAR_EPS) | (real_axis & (a0.real <= 0))
        if np.any(bad):
            raise SingularEvaluation(f"{what} of a non-positive value")

    def sqrt(self, a):
        a0 = a[..., 0]
        self._check_positive(a0, "sqrt")
        coeffs = []
        binom = 1.0
        for n in range(self.order + 1):
            if n:
                binom *= (0.5 - n + 1) / n
            coeffs.append(binom * np.power(a0, 0.5 - n))
        return self._compose(a, coeffs)

    def log(self, a):
        a0 = a[..., 0]
        self._check_positive(a0, "log")
        coeffs = [np.log(a0)]
        for n in range(1, self.order + 1):
            coeffs.append((-1) ** (n + 1) / (n * a0**n))
        return self._compose(a, coeffs)

    def exp(self, a):
        e0 = np.exp(a[..., 0])
        coeffs = [e0 / math.factorial(n) for n in range(self.order + 1)]
        return self._compose(a, coeffs)

    # -- differentiation --------------------------------------------------

    def partial(self, a, m):
        """``d/dx^m``; the result lives in the space of order ``order - 1``."""
        if self.order < 1:
            raise OrderExhausted("cannot differentiate a jet of order 0")
        src, fac = self._partials[m]
        return a[..., src] * fac

    def gradient(self, a):
        """Stack of all partials on a new leading axis: ``out[m] = d_m a``."""
        return np.stack([self.partial(a, m) for m in range(self.dim)])

    def truncate(self, a, order):
        if order > self.order:
            raise OrderExhausted(f"cannot raise jet order {self.order} to {order}")
        return a[..., : jet_space(self.dim, order).size]


def space_of(dim, size):
    """Recover the :class:`JetSpace` whose coefficient count is ``size``."""
    order = 0
    while True:
        sp = jet_space(dim, order)
        if sp.size == size:
            return sp
        if sp.size > size:
            raise MismatchedJets(f"no jet space of dimension {dim} has size {size}")
        order += 1


# ---------------------------------------------------------------------------
# JetScalar
# ---------------------------------------------------------------------------

class JetScalar:
    """Immutable truncated Taylor expansion of a scalar field at a point.

    Supports ``+ - * /`` with other jets of the same base point and order and
    with plain numbers.
    """

    __slots__ = ("base_point", "order", "coeffs")

    def __init__(self, base_point, order, coeffs):
        base_point = np.array(base_point, dtype=float)
        base_point.setflags(write=False)
        coeffs = np.array(coeffs, dtype=complex)
        space = jet_space(len(base_point), order)
        if coeffs.shape != (space.size,):
            raise MismatchedJets(
                f"expected {space.size} coefficients for order {order}, got {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "base_point", base_point)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("JetScalar is immutable")

    @classmethod
    def constant_jet(cls, value, base_point, order=DEFAULT_ORDER):
        sp = jet_space(len(base_point), order)
        return cls(base_point, order, sp.constant(value))

    @classmethod
    def coordinate(cls, m, base_point, order=DEFAULT_ORDER):
        sp = jet_space(len(base_point), order)
        return cls(base_point, order, sp.variable(np.asarray(base_point, float), m))

    @property
    def dim(self):
        return len(self.base_point)

    @property
    def space(self):
        return jet_space(self.dim, self.order)

    @property
    def constant(self):
        """Value of the field at the base point."""
        return complex(self.coeffs[0])

    def coefficient(self, alpha):
        """Taylor coefficient for exponent tuple ``alpha`` (0 above the order)."""
        alpha = tuple(alpha)
        pos = self.space.position.get(alpha)
        return 0j if pos is None else complex(self.coeffs[pos])

    def as_dict(self, tol=0.0):
        """Nonzero coefficients keyed by exponent tuple."""
        return {
            a: complex(c)
            for a, c in zip(self.space.indices, self.coeffs)
            if abs(c) > tol
        }

    def is_real(self, tol=1e-12):
        return bool(np.all(np.abs(self.coeffs.imag) <= tol))

    def _new(self, coeffs, order=None):
        return JetScalar(self.base_point, self.order if order is None else order, coeffs)

    def _coerce(self, other):
        if isinstance(other, JetScalar):
            if other.dim != self.dim or not np.array_equal(other.base_point, self.base_point):
                raise MismatchedJets("jets have different base points")
            if other.order != self.order:
                raise MismatchedJets(f"jet orders differ: {self.order} vs {other.order}")
            return other.coeffs
        if isinstance(other, (int, float, complex, np.number)):
            return self.space.constant(other)
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._new(self.coeffs + b)

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._new(self.coeffs - b)

    def __rsub__(self, other):
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._new(b - self.coeffs)

    def __neg__(self):
        return self._new(-self.coeffs)

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self._new(self.space.mul(self.coeffs, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self._new(self.space.div(self.coeffs, b))

    def __rtruediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self._new(self.space.div(b, self.coeffs))

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            return NotImplemented
        return self._new(self.space.power(self.coeffs, int(n)))

    def reciprocal(self):
        return self._new(self.space.reciprocal(self.coeffs))

    def sqrt(self):
        return self._new(self.space.sqrt(self.coeffs))

    def log(self):
        return self._new(self.space.log(self.coeffs))

    def exp(self):
        return self._new(self.space.exp(self.coeffs))

    def partial(self, m):
        return self._new(self.space.partial(self.coeffs, m), self.order - 1)

    def truncate(self, order):
        return self._new(self.space.truncate(self.coeffs, order), order)

    def allclose(self, other, rtol=1e-12, atol=1e-12):
        b = self._coerce(other)
        return bool(np.allclose(self.coeffs, b, rtol=rtol, atol=atol))

    def __repr__(self):
        terms = ", ".join(f"{a}: {c:.6g}" for a, c in self.as_dict(1e-15).items())
        return f"JetScalar(order={self.order}, at={self.base_point.tolist()}, {{{terms}}})"


def jet_arith(a, b, op):
    """Apply one of ``'+', '-', '*', '/'`` to two jets."""
    ops = {
        "+": lambda u, v: u + v,
        "-": lambda u, v: u - v,
        "*": lambda u, v: u * v,
        "/": lambda u, v: u / v,
    }
    if op not in ops:
        raise ValueError(f"unknown jet operation {op!r}")
    return ops[op](a, b)


def jet_partial(a, m):
    """Partial derivative of ``a`` along coordinate ``m`` (0-based)."""
    return a.partial(m)


# ---------------------------------------------------------------------------
# field expressions
# ---------------------------------------------------------------------------

FUNCTIONS = ("sqrt", "log", "exp")


class FieldExpr:
    """Base class of expression-tree nodes; supports Python arithmetic."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("only integer powers are supported")
        return power(self, int(n))

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Const(FieldExpr):
    value: complex


@dataclass(frozen=True, eq=True)
class Var(FieldExpr):
    index: int  # 0-based coordinate index


@dataclass(frozen=True, eq=True)
class Add(FieldExpr):
    left: FieldExpr
    right: FieldExpr


@dataclass(frozen=True, eq=True)
class Sub(FieldExpr):
    left: FieldExpr
    right: FieldExpr


@dataclass(frozen=True, eq=True)
class Mul(FieldExpr):
    left: FieldExpr
    right: FieldExpr


@dataclass(frozen=True, eq=True)
class Div(FieldExpr):
    left: FieldExpr
    right: FieldExpr


@dataclass(frozen=True, eq=True)
class Neg(FieldExpr):
    arg: FieldExpr


@dataclass(frozen=True, eq=True)
class Pow(FieldExpr):
    base: FieldExpr
    exponent: int


@dataclass(frozen=True, eq=True)
class Func(FieldExpr):
    name: str
    arg: FieldExpr


ZERO = Const(0.0)
ONE = Const(1.0)


def as_expr(value):
    if isinstance(value, FieldExpr):
        return value
    if isinstance(value, (int, float, complex, np.number)):
        v = complex(value)
        return Const(v.real if v.imag == 0 else v)
    if isinstance(value, str):
        return parse_expr(value)
    raise TypeError(f"cannot convert {type(value).__name__} to FieldExpr")


def _is_const(e, v=None):
    return isinstance(e, Const) and (v is None or e.value == v)


# smart constructors: fold constants and trivial identities, nothing more

def add(a, b):
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if _is_const(a) and _is_const(b):
        return as_expr(a.value + b.value)
    return Add(a, b)


def sub(a, b):
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return neg(b)
    if _is_const(a) and _is_const(b):
        return as_expr(a.value - b.value)
    return Sub(a, b)


def mul(a, b):
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if _is_const(a) and _is_const(b):
        return as_expr(a.value * b.value)
    return Mul(a, b)


def div(a, b):
    if _is_const(b, 1):
        return a
    if _is_const(a, 0) and not _is_const(b, 0):
        return ZERO
    if _is_const(a) and _is_const(b) and b.value != 0:
        return as_expr(a.value / b.value)
    return Div(a, b)


def neg(a):
    if _is_const(a):
        return as_expr(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(a, n):
    if n == 0:
        return ONE
    if n == 1:
        return a
    if _is_const(a) and (n > 0 or a.value != 0):
        return as_expr(a.value**n)
    return Pow(a, n)


def func(name, a):
    if name not in FUNCTIONS:
        raise ValueError(f"unsupported function {name!r}")
    return Func(name, a)


def sqrt(a):
    return func("sqrt", as_expr(a))


def log(a):
    return func("log", as_expr(a))


def exp(a):
    return func("exp", as_expr(a))


def coordinates(dim):
    """``Var`` nodes for ``x1..x_dim``."""
    return [Var(i) for i in range(dim)]


def complex_coordinate(j, conjugate=False):
    """``z^j = (x^{2j-1} - i x^{2j})/sqrt 2`` (``j`` 1-based); ``zb`` if conjugate."""
    s = 1.0 if conjugate else -1.0
    r = 1 / math.sqrt(2)
    return add(mul(Const(r), Var(2 * j - 2)), mul(Const(complex(0, s * r)), Var(2 * j - 1)))


def max_index(expr):
    """Largest coordinate index used (``-1`` for constants)."""
    if isinstance(expr, Var):
        return expr.index
    if isinstance(expr, Const):
        return -1
    if isinstance(expr, (Neg, Func)):
        return max_index(expr.arg)
    if isinstance(expr, Pow):
        return max_index(expr.base)
    return max(max_index(expr.left), max_index(expr.right))


def diff(expr, m):
    """Symbolic ``d expr / dx^m`` (0-based ``m``), lightly folded."""
    memo = {}

    def d(e):
        key = id(e)
        if key in memo:
            return memo[key][1]
        if isinstance(e, Const):
            r = ZERO
        elif isinstance(e, Var):
            r = ONE if e.index == m else ZERO
        elif isinstance(e, Add):
            r = add(d(e.left), d(e.right))
        elif isinstance(e, Sub):
            r = sub(d(e.left), d(e.right))
        elif isinstance(e, Neg):
            r = neg(d(e.arg))
        elif isinstance(e, Mul):
            r = add(mul(d(e.left), e.right), mul(e.left, d(e.right)))
        elif isinstance(e, Div):
            num = sub(mul(d(e.left), e.right), mul(e.left, d(e.right)))
            r = div(num, power(e.right, 2))
        elif isinstance(e, Pow):
            r = mul(mul(Const(float(e.exponent)), power(e.base, e.exponent - 1)), d(e.base))
        elif isinstance(e, Func):
            du = d(e.arg)
            if e.name == "exp":
                r = mul(e, du)
            elif e.name == "log":
                r = div(du, e.arg)
            else:
                r = div(du, mul(Const(2.0), e))
        else:
            raise TypeError(f"unknown node {e!r}")
        memo[key] = (e, r)
        return r

    return d(expr)


def evaluate(expr, point):
    """Pointwise complex value of ``expr``; independent of the jet machinery."""
    memo = {}

    def ev(e):
        key = id(e)
        if key in memo:
            return memo[key][1]
        if isinstance(e, Const):
            v = complex(e.value)
        elif isinstance(e, Var):
            v = complex(point[e.index])
        elif isinstance(e, Add):
            v = ev(e.left) + ev(e.right)
        elif isinstance(e, Sub):
            v = ev(e.left) - ev(e.right)
        elif isinstance(e, Neg):
            v = -ev(e.arg)
        elif isinstance(e, Mul):
            v = ev(e.left) * ev(e.right)
        elif isinstance(e, Div):
            den = ev(e.right)
            if abs(den) < _SINGULAR_EPS:
                raise SingularEvaluation("division by zero")
            v = ev(e.left) / den
        elif isinstance(e, Pow):
            b = ev(e.base)
            if e.exponent < 0 and abs(b) < _SINGULAR_EPS:
                raise SingularEvaluation("negative power of zero")
            v = b**e.exponent
        elif isinstance(e, Func):
            u = ev(e.arg)
            if e.name == "exp":
                v = cmath.exp(u)
            else:
                JetSpace._check_positive(u, e.name)
                v = cmath.log(u) if e.name == "log" else cmath.sqrt(u)
        else:
            raise TypeError(f"unknown node {e!r}")
        memo[key] = (e, v)
        return v

    return ev(expr)


def lift_array(expr, point, order=DEFAULT_ORDER):
    """Coefficient array of the order-``order`` jet of ``expr`` at ``point``."""
    point = np.asarray(point, dtype=float)
    sp = jet_space(len(point), order)
    memo = {}

    def lift(e):
        key = id(e)
        if key in memo:
            return memo[key][1]
        if isinstance(e, Const):
            v = sp.constant(e.value)
        elif isinstance(e, Var):
            if e.index >= sp.dim:
                raise MismatchedJets(f"x{e.index + 1} used in a {sp.dim}-dimensional chart")
            v = sp.variable(point, e.index)
        elif isinstance(e, Add):
            v = lift(e.left) + lift(e.right)
        elif isinstance(e, Sub):
            v = lift(e.left) - lift(e.right)
        elif isinstance(e, Neg):
            v = -lift(e.arg)
        elif isinstance(e, Mul):
            v = sp.mul(lift(e.left), lift(e.right))
        elif isinstance(e, Div):
            v = sp.div(lift(e.left), lift(e.right))
        elif isinstance(e, Pow):
            v = sp.power(lift(e.base), e.exponent)
        elif isinstance(e, Func):
            v = getattr(sp, e.name)(lift(e.arg))
        else:
            raise TypeError(f"unknown node {e!r}")
        memo[key] = (e, v)
        return v

    return lift(as_expr(expr))


def jet_lift(expr, point, order=DEFAULT_ORDER):
    """Order-``order`` Taylor expansion of ``expr`` at ``point`` as a JetScalar."""
    return JetScalar(point, order, lift_array(expr, point, order))


# -- text form ---------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _const_text(v):
    v = complex(v)
    if v.imag == 0:
        r = v.real
        return repr(int(r)) if r.is_integer() and abs(r) < 1e15 else repr(r)
    return f"({v.real!r}+{v.imag!r}j)"


def to_text(expr):
    """Infix text accepted by :func:`parse_expr` (for real constants)."""

    def wrap(e, prec):
        s = to_text(e)
        p = _PREC.get(type(e), 5)
        if isinstance(e, Const) and (complex(e.value).real < 0 or complex(e.value).imag):
            p = 3
        return f"({s})" if p < prec else s

    e = expr
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Var):
        return f"x{e.index + 1}"
    if isinstance(e, Add):
        return f"{wrap(e.left, 1)} + {wrap(e.right, 2)}"
    if isinstance(e, Sub):
        return f"{wrap(e.left, 1)} - {wrap(e.right, 2)}"
    if isinstance(e, Mul):
        return f"{wrap(e.left, 2)}*{wrap(e.right, 3)}"
    if isinstance(e, Div):
        return f"{wrap(e.left, 2)}/{wrap(e.right, 3)}"
    if isinstance(e, Neg):
        return f"-{wrap(e.arg, 3)}"
    if isinstance(e, Pow):
        return f"{wrap(e.base, 5)}^{e.exponent}"
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})"
    raise TypeError(f"unknown node {e!r}")


# -- parser ------------------------------------------------------------------

_NAME = re.compile(r"^(x|z|zb)([1-9][0-9]*)$")


def parse_expr(text, dim=None):
    """Parse infix text such as ``"1/(1+(x1^2+x2^2)/2)^2"``.

    Identifiers are ``x1..xD``; ``zj`` and ``zbj`` are shorthands for the complex
    coordinates ``(x^{2j-1} -/+ i x^{2j})/sqrt 2``.  Operators ``+ - * / ^``
    (``^`` takes an integer exponent) and the functions ``sqrt``, ``log``,
    ``exp`` are accepted.  If ``dim`` is given, coordinates beyond it are
    rejected.
    """
    # '^' -> '**' shifts columns; keep a map back to the user's text
    pyt, colmap = [], []
    lead = len(text) - len(text.lstrip())
    for i, ch in enumerate(text[lead:], start=lead):
        if ch == "^":
            pyt.append("**")
            colmap.extend([i, i])
        else:
            pyt.append(ch)
            colmap.append(i)
    source = "".join(pyt)

    def column(offset):
        if offset is None:
            return None
        offset = min(max(offset, 0), len(colmap) - 1) if colmap else 0
        return (colmap[offset] if colmap else 0) + 1

    try:
        tree = ast.parse(source.rstrip(), mode="eval")
    except SyntaxError as exc:
        off = (exc.offset or 1) - 1
        raise ParseError(f"invalid expression {text!r}: {exc.msg}", column=column(off)) from None

    def fail(msg, node):
        raise ParseError(f"{msg} in {text!r}", column=column(getattr(node, "col_offset", None)))

    def integer_exponent(node):
        sign = 1
        while isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            if isinstance(node.op, ast.USub):
                sign = -sign
            node = node.operand
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return sign * node.value
        if isinstance(node, ast.Constant) and isinstance(node.value, float) and node.value.is_integer():
            return sign * int(node.value)
        fail("exponent must be an integer literal", node)

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                fail("unsupported literal", node)
            return Const(float(node.value))
        if isinstance(node, ast.Name):
            m = _NAME.match(node.id)
            if not m:
                fail(f"unknown identifier {node.id!r}", node)
            kind, k = m.group(1), int(m.group(2))
            if kind == "x":
                if dim is not None and k > dim:
                    fail(f"coordinate {node.id} exceeds dimension {dim}", node)
                return Var(k - 1)
            if dim is not None and 2 * k > dim:
                fail(f"complex coordinate {node.id} exceeds dimension {dim}", node)
            return complex_coordinate(k, conjugate=(kind == "zb"))
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                return neg(build(node.operand))
            if isinstance(node.op, ast.UAdd):
                return build(node.operand)
            fail("unsupported unary operator", node)
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                return power(build(node.left), integer_exponent(node.right))
            ops = {ast.Add: add, ast.Sub: sub, ast.Mult: mul, ast.Div: div}
            f = ops.get(type(node.op))
            if f is None:
                fail("unsupported operator", node)
            return f(build(node.left), build(node.right))
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
                fail("unknown function", node)
            if len(node.args) != 1 or node.keywords:
                fail(f"{node.func.id} takes exactly one argument", node)
            return func(node.func.id, build(node.args[0]))
        fail("unsupported syntax", node)

    return build(tree)
