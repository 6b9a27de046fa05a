"""Chart-level Riemannian geometry computed as jets at a base point.

Index conventions used throughout the package:

* ``metric[M, N] = g_MN``, ``inverse[M, N] = g^MN``
* ``vielbein[A, M] = e^A_M`` with ``g_MN = sum_A e^A_M e^A_N``
* ``inverse_vielbein[M, A] = e^M_A``
* ``christoffel[M, N, K] = Gamma^M_NK``
* ``spin_connection[M, A, B] = Omega_{M,AB} = e_AN (d_M e^N_B + Gamma^N_MK e^K_B)``
* rank-3 torsion ``C[L, N, K] = C_LNK`` fully lowered

The last axis of every array holds jet coefficients.  Quantities that need one
derivative of the metric carry one jet order less than the metric itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefinite
from .jets import DEFAULT_ORDER, FieldExpr, JetScalar, as_expr, diff, jet_space, lift_array, parse_expr


class MetricField:
    """Symmetric ``D x D`` grid of field expressions."""

    def __init__(self, entries, name=None):
        entries = [[as_expr(e) for e in row] for row in entries]
        D = len(entries)
        if any(len(row) != D for row in entries):
            raise ValueError("metric grid must be square")
        for m in range(D):
            for n in range(m + 1, D):
                if entries[m][n] != entries[n][m]:
                    raise ValueError(f"metric entries ({m + 1},{n + 1}) and ({n + 1},{m + 1}) differ")
        self.entries = entries
        self.dim = D
        self.name = name

    @classmethod
    def from_strings(cls, grid, name=None):
        """Build from text; a grid whose row ``M`` holds ``D - M`` entries is read
        as an upper triangle."""
        D = len(grid)
        full = [[None] * D for _ in range(D)]
        for m, row in enumerate(grid):
            if len(row) == D:
                start = 0
            elif len(row) == D - m:
                start = m
            else:
                raise ValueError(f"metric row {m + 1} has {len(row)} entries; expected {D} or {D - m}")
            for k, text in enumerate(row):
                n = start + k
                full[m][n] = parse_expr(text, dim=D) if isinstance(text, str) else as_expr(text)
        for m in range(D):
            for n in range(m):
                if full[m][n] is None:
                    full[m][n] = full[n][m]
            for n in range(m + 1, D):
                if full[m][n] is None:
                    full[m][n] = full[n][m]
        return cls(full, name=name)

    def jets(self, point, order=DEFAULT_ORDER):
        D = self.dim
        sp = jet_space(D, order)
        out = sp.zeros((D, D))
        for m in range(D):
            for n in range(m, D):
                out[m, n] = lift_array(self.entries[m][n], point, order)
                out[n, m] = out[m, n]
        return out

    def __repr__(self):
        return f"MetricField(dim={self.dim}, name={self.name!r})"


def flat_metric(dim):
    return MetricField(
        [[1.0 if m == n else 0.0 for n in range(dim)] for m in range(dim)], name="flat"
    )


def conformally_flat(f, dim=4):
    """Metric ``delta_MN / f^2``."""
    f = parse_expr(f, dim=dim) if isinstance(f, str) else as_expr(f)
    diag = 1 / f**2
    return MetricField(
        [[diag if m == n else 0.0 for n in range(dim)] for m in range(dim)],
        name=f"conformally flat, f = {f}",
    )


def _kahler_weights(d):
    """Constant weights ``W[M, N, P, Q]`` with ``g_MN = W[M,N,P,Q] d_P d_Q K``.

    Uses ``z^j = (x^{2j-1} - i x^{2j})/sqrt 2`` and ``ds^2 = 2 h_{j kbar} dz^j dzbar^k``.
    """
    D = 2 * d
    r = 1 / math.sqrt(2)
    dz = np.zeros((d, D), dtype=complex)  # dz^j = dz[j, M] dx^M
    dd = np.zeros((d, D), dtype=complex)  # d/dz^j = dd[j, P] d_P
    for j in range(d):
        dz[j, 2 * j], dz[j, 2 * j + 1] = r, -1j * r
        dd[j, 2 * j], dd[j, 2 * j + 1] = r, 1j * r
    # h_{j kbar} = dd[j,P] conj(dd[k,Q]) H_PQ
    # g_MN = sum_{jk} h_{j kbar} (dz[j,M] conj(dz[k,N]) + conj(dz[k,M]) dz[j,N])
    W = np.einsum("jp,kq,jm,kn->mnpq", dd, dd.conj(), dz, dz.conj())
    W = W + np.einsum("jp,kq,km,jn->mnpq", dd, dd.conj(), dz.conj(), dz)
    # the Hessian is symmetric, so only the (P, Q)-symmetric part contributes
    W = 0.5 * (W + np.swapaxes(W, 2, 3))
    if np.max(np.abs(W.imag)) > 1e-14:
        raise AssertionError("complex coordinate dictionary produced a non-real metric")
    return np.round(W.real, 14)


def metric_from_kahler_potential(K, d):
    """Real ``2d``-dimensional metric of the Kähler potential ``K``.

    ``K`` may use ``x1..x2d`` or the complex shorthands ``zj``/``zbj``; the
    metric entries are built from its symbolic Hessian.
    """
    D = 2 * d
    K = parse_expr(K, dim=D) if isinstance(K, str) else as_expr(K)
    first = [diff(K, p) for p in range(D)]
    hess = [[diff(first[p], q) for q in range(D)] for p in range(D)]
    W = _kahler_weights(d)
    grid = []
    for m in range(D):
        row = []
        for n in range(D):
            e = as_expr(0.0)
            for p in range(D):
                for q in range(D):
                    w = W[m, n, p, q]
                    if w:
                        e = e + w * hess[p][q]
            row.append(e)
        grid.append(row)
    for m in range(D):
        for n in range(m):
            grid[m][n] = grid[n][m]
    return MetricField(grid, name=f"Kahler potential {K}")


# ---------------------------------------------------------------------------
# jet linear algebra
# ---------------------------------------------------------------------------

def jet_inverse(sp, A):
    """Inverse of a square jet matrix ``A[i, j, :]`` by Newton iteration."""
    n = A.shape[0]
    X = sp.constant(np.linalg.inv(A[..., 0]))
    eye = sp.constant(np.eye(n))
    for _ in range(max(1, math.ceil(math.log2(sp.order + 1)))):
        X = sp.einsum("ij,jk->ik", X, 2 * eye - sp.einsum("ij,jk->ik", A, X))
    return X


def jet_cholesky(sp, g):
    """Lower-triangular ``L`` with ``g = L L^T`` and positive diagonal."""
    D = g.shape[0]
    L = sp.zeros((D, D))
    for j in range(D):
        s = g[j, j] - sum((sp.mul(L[j, k], L[j, k]) for k in range(j)), sp.zeros())
        L[j, j] = sp.sqrt(s)
        inv = sp.reciprocal(L[j, j])
        for i in range(j + 1, D):
            s = g[i, j] - sum((sp.mul(L[i, k], L[j, k]) for k in range(j)), sp.zeros())
            L[i, j] = sp.mul(s, inv)
    return L


@dataclass(frozen=True)
class ChartGeometry:
    """Geometric data at one point; see the module docstring for index layout."""

    point: np.ndarray
    order: int
    metric: np.ndarray
    inverse: np.ndarray
    vielbein: np.ndarray
    inverse_vielbein: np.ndarray
    dmetric: np.ndarray  # dmetric[P, M, N] = d_P g_MN
    christoffel: np.ndarray
    spin_connection: np.ndarray

    @property
    def dim(self):
        return len(self.point)

    @property
    def space(self):
        return jet_space(self.dim, self.order)

    def jet(self, arr):
        """Wrap one coefficient array as a :class:`JetScalar`."""
        order = next(
            k for k in range(self.order, -1, -1) if jet_space(self.dim, k).size == arr.shape[-1]
        )
        return JetScalar(self.point, order, arr)

    def value(self, arr):
        """Values at the base point (drop jet axis)."""
        return arr[..., 0]

    def lower(self, T):
        """Lower the second index of a mixed tensor: ``T_MN = T_M^P g_PN``."""
        sp = jet_space(self.dim, min(self.order, _order_of(self.dim, T)))
        return sp.einsum("mp,pn->mn", _trunc(T, sp), _trunc(self.metric, sp))

    def to_flat(self, T, axes):
        """Convert lower curved indices on the given axes to flat-frame indices."""
        sp = jet_space(self.dim, min(self.order, _order_of(self.dim, T)))
        T = _trunc(T, sp)
        E = _trunc(self.inverse_vielbein, sp)
        for ax in axes:
            T = np.moveaxis(T, ax, 0)
            T = sp.einsum("ma,m...->a...".replace("...", _letters(T.ndim - 2)), E, T)
            T = np.moveaxis(T, 0, ax)
        return T


def _letters(n):
    return "bcdefghijkl"[:n]


def _order_of(dim, arr):
    size = arr.shape[-1]
    k = 0
    while jet_space(dim, k).size < size:
        k += 1
    return k


def _trunc(arr, sp):
    return arr[..., : sp.size]


def build_geometry(metric, point, order=DEFAULT_ORDER):
    """Vielbein, Christoffel symbols and spin connection of ``metric`` at ``point``."""
    point = np.asarray(point, dtype=float)
    D = metric.dim
    if len(point) != D:
        raise ValueError(f"point has {len(point)} coordinates, metric is {D}-dimensional")
    if order < 1:
        raise ValueError("geometry needs jet order >= 1")
    sp = jet_space(D, order)
    lo = sp.lower()
    g = metric.jets(point, order)
    g0 = g[..., 0]
    if np.max(np.abs(g0.imag)) > 1e-10 or np.min(np.linalg.eigvalsh(g0.real)) <= 0:
        raise NotPositiveDefinite(f"metric is not positive definite at {point.tolist()}")

    L = jet_cholesky(sp, g)
    E = np.swapaxes(L, 0, 1).copy()  # E[A, M] = L[M, A]
    Einv = jet_inverse(sp, E)  # Einv[M, A]
    ginv = sp.einsum("ma,na->mn", Einv, Einv)

    dg = sp.gradient(g)  # (P, M, N)
    ginv_lo = _trunc(ginv, lo)
    # Gamma^M_NK = 1/2 g^ML (d_N g_LK + d_K g_LN - d_L g_NK)
    comb = np.einsum("nlk...->lnk...", dg) + np.einsum("knl...->lnk...", dg) - dg
    gamma = 0.5 * lo.einsum("ml,lnk->mnk", ginv_lo, comb)

    dEinv = sp.gradient(Einv)  # (P, N, B) = d_P e^N_B
    E_lo = _trunc(E, lo)
    Einv_lo = _trunc(Einv, lo)
    inner = dEinv + lo.einsum("nmk,kb->mnb", gamma, Einv_lo)
    omega = lo.einsum("an,mnb->mab", E_lo, inner)

    return ChartGeometry(
        point=point,
        order=order,
        metric=g,
        inverse=ginv,
        vielbein=E,
        inverse_vielbein=Einv,
        dmetric=dg,
        christoffel=gamma,
        spin_connection=omega,
    )


def hatted_connection(geom, torsion):
    """``Gamma^M_NK + 1/2 g^ML C_LNK``."""
    lo = jet_space(geom.dim, min(geom.order - 1, _order_of(geom.dim, torsion)))
    ginv = _trunc(geom.inverse, lo)
    return _trunc(geom.christoffel, lo) + 0.5 * lo.einsum("ml,lnk->mnk", ginv, _trunc(torsion, lo))


def covariant_derivative_2form(geom, T, torsion=None):
    """``nabla_P T_MN`` for a lowered two-index tensor, returned as ``out[P, M, N]``.

    With ``torsion`` the connection is ``Gamma + 1/2 g^-1 C``.
    """
    D = geom.dim
    src = jet_space(D, _order_of(D, T))
    dT = src.gradient(T)
    conn = geom.christoffel if torsion is None else hatted_connection(geom, torsion)
    lo = jet_space(D, min(_order_of(D, dT), _order_of(D, conn)))
    dT, conn, T = _trunc(dT, lo), _trunc(conn, lo), _trunc(T, lo)
    return (
        dT
        - lo.einsum("spm,sn->pmn", conn, T)
        - lo.einsum("spn,ms->pmn", conn, T)
    )


def constant_parts(arr):
    return arr[..., 0]
