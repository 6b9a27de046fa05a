"""Classical supercharges, fermion charges and Hamiltonians as phase-space
elements.

Real supercharges live on ``D`` flat real generators ``psi^A``; curved
fermions are ``psi^M = e^M_A psi^A``.  The complex de Rham pair uses ``2D``
real generators ``chi^A, chi'^A`` combined into ``psi^A = (chi^A + i chi'^A)/sqrt 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import _order_of, _trunc
from .jets import jet_space
from .superspace import SuperElement, bracket, check_degrees, shift_momenta

TORSION_Q = 1j / 12
TORSION_S = -1j / 4


def _zero_mom(D):
    return (0,) * D


def _unit_mom(D, m):
    return tuple(1 if i == m else 0 for i in range(D))


def _linear_in_momentum(geom, U, order, n_fermions):
    """``sum U[A, M] psi^A Pi_M``."""
    D = geom.dim
    entries = [
        (_unit_mom(D, m), (a,), U[a, m]) for a in range(U.shape[0]) for m in range(D)
    ]
    return SuperElement.from_entries(geom.point, order, n_fermions, entries)


def _cubic(geom, T, order, n_fermions):
    """``sum T[A, B, C] psi^A psi^B psi^C`` on real generators."""
    D = geom.dim
    entries = []
    n = T.shape[0]
    for a in range(n):
        for b in range(n):
            if b == a:
                continue
            for c in range(n):
                if c == a or c == b:
                    continue
                entries.append((_zero_mom(D), (a, b, c), T[a, b, c]))
    return SuperElement.from_entries(geom.point, order, n_fermions, entries)


def _quadratic(geom, T, order, n_fermions):
    D = geom.dim
    entries = [
        (_zero_mom(D), (a, b), T[a, b])
        for a in range(T.shape[0])
        for b in range(T.shape[1])
        if a != b
    ]
    return SuperElement.from_entries(geom.point, order, n_fermions, entries)


def _flat_torsion(geom, C, axes=(0, 1, 2)):
    return geom.to_flat(C, axes)


def charge_order(geom):
    """Jet order carried by supercharge coefficients (one below the metric)."""
    return geom.order - 1


def build_Q_real(geom, C=None, torsion_coeff=TORSION_Q):
    """``Q = psi^M [Pi_M - i/2 Omega_{M,BC} psi^B psi^C] + c C_KLM psi^K psi^L psi^M``

    with ``c = i/12`` by default.  ``C`` is the lowered torsion (``None`` for 0).
    """
    order = charge_order(geom)
    D = geom.dim
    sp = jet_space(D, order)
    Einv = _trunc(geom.inverse_vielbein, sp)  # e^M_A
    kinetic = _linear_in_momentum(geom, np.swapaxes(Einv, 0, 1), order, D)
    # -i/2 e^M_A Omega_{M,BC}
    spin = -0.5j * sp.einsum("ma,mbc->abc", Einv, _trunc(geom.spin_connection, sp))
    Q = kinetic + _cubic(geom, spin, order, D)
    if C is not None:
        Cf = _trunc(_flat_torsion(geom, C), sp)
        Q = Q + _cubic(geom, torsion_coeff * Cf, order, D)
    return Q


def build_F(geom, T):
    """Fermion charge ``(i/2) I_MN psi^M psi^N`` for a mixed structure ``T``."""
    order = charge_order(geom)
    sp = jet_space(geom.dim, order)
    low = geom.lower(T)
    flat = _trunc(geom.to_flat(low, (0, 1)), sp)
    return _quadratic(geom, 0.5j * flat, order, geom.dim)


def build_S(geom, T, C=None, torsion_coeff=TORSION_S):
    """``S = psi^N I_N^M [Pi_M - i/2 Omega_{M,BC} psi^B psi^C + c C_MKL psi^K psi^L]``

    with ``c = -i/4`` by default.
    """
    order = charge_order(geom)
    D = geom.dim
    sp = jet_space(D, order)
    Einv = _trunc(geom.inverse_vielbein, sp)
    U = sp.einsum("na,nm->am", Einv, _trunc(T, sp))  # e^N_A I_N^M
    kinetic = _linear_in_momentum(geom, U, order, D)
    spin = -0.5j * sp.einsum("am,mbc->abc", U, _trunc(geom.spin_connection, sp))
    S = kinetic + _cubic(geom, spin, order, D)
    if C is not None:
        Cm = _trunc(geom.to_flat(C, (1, 2)), sp)  # C_{M,BC}
        S = S + _cubic(geom, torsion_coeff * sp.einsum("am,mbc->abc", U, Cm), order, D)
    return S


def build_H(Q):
    """``H = {Q, Q} / (2i)``."""
    return bracket(Q, Q).scale(1 / 2j)


@dataclass(frozen=True)
class SuperchargeSet:
    """``Q``, three ``S^a``, three ``F^a`` and ``H = {Q, Q}/(2i)``.

    ``S`` and ``F`` hold one entry per available complex structure.
    """

    Q: SuperElement
    S: tuple
    F: tuple
    H: SuperElement
    torsion: np.ndarray | None = None
    gauge: np.ndarray | None = None  # A_M jets, if deformed

    @property
    def charges(self):
        return (self.Q,) + tuple(self.S)


def build_supercharges(geom, structures, C=None, s_torsion_coeff=TORSION_S):
    """Assemble the full set for mixed structure jets ``structures[a]``."""
    Q = build_Q_real(geom, C)
    S = tuple(build_S(geom, T, C, torsion_coeff=s_torsion_coeff) for T in structures)
    F = tuple(build_F(geom, T) for T in structures)
    return _checked(SuperchargeSet(Q=Q, S=S, F=F, H=build_H(Q), torsion=C))


def _checked(cs):
    """Parity and degree bounds: charges odd and linear in momenta, ``F`` even
    without momenta, ``H`` even and at most quadratic."""
    for name, q in zip(("Q", "S1", "S2", "S3"), cs.charges):
        check_degrees(q, 1, "odd", name)
    for f in cs.F:
        check_degrees(f, 0, "even", "F")
    check_degrees(cs.H, 2, "even", "H")
    return cs


def gauge_deform(charges, A):
    """Replace ``Pi_M`` by ``Pi_M - A_M`` in ``Q`` and every ``S``.

    ``A`` is a ``(D, size)`` jet array.  ``F`` is unchanged and ``H`` is
    recomputed as ``{Q, Q}/(2i)`` from the deformed ``Q``.
    """
    A = np.asarray(A, dtype=complex)
    Q = shift_momenta(charges.Q, -A)
    S = tuple(shift_momenta(s, -A) for s in charges.S)
    return _checked(replace(charges, Q=Q, S=S, H=build_H(Q), gauge=A))


def field_strength(sp, A):
    """``F_MN = d_M A_N - d_N A_M`` as jets one order below ``A``."""
    dA = sp.gradient(A)  # dA[M, N] = d_M A_N
    return dA - np.swapaxes(dA, 0, 1)


def build_complex_pair(geom):
    """Nilpotent de Rham pair

    ``Q = psi^M (Pi_M - i Omega_{M,AB} psibar^A psi^B)``,
    ``Qbar = psibar^M (Pi_M - i Omega_{M,AB} psi^A psibar^B)``,

    on ``2D`` real generators: ``psi^A = (chi^A + i chi^{A+D})/sqrt 2`` and
    ``psibar^A = (chi^A - i chi^{A+D})/sqrt 2``, so that ``{psi^A, psibar^B} =
    i delta^AB`` and ``{psi, psi} = {psibar, psibar} = 0``.
    """
    order = charge_order(geom)
    D = geom.dim
    nf = 2 * D
    sp = jet_space(D, order)
    base = geom.point
    r = 1 / math.sqrt(2)

    def gen(a, bar):
        s = -1j if bar else 1j
        return SuperElement.from_entries(
            base, order, nf, [(_zero_mom(D), (a,), r), (_zero_mom(D), (a + D,), s * r)]
        )

    psi = [gen(a, False) for a in range(D)]
    psibar = [gen(a, True) for a in range(D)]
    Einv = _trunc(geom.inverse_vielbein, sp)
    omega = _trunc(geom.spin_connection, sp)

    def scalar(jet):
        return SuperElement.scalar(jet, base, order, nf)

    def momentum(m):
        return SuperElement.momentum(m, base, order, nf)

    # covariant momenta Pi_M - i Omega_{M,AB} x^A y^B for the two orderings
    def cov(m, first, second):
        out = momentum(m)
        for a in range(D):
            for b in range(D):
                if np.any(omega[m, a, b] != 0):
                    out = out - (scalar(omega[m, a, b]) * first[a] * second[b]).scale(1j)
        return out

    Q = SuperElement.zero(base, order, nf)
    Qbar = SuperElement.zero(base, order, nf)
    for m in range(D):
        curved = SuperElement.zero(base, order, nf)
        curved_bar = SuperElement.zero(base, order, nf)
        for a in range(D):
            curved = curved + scalar(Einv[m, a]) * psi[a]
            curved_bar = curved_bar + scalar(Einv[m, a]) * psibar[a]
        Q = Q + curved * cov(m, psibar, psi)
        Qbar = Qbar + curved_bar * cov(m, psi, psibar)
    return Q, Qbar
