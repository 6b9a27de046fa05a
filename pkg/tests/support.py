"""Shared oracles: random phase-space elements, brute-force tensor loops and
finite-difference Christoffel symbols."""
import itertools

import numpy as np

from hktsusy.jets import evaluate, jet_space
from hktsusy.superspace import SuperElement

BASE = np.array([0.2, -0.4])
ORDER = 3
N_FERMIONS = 3


def monomials(dim=2, n_fermions=N_FERMIONS, max_mom=1):
    moms = [(0,) * dim] + [tuple(int(i == m) for i in range(dim)) for m in range(dim)]
    moms = [m for m in moms if sum(m) <= max_mom]
    grass = [
        c for k in range(n_fermions + 1) for c in itertools.combinations(range(n_fermions), k)
    ]
    return moms, grass


def random_element(rng, parity, n_terms=4, base=BASE, order=ORDER, n_fermions=N_FERMIONS, max_mom=1):
    """Homogeneous element with random jet coefficients; ``parity`` is 0 or 1."""
    moms, grass = monomials(len(base), n_fermions, max_mom)
    grass = [g for g in grass if len(g) % 2 == parity]
    size = jet_space(len(base), order).size
    entries = []
    for _ in range(n_terms):
        m = moms[rng.integers(len(moms))]
        g = grass[rng.integers(len(grass))]
        c = rng.normal(size=size) + 1j * rng.normal(size=size)
        entries.append((m, g, c))
    return SuperElement.from_entries(base, order, n_fermions, entries)


def full_norm(a):
    return 0.0 if not a.keys else float(np.max(np.abs(a.coeffs)))


def brute_force_x(I, J, C):
    out = np.zeros((4, 4, 4))
    for M, N, Q in itertools.product(range(4), repeat=3):
        total = 0.0
        for P, R in itertools.product(range(4), repeat=2):
            total += (I[M, P] * J[N, R] - I[N, P] * J[M, R]) * C[P, R, Q]
            total += (I[N, P] * J[Q, R] - I[Q, P] * J[N, R]) * C[P, R, M]
            total += (I[Q, P] * J[M, R] - I[M, P] * J[Q, R]) * C[P, R, N]
        out[M, N, Q] = total
    return out


def metric_values(metric, x):
    D = metric.dim
    return np.array([[evaluate(metric.entries[m][n], x).real for n in range(D)] for m in range(D)])


def fd_christoffel(metric, x, h=1e-5):
    D = metric.dim
    dg = np.zeros((D, D, D))
    for p in range(D):
        e = np.zeros(D)
        e[p] = h
        dg[p] = (metric_values(metric, x + e) - metric_values(metric, x - e)) / (2 * h)
    ginv = np.linalg.inv(metric_values(metric, x))
    comb = np.einsum("nlk->lnk", dg) + np.einsum("knl->lnk", dg) - dg
    return 0.5 * np.einsum("ml,lnk->mnk", ginv, comb), dg
