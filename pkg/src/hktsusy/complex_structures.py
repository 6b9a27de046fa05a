"""Almost complex structures: canonical quaternionic triples, integrability,
Bismut torsion, HKT covariant constancy and the (anti-)self-dual split of
antisymmetric 4x4 matrices.

Structures are stored with mixed indices, ``T[M, N] = I_M^N``; the lowered
form ``I_MN = I_M^P g_PN`` is computed from the metric when needed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import NotAntisymmetric
from .geometry import _order_of, _trunc, covariant_derivative_2form
from .jets import DEFAULT_ORDER, as_expr, jet_space, lift_array, parse_expr

CAL_I = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float)
CAL_J = np.array([[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]], dtype=float)
CAL_K = np.array([[0, 0, 1, 0], [0, 0, 0, -1], [-1, 0, 0, 0], [0, 1, 0, 0]], dtype=float)

TILDE_I = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float)
TILDE_J = np.array([[0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=float)
TILDE_K = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)

SELF_DUAL = (CAL_I, CAL_J, CAL_K)
ANTI_SELF_DUAL = (TILDE_I, TILDE_J, TILDE_K)
ASD_BASIS = SELF_DUAL + ANTI_SELF_DUAL

LEVI_CIVITA_3 = np.zeros((3, 3, 3))
LEVI_CIVITA_3[0, 1, 2] = LEVI_CIVITA_3[1, 2, 0] = LEVI_CIVITA_3[2, 0, 1] = 1
LEVI_CIVITA_3[0, 2, 1] = LEVI_CIVITA_3[2, 1, 0] = LEVI_CIVITA_3[1, 0, 2] = -1


def levi_civita_4(orientation=1):
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        inv = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        eps[perm] = orientation * (-1) ** inv
    return eps


def hodge_dual(F, orientation=1):
    """``(*F)_MN = 1/2 eps_MNPQ F_PQ`` in a flat 4-dimensional frame."""
    return 0.5 * np.einsum("mnpq,pq->mn", levi_civita_4(orientation), F)


def block_diag(block, n):
    k = block.shape[0]
    out = np.zeros((k * n, k * n))
    for b in range(n):
        out[k * b : k * (b + 1), k * b : k * (b + 1)] = block
    return out


@dataclass
class StructureTriple:
    """One or three almost complex structures ``I_M^N``.

    Each structure is either a constant ``D x D`` array or a grid of field
    expressions.  ``structures[1:]`` may be absent for a single complex
    structure (Kähler inputs).
    """

    structures: list
    kind: str = "custom"
    names: tuple = ("I", "J", "K")
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(self.structures) not in (1, 3):
            raise ValueError("expected one or three structures")
        conv = []
        for s in self.structures:
            if isinstance(s, np.ndarray):
                conv.append(s.astype(float))
            else:
                conv.append(
                    [[parse_expr(e) if isinstance(e, str) else as_expr(e) for e in row] for row in s]
                )
        self.structures = conv

    @property
    def dim(self):
        s = self.structures[0]
        return s.shape[0] if isinstance(s, np.ndarray) else len(s)

    @property
    def is_triple(self):
        return len(self.structures) == 3

    def values(self, point):
        """Structure matrices at ``point`` (no derivatives)."""
        return self.jets(point, 0)[..., 0].real

    def jets(self, point, order=DEFAULT_ORDER):
        """Array ``(n, D, D, size)`` of mixed-index structure jets."""
        point = np.asarray(point, dtype=float)
        sp = jet_space(len(point), order)
        out = []
        for s in self.structures:
            if isinstance(s, np.ndarray):
                out.append(sp.constant(s))
            else:
                D = len(s)
                arr = sp.zeros((D, D))
                for m in range(D):
                    for n in range(D):
                        arr[m, n] = lift_array(s[m][n], point, order)
                out.append(arr)
        return np.array(out)


def canonical_triple(n=1):
    """Block-diagonal quaternionic triple on ``R^{4n}`` built from the unit
    self-dual matrices."""
    if n < 1:
        raise ValueError("need at least one quaternionic block")
    return StructureTriple([block_diag(B, n) for B in SELF_DUAL], kind="canonical")


def kahler_structure(d):
    """``diag(eps, ..., eps)`` with ``eps = [[0, 1], [-1, 0]]`` on ``R^{2d}``."""
    eps = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return StructureTriple([block_diag(eps, d)], kind="canonical")


# ---------------------------------------------------------------------------
# algebraic checks (values at the base point)
# ---------------------------------------------------------------------------

def square_residual(T):
    """``max |I_M^P I_P^N + delta|``."""
    return float(np.max(np.abs(T @ T + np.eye(T.shape[0]))))


def hermiticity_residual(T, g):
    """``max |I_MN + I_NM|`` for the lowered form."""
    low = T @ g
    return float(np.max(np.abs(low + low.T)))


def quaternion_residual(Ts):
    """``max |I^a I^b + delta^ab - eps^abc I^c|`` over all ``a, b``."""
    D = Ts[0].shape[0]
    worst = 0.0
    for a in range(3):
        for b in range(3):
            rhs = -np.eye(D) * (a == b) + sum(LEVI_CIVITA_3[a, b, c] * Ts[c] for c in range(3))
            worst = max(worst, float(np.max(np.abs(Ts[a] @ Ts[b] - rhs))))
    return worst


# ---------------------------------------------------------------------------
# differential checks
# ---------------------------------------------------------------------------

def lowered_jets(geom, T):
    """``I_MN`` jets from mixed ``T`` jets."""
    return geom.lower(T)


def nijenhuis_residual(geom, T):
    """Max-abs entry of ``nabla_[M I_N]P - I_M^Q I_N^S nabla_[Q I_S]P`` at the point.

    Uses Levi-Civita derivatives of the lowered structure; ``T`` holds mixed
    jets of order ``geom.order``.
    """
    low = lowered_jets(geom, T)
    nab = covariant_derivative_2form(geom, low)[..., 0]  # (P, M, N)
    T0 = T[..., 0]
    anti = 0.5 * (nab - np.swapaxes(nab, 0, 1))  # [M, N, P] antisymmetrised in M, N
    rotated = np.einsum("mq,ns,qsp->mnp", T0, T0, anti)
    return float(np.max(np.abs(anti - rotated)))


def nijenhuis_tensor(T, point_dim=None):
    """Connection-free Nijenhuis tensor of mixed jets ``T[M, N] = I_M^N``.

    ``N_MN^P = I_M^Q d_Q I_N^P - I_N^Q d_Q I_M^P - I_Q^P (d_M I_N^Q - d_N I_M^Q)``,
    evaluated at the base point; returns an array ``[M, N, P]``.
    """
    D = T.shape[0]
    sp = jet_space(D, _order_of(D, T))
    dT = sp.gradient(T)[..., 0]  # dT[Q, M, N] = d_Q I_M^N
    T0 = T[..., 0]
    a = np.einsum("mq,qnp->mnp", T0, dT)
    b = np.einsum("qp,mnq->mnp", T0, dT)
    return a - np.swapaxes(a, 0, 1) - (b - np.swapaxes(b, 0, 1))


def bismut_torsion(geom, T):
    """``C_LNK = I_L^P I_N^R I_K^T (nabla_P I_RT + nabla_R I_TP + nabla_T I_PR)``.

    Returns the fully lowered jets ``C[L, N, K]`` (one order below ``geom``).
    """
    low = lowered_jets(geom, T)
    nab = covariant_derivative_2form(geom, low)  # A[P, R, T]
    D = geom.dim
    sp = jet_space(D, _order_of(D, nab))
    cyc = nab + np.einsum("rtp...->prt...", nab) + np.einsum("tpr...->prt...", nab)
    Ts = _trunc(T, sp)
    out = sp.einsum("kt,prt->prk", Ts, cyc)
    out = sp.einsum("nr,prk->pnk", Ts, out)
    out = sp.einsum("lp,pnk->lnk", Ts, out)
    return out


def antisymmetry_residual(C):
    """Largest symmetric part of a rank-3 array under any transposition."""
    C0 = C[..., 0] if np.iscomplexobj(C) and C.ndim == 4 else C
    return float(
        max(
            np.max(np.abs(C0 + np.swapaxes(C0, 0, 1))),
            np.max(np.abs(C0 + np.swapaxes(C0, 1, 2))),
            np.max(np.abs(C0 + np.swapaxes(C0, 0, 2))),
        )
    )


def hkt_defect(geom, T, C):
    """``nabla_P I_MN - 1/2 g^ST (C_TNP I_SM - C_TMP I_SN)`` at the point, ``[P, M, N]``."""
    low = lowered_jets(geom, T)
    nab = covariant_derivative_2form(geom, low)[..., 0]
    ginv = geom.inverse[..., 0]
    C0 = C[..., 0]
    I0 = low[..., 0]
    rhs = 0.5 * (
        np.einsum("st,tnp,sm->pmn", ginv, C0, I0) - np.einsum("st,tmp,sn->pmn", ginv, C0, I0)
    )
    return nab - rhs


@dataclass
class HKTResult:
    residuals: tuple  # per structure, max |hkt_defect|
    torsion_spread: float  # max |C(a) - C(1)| over a = 2, 3
    torsion: np.ndarray  # C jets from the first structure
    algebraic: dict  # square / hermiticity / quaternion residuals

    @property
    def max_residual(self):
        return max(self.residuals)


def hkt_check(geom, triple, order=None):
    """Covariant constancy of all three structures under one Bismut connection.

    Raises :class:`~hktsusy.errors.ClassificationMismatch` when the triple is
    not quaternionic and metric-compatible at the point.
    """
    from .errors import ClassificationMismatch

    if not triple.is_triple:
        raise ClassificationMismatch("HKT check needs three complex structures")
    Tj = triple.jets(geom.point, geom.order)
    T0 = [t[..., 0].real for t in Tj]
    g0 = geom.metric[..., 0].real
    alg = {
        "square": max(square_residual(t) for t in T0),
        "hermiticity": max(hermiticity_residual(t, g0) for t in T0),
        "quaternion": quaternion_residual(T0),
    }
    if max(alg.values()) > 1e-8:
        raise ClassificationMismatch(f"triple is not a compatible quaternionic structure: {alg}")
    Cs = [bismut_torsion(geom, t) for t in Tj]
    C = Cs[0]
    spread = max(float(np.max(np.abs(c[..., 0] - C[..., 0]))) for c in Cs[1:])
    res = tuple(float(np.max(np.abs(hkt_defect(geom, t, C)))) for t in Tj)
    return HKTResult(residuals=res, torsion_spread=spread, torsion=C, algebraic=alg)


# ---------------------------------------------------------------------------
# self-dual / anti-self-dual decomposition
# ---------------------------------------------------------------------------

def asd_decompose(F, atol=1e-12):
    """Coefficients ``(a1, a2, a3, b1, b2, b3)`` of ``F`` in the basis
    ``(I, J, K, I~, J~, K~)``.

    The six basis matrices are orthogonal with squared norm 4 under
    ``<A, B> = tr(A^T B)``, so ``a_i = -tr(F B_i)/4``.
    """
    F = np.asarray(F, dtype=float)
    if F.shape != (4, 4):
        raise ValueError("expected a 4x4 matrix")
    if np.max(np.abs(F + F.T)) > atol * max(1.0, np.max(np.abs(F))):
        raise NotAntisymmetric("matrix is not antisymmetric")
    return np.array([-np.trace(F @ B) / 4 for B in ASD_BASIS])


def asd_reconstruct(coeffs):
    return sum(c * B for c, B in zip(coeffs, ASD_BASIS))


@dataclass
class CommutantResult:
    commutes: bool
    residuals: tuple  # per structure, max-abs of the commutator
    self_dual_part: np.ndarray | None  # (a1, a2, a3) in a canonical flat frame

    @property
    def max_residual(self):
        return max(self.residuals)


def commutant_residuals(F, structures, g=None):
    """``max |F_MN I^N_P - I_M^N F_NP|`` per structure.

    ``F`` is lowered, ``structures`` are mixed ``I_M^N`` values at the point,
    ``I^N_P = g^NQ I_Q^R g_RP``.
    """
    D = F.shape[0]
    g = np.eye(D) if g is None else g
    ginv = np.linalg.inv(g)
    out = []
    for T in structures:
        up_first = ginv @ T @ g
        out.append(float(np.max(np.abs(F @ up_first - T @ F))))
    return tuple(out)


def commutant_check(F, triple, point=None, g=None, tol=1e-10):
    """Does the antisymmetric ``F`` commute with every structure of the triple?

    For a canonical 4-dimensional triple the self-dual coefficients are also
    returned; commuting holds exactly when they vanish.
    """
    F = np.asarray(F, dtype=float)
    if point is None:
        point = np.zeros(triple.dim)
    Ts = list(triple.values(point))
    res = commutant_residuals(F, Ts, g)
    sd = None
    if triple.kind == "canonical" and F.shape == (4, 4):
        sd = asd_decompose(F)[:3]
    return CommutantResult(commutes=max(res) <= tol, residuals=res, self_dual_part=sd)


# ---------------------------------------------------------------------------
# cancellation identity for the extra cubic term
# ---------------------------------------------------------------------------

def x_identity_tensor(I, J, C):
    """Left side of the cyclic ``I J C`` identity as an array ``[M, N, Q]``:

    ``(I_M^P J_N^R - I_N^P J_M^R) C_PRQ + (N Q M) + (Q M N)`` cyclically.
    """
    IJ = np.einsum("mp,nr,prq->mnq", I, J, C)  # I_M^P J_N^R C_PRQ
    A = IJ - np.swapaxes(IJ, 0, 1)  # (M N) block of the first bracket, index Q last
    # second bracket: (I_N^P J_Q^R - I_Q^P J_N^R) C_PRM = A[N, Q, M]
    # third bracket:  (I_Q^P J_M^R - I_M^P J_Q^R) C_PRN = A[Q, M, N]
    return A + np.einsum("nqm->mnq", A) + np.einsum("qmn->mnq", A)


def x_identity_residual(I, J, C):
    return float(np.max(np.abs(x_identity_tensor(I, J, C))))


def random_antisymmetric_tensor(rng, dim=4, rank=3):
    """Totally antisymmetric array with independent normal entries."""
    out = np.zeros((dim,) * rank)
    for combo in itertools.combinations(range(dim), rank):
        v = rng.normal()
        for perm in itertools.permutations(range(rank)):
            inv = sum(1 for i in range(rank) for j in range(i + 1, rank) if perm[i] > perm[j])
            out[tuple(combo[p] for p in perm)] = v * (-1) ** inv
    return out
