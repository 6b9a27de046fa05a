"""Sampled verification of the supersymmetry algebra on zoo entries.

Every check works pointwise on jets at seeded sample points.  Bracket residuals
are the largest modulus among term values at the base point, divided by the
largest such value of ``H = {Q, Q}/(2i)`` at the same point.  The classical
algebra is checked in the form ``{Q^a, Q^b} = 2i delta^ab H``.
"""
from __future__ import annotations

import datetime
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .complex_structures import (
    antisymmetry_residual,
    asd_decompose,
    bismut_torsion,
    commutant_residuals,
    hermiticity_residual,
    hkt_defect,
    nijenhuis_residual,
    quaternion_residual,
    square_residual,
    x_identity_residual,
)
from .errors import ClassificationMismatch
from .geometry import build_geometry, covariant_derivative_2form
from .jets import DEFAULT_ORDER, jet_space, lift_array
from .superspace import bracket, residual_norm
from .supercharges import (
    TORSION_S,
    build_complex_pair,
    build_supercharges,
    charge_order,
    field_strength,
    gauge_deform,
)
from .zoo import ZooEntry, zoo_get

SCHEMA_VERSION = 1
CHECKS = ("classify", "n4", "sfhk", "gauge", "x_identity", "complex_pair")
DEFAULT_TOLERANCES = {
    "classify": 1e-8,
    "n4": 1e-9,
    "sfhk": 1e-9,
    "gauge": 1e-9,
    "x_identity": 1e-12,
    "complex_pair": 1e-9,
}
CONVENTION = "H = {Q, Q}/(2i); closure checked as {Q^a, Q^b} = 2i delta^ab H"
CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def full_norm(a):
    """Largest modulus among all jet coefficients of all terms."""
    if not a.keys:
        return 0.0
    return float(np.max(np.abs(a.coeffs)))


def sample_points(entry, n, seed=0):
    """``n`` seeded points drawn uniformly from the entry's sampling domain."""
    rng = np.random.default_rng(seed)
    return entry.domain.sample(rng, entry.dim, n)


def _as_points(entry, points, seed):
    if isinstance(points, (int, np.integer)):
        return sample_points(entry, int(points), seed)
    return np.atleast_2d(np.asarray(points, dtype=float))


# ---------------------------------------------------------------------------
# per-point context
# ---------------------------------------------------------------------------

class PointContext:
    """Lazily computed geometry, structures and charges at one point."""

    def __init__(self, entry, point, order=DEFAULT_ORDER, s_torsion_coeff=TORSION_S):
        self.entry = entry
        self.point = np.asarray(point, dtype=float)
        self.order = order
        self.s_torsion_coeff = s_torsion_coeff

    @cached_property
    def geom(self):
        return build_geometry(self.entry.metric, self.point, self.order)

    @cached_property
    def structures(self):
        return self.entry.structures.jets(self.point, self.order)

    @cached_property
    def is_triple(self):
        return self.entry.structures.is_triple

    @cached_property
    def torsion(self):
        """Bismut torsion of the first structure (``None`` for a single structure)."""
        if not self.is_triple:
            return None
        return bismut_torsion(self.geom, self.structures[0])

    @cached_property
    def charges(self):
        return build_supercharges(
            self.geom, self.structures, self.torsion, s_torsion_coeff=self.s_torsion_coeff
        )

    @cached_property
    def scale(self):
        return _scale(self.charges.H)

    @cached_property
    def closure(self):
        return closure_matrix(self.charges, self.scale)

    @cached_property
    def gauge_jets(self):
        """``A_M`` lifted to the charge order, shape ``(D, size)``."""
        order = charge_order(self.geom)
        return np.array([lift_array(e, self.point, order) for e in self.entry.gauge])

    def classification(self, tol):
        cache = self.__dict__.setdefault("_classified", {})
        if tol not in cache:
            cache[tol] = classify_point(self, tol)
        return cache[tol]


def _scale(H):
    s = residual_norm(H)
    return s if s > 0 else 1.0


def closure_matrix(charges, scale=None):
    """Normalised residuals of ``{Q^a, Q^b} - 2i delta^ab H`` as a symmetric matrix.

    Also returns the pairwise spread of the Hamiltonians ``{Q^a, Q^a}/(2i)``.
    """
    ch = charges.charges
    H = charges.H
    scale = _scale(H) if scale is None else scale
    n = len(ch)
    M = np.zeros((n, n))
    hams = []
    for a in range(n):
        for b in range(a, n):
            br = bracket(ch[a], ch[b])
            if a == b:
                hams.append(br.scale(1 / 2j))
                br = br - H.scale(2j)
            M[a, b] = M[b, a] = residual_norm(br) / scale
    spread = max(
        (residual_norm(hams[a] - hams[b]) / scale for a in range(n) for b in range(a + 1, n)),
        default=0.0,
    )
    return M, spread


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

@dataclass
class PointClassification:
    point: np.ndarray
    complex: bool
    kahler: bool
    hk: bool
    hkt: bool
    residuals: dict

    @property
    def label(self):
        if self.hk:
            return "HK"
        if self.hkt:
            return "HKT"
        if self.kahler:
            return "Kahler"
        if self.complex:
            return "complex"
        return "generic"

    @property
    def monotone(self):
        """``HK => HKT``, ``HK => Kahler => complex`` and ``HKT => complex``."""
        ok = (not self.kahler or self.complex) and (not self.hkt or self.complex)
        return ok and (not self.hk or (self.kahler and self.hkt))

    def to_dict(self):
        return {
            "label": self.label,
            "complex": self.complex,
            "kahler": self.kahler,
            "hk": self.hk,
            "hkt": self.hkt,
            "residuals": self.residuals,
        }


def classify_point(ctx, tol=DEFAULT_TOLERANCES["classify"]):
    geom = ctx.geom
    Ts = ctx.structures
    T0 = [t[..., 0].real for t in Ts]
    g0 = geom.metric[..., 0].real
    res = {
        "square": max(square_residual(t) for t in T0),
        "hermiticity": max(hermiticity_residual(t, g0) for t in T0),
    }
    if ctx.is_triple:
        res["quaternion"] = quaternion_residual(T0)
    algebraic = max(res.values()) <= tol
    res["nijenhuis"] = [nijenhuis_residual(geom, t) for t in Ts]
    res["levi_civita"] = [
        float(np.max(np.abs(covariant_derivative_2form(geom, geom.lower(t))[..., 0])))
        for t in Ts
    ]
    is_complex = algebraic and max(res["nijenhuis"]) <= tol
    kahler = is_complex and res["levi_civita"][0] <= tol
    hk = hkt = False
    if ctx.is_triple:
        hk = is_complex and max(res["levi_civita"]) <= tol
        C = ctx.torsion
        res["torsion"] = float(np.max(np.abs(C[..., 0])))
        res["torsion_antisymmetry"] = antisymmetry_residual(C[..., 0])
        spread = max(
            float(np.max(np.abs(bismut_torsion(geom, t)[..., 0] - C[..., 0]))) for t in Ts[1:]
        )
        res["torsion_spread"] = spread
        res["hkt"] = [float(np.max(np.abs(hkt_defect(geom, t, C)))) for t in Ts]
        hkt = (
            is_complex
            and max(res["hkt"]) <= tol
            and spread <= tol
            and res["torsion_antisymmetry"] <= tol
        )
    else:
        res["torsion"] = float(np.max(np.abs(bismut_torsion(geom, Ts[0])[..., 0])))
    return PointClassification(ctx.point, is_complex, kahler, hk, hkt, res)


def classify(entry, points=20, tol=DEFAULT_TOLERANCES["classify"], *, seed=0, order=DEFAULT_ORDER):
    """Classification flags at each sampled point."""
    pts = _as_points(entry, points, seed)
    return [classify_point(PointContext(entry, p, order), tol) for p in pts]


# ---------------------------------------------------------------------------
# per-point checks; each returns (residual, record, messages)
# ---------------------------------------------------------------------------

def _precondition(ctx, allowed, tol):
    cls = ctx.classification(tol)
    if cls.label in allowed:
        return cls, None
    reason = f"point classified {cls.label}, needs one of {sorted(allowed)}"
    nij = max(cls.residuals["nijenhuis"])
    if nij > tol:
        reason += f"; Nijenhuis residual {nij:.3g} (structures not integrable)"
    return cls, reason


def _n4_at(ctx, tol, class_tol):
    allowed = {"HK", "HKT"} if ctx.is_triple else {"HK", "HKT", "Kahler"}
    _, bad = _precondition(ctx, allowed, class_tol)
    M, spread = ctx.closure
    record = {"closure": M.tolist(), "hamiltonian_spread": spread, "scale": ctx.scale}
    if bad:
        record["precondition"] = bad
    if ctx.is_triple:
        record["jacobi"] = _jacobi_spot(ctx)
    r = float(M.max())
    msgs = [f"closure residual {r:.3g}"] if r > tol else []
    if bad and r > tol:
        msgs.append(bad)
    return r, record, msgs


def _jacobi_spot(ctx):
    """``{S1,S2}`` residual against the ``{Q,S}`` and SFHK residuals, plus the
    graded Jacobi residual for ``(S1, F2, Q)``."""
    ch = ctx.charges
    Q, S1, F2 = ch.Q, ch.S[0], ch.F[1]
    M, _ = ctx.closure
    jac = (
        -bracket(S1, bracket(F2, Q)) + bracket(F2, bracket(Q, S1)) + bracket(Q, bracket(S1, F2))
    )
    return {
        "s1s2": float(M[1, 2]),
        "q_s_max": float(M[0, 1:].max()),
        "jacobi_residual": residual_norm(jac) / ctx.scale,
    }


def _sfhk_at(ctx, tol, class_tol):
    _, bad = _precondition(ctx, {"HK", "HKT"}, class_tol)
    ch = ctx.charges
    refs = [bracket(ch.Q, F) for F in ch.F]  # S^(c) generated as {Q, F^(c)}
    sfhk = [
        residual_norm(bracket(ch.S[a], ch.F[b]) + refs[c]) / ctx.scale for a, b, c in CYCLIC
    ]
    s_vs = [
        full_norm(ch.S[a].truncate(refs[a].order) - refs[a]) / ctx.scale for a in range(3)
    ]
    record = {"sfhk": sfhk, "s_vs_bracket": s_vs}
    if bad:
        record["precondition"] = bad
    r = max(sfhk + s_vs)
    msgs = [f"SFHK residual {max(sfhk):.3g}, S - {{Q,F}} residual {max(s_vs):.3g}"] if r > tol else []
    if bad and r > tol:
        msgs.append(bad)
    return r, record, msgs


def flat_frame_structures(geom, Ts):
    """Mixed structures ``I_A^B = e^M_A I_M^N e^B_N`` at the point."""
    Einv = geom.inverse_vielbein[..., 0].real
    E = geom.vielbein[..., 0].real
    return [Einv.T @ t[..., 0].real @ E.T for t in Ts]


def _x_identity_at(ctx, tol, class_tol):
    cls, bad = _precondition(ctx, {"HK", "HKT"}, class_tol)
    if bad:
        return math.inf, {"precondition": bad}, [bad]
    geom = ctx.geom
    I, J = flat_frame_structures(geom, ctx.structures[:2])
    Cf = geom.to_flat(ctx.torsion, (0, 1, 2))[..., 0].real
    r = x_identity_residual(I, J, Cf) / max(1.0, float(np.max(np.abs(Cf))))
    msgs = [f"X-identity residual {r:.3g}"] if r > tol else []
    return r, {"x_identity": r}, msgs


def _gauge_at(ctx, tol, class_tol):
    geom = ctx.geom
    sp = jet_space(geom.dim, charge_order(geom))
    A = ctx.gauge_jets
    F = field_strength(sp, A)[..., 0].real
    g0 = geom.metric[..., 0].real
    T0 = [t[..., 0].real for t in ctx.structures]
    comm = commutant_residuals(F, T0, g0)
    record = {"field_strength": F.tolist(), "commutant": list(comm)}
    if ctx.entry.structures.kind == "canonical" and geom.dim == 4:
        Einv = geom.inverse_vielbein[..., 0].real
        record["self_dual_part"] = asd_decompose(Einv.T @ F @ Einv, atol=1e-9)[:3].tolist()
    deformed = gauge_deform(ctx.charges, A)
    M, spread = closure_matrix(deformed, _scale(deformed.H))
    record["closure"] = M.tolist()
    record["hamiltonian_spread"] = spread
    msgs = []
    if max(comm) > tol:
        msgs.append(f"commutant: F does not commute with the complex structures (residual {max(comm):.3g})")
    if M.max() > tol:
        msgs.append(f"gauged closure residual {M.max():.3g}")
    return float(max(max(comm), M.max())), record, msgs


def _complex_pair_at(ctx, tol, class_tol):
    geom = ctx.geom
    Q, Qbar = build_complex_pair(geom)
    Hc = bracket(Qbar, Q).scale(0.5 / 1j)
    scale = _scale(Hc)
    nil = [residual_norm(bracket(Q, Q)) / scale, residual_norm(bracket(Qbar, Qbar)) / scale]
    # momentum-squared coefficients of H against 1/2 g^MN
    D = geom.dim
    ginv = geom.inverse[..., 0]
    worst = 0.0
    for m in range(D):
        for n in range(m, D):
            mom = [0] * D
            mom[m] += 1
            mom[n] += 1
            c = Hc.coefficient(tuple(mom), ())[0]
            want = 0.5 * ginv[m, n] * (1 if m == n else 2)
            worst = max(worst, abs(c - want))
    sym = worst / scale
    record = {"nilpotency": nil, "leading_symbol": sym}
    r = max(nil + [sym])
    msgs = [f"complex pair residual {r:.3g}"] if r > tol else []
    return r, record, msgs


_RUNNERS = {
    "n4": _n4_at,
    "sfhk": _sfhk_at,
    "gauge": _gauge_at,
    "x_identity": _x_identity_at,
    "complex_pair": _complex_pair_at,
}


def applicable_checks(entry):
    out = ["classify", "n4", "complex_pair"]
    if entry.structures.is_triple:
        out.insert(2, "sfhk")
        if entry.expected_class in ("HK", "HKT"):
            out.insert(3, "x_identity")
    if entry.gauge is not None:
        out.append("gauge")
    return out


# ---------------------------------------------------------------------------
# fragments
# ---------------------------------------------------------------------------

@dataclass
class CheckFragment:
    """Outcome of one named check on one entry."""

    check: str
    entry: str
    tolerance: float
    residuals: list
    records: list
    failures: list = field(default_factory=list)
    expected_to_pass: bool = True

    @property
    def max_residual(self):
        return max(self.residuals, default=0.0)

    @property
    def passed(self):
        return all(r <= self.tolerance for r in self.residuals)

    @property
    def as_expected(self):
        return self.passed == self.expected_to_pass

    def summary(self):
        return {
            "passed": self.passed,
            "expected_to_pass": self.expected_to_pass,
            "as_expected": self.as_expected,
            "max_residual": _finite(self.max_residual),
            "tolerance": self.tolerance,
            "failures": self.failures,
        }


def _finite(x):
    return x if math.isfinite(x) else None


def _fragment(check, entry, tol, results):
    residuals = [r for r, _, _ in results]
    records = [rec for _, rec, _ in results]
    # messages from the worst failing point
    failing = [i for i, (_, _, m) in enumerate(results) if m]
    worst = max(failing, key=lambda i: residuals[i], default=None)
    summary = [] if worst is None else [f"point {worst}: {m}" for m in results[worst][2]]
    return CheckFragment(
        check=check,
        entry=entry.name,
        tolerance=tol,
        residuals=residuals,
        records=records,
        failures=summary,
        expected_to_pass=check not in entry.expected_failures,
    )


def _run_check(check, entry, points, tol, seed, order, class_tol, s_torsion_coeff=TORSION_S):
    pts = _as_points(entry, points, seed)
    ctxs = [PointContext(entry, p, order, s_torsion_coeff) for p in pts]
    return _fragment(check, entry, tol, [_RUNNERS[check](c, tol, class_tol) for c in ctxs])


def verify_n4_closure(entry, points=20, tol=DEFAULT_TOLERANCES["n4"], *, seed=0,
                      order=DEFAULT_ORDER, strict=True):
    """All brackets among ``(Q, S^(1), S^(2), S^(3))`` against ``2i delta^ab H``.

    With ``strict`` a point that is not HK or HKT (Kahler for a single
    structure) raises :class:`ClassificationMismatch`; otherwise the residuals
    are still computed and the failed precondition is recorded.
    """
    frag = _run_check("n4", entry, points, tol, seed, order, DEFAULT_TOLERANCES["classify"])
    _maybe_raise(frag, strict)
    return frag


def verify_sfhk(entry, points=20, tol=DEFAULT_TOLERANCES["sfhk"], *, seed=0,
                order=DEFAULT_ORDER, s_torsion_coeff=TORSION_S, strict=True):
    """``{S^(a), F^(b)} = -S^(c)`` cyclically, with ``S^(c)`` generated as ``{Q, F^(c)}``.

    ``s_torsion_coeff`` replaces the torsion coefficient of the constructed
    ``S`` charges (mutation testing); the reference side is unaffected.
    Also records ``S^(a) - {Q, F^(a)}`` over all jet coefficients.
    """
    if not entry.structures.is_triple:
        raise ClassificationMismatch(f"{entry.name} has a single complex structure")
    frag = _run_check(
        "sfhk", entry, points, tol, seed, order, DEFAULT_TOLERANCES["classify"], s_torsion_coeff
    )
    _maybe_raise(frag, strict)
    return frag


def verify_gauge(entry, points=20, tol=DEFAULT_TOLERANCES["gauge"], *, seed=0, order=DEFAULT_ORDER):
    """Commutant check of ``F_MN`` and closure of the gauge-deformed charges."""
    if entry.gauge is None:
        raise ValueError(f"{entry.name} has no gauge potential")
    return _run_check("gauge", entry, points, tol, seed, order, DEFAULT_TOLERANCES["classify"])


def verify_x_identity(entry, points=20, tol=DEFAULT_TOLERANCES["x_identity"], *, seed=0,
                      order=DEFAULT_ORDER):
    """Cyclic ``I J C`` identity with the flat-frame torsion at each point."""
    return _run_check("x_identity", entry, points, tol, seed, order, DEFAULT_TOLERANCES["classify"])


def verify_complex_pair(entry, points=20, tol=DEFAULT_TOLERANCES["complex_pair"], *, seed=0,
                        order=DEFAULT_ORDER):
    """Nilpotency of the complex de Rham pair and the leading symbol of its Hamiltonian."""
    return _run_check("complex_pair", entry, points, tol, seed, order, DEFAULT_TOLERANCES["classify"])


def _maybe_raise(frag, strict):
    if not strict:
        return
    bad = [rec["precondition"] for rec in frag.records if "precondition" in rec]
    if bad:
        raise ClassificationMismatch(f"{frag.entry}: {bad[0]}")


def x_identity_random_trials(rng, n=100, I=None, J=None):
    """Residuals of the identity for ``n`` random totally antisymmetric ``C``."""
    from .complex_structures import CAL_I, CAL_J, random_antisymmetric_tensor

    I = CAL_I if I is None else I
    J = CAL_J if J is None else J
    return np.array(
        [x_identity_residual(I, J, random_antisymmetric_tensor(rng, I.shape[0])) for _ in range(n)]
    )


# ---------------------------------------------------------------------------
# suite
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """What to verify and how.

    ``manifolds`` holds zoo names or :class:`ZooEntry` objects.  ``tolerances``
    overrides entries of :data:`DEFAULT_TOLERANCES`.
    """

    manifolds: list = field(default_factory=lambda: [])
    checks: tuple = CHECKS
    points: int = 20
    seed: int = 0
    jet_order: int = DEFAULT_ORDER
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.jet_order < 3:
            raise ValueError("jet order must be at least 3")
        if self.points < 1:
            raise ValueError("need at least one sample point")
        if not self.checks:
            raise ValueError("no checks requested")
        unknown = set(self.checks) - set(CHECKS)
        if unknown:
            raise ValueError(f"unknown checks: {sorted(unknown)}")
        bad = set(self.tolerances) - set(CHECKS)
        if bad:
            raise ValueError(f"tolerance for unknown checks: {sorted(bad)}")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")

    @property
    def tol(self):
        return {**DEFAULT_TOLERANCES, **self.tolerances}

    def entries(self):
        return [m if isinstance(m, ZooEntry) else zoo_get(m) for m in self.manifolds]


@dataclass
class VerificationReport:
    """Per-entry point records and check outcomes; see :meth:`body` for the JSON layout."""

    config: dict
    entries: list
    generated_at: str = ""

    @property
    def fragments(self):
        return [f for e in self.entries for f in e["fragments"]]

    @property
    def passed(self):
        return all(f.passed for f in self.fragments)

    @property
    def as_expected(self):
        return all(f.as_expected for f in self.fragments)

    @property
    def monotone(self):
        return all(
            rec["classification"]["monotone"] for e in self.entries for rec in e["records"]
        )

    def failures(self):
        out = []
        for f in self.fragments:
            if not f.passed:
                detail = "; ".join(f.failures) if f.failures else f"residual {f.max_residual:.3g}"
                out.append(f"{f.entry}/{f.check}: {detail}")
        return out

    def body(self):
        """Deterministic part of the report (everything except the timestamp)."""
        entries = []
        for e in self.entries:
            entries.append(
                {
                    "name": e["name"],
                    "expected_class": e["expected_class"],
                    "description": e["description"],
                    "records": e["records"],
                    "checks": {f.check: f.summary() for f in e["fragments"]},
                }
            )
        return {
            "schema": SCHEMA_VERSION,
            "convention": CONVENTION,
            **self.config,
            "entries": entries,
            "summary": {
                "passed": self.passed,
                "as_expected": self.as_expected,
                "monotone_classification": self.monotone,
                "entries": len(self.entries),
                "failures": self.failures(),
            },
        }

    def to_dict(self):
        return {**self.body(), "generated_at": self.generated_at}

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, allow_nan=False)

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    def table(self):
        """Human-readable summary: one row per entry and check."""
        rows = [("entry", "check", "max residual", "tol", "result")]
        for f in self.fragments:
            if f.passed:
                verdict = "pass"
            else:
                verdict = "FAIL" + ("" if f.expected_to_pass else " (expected)")
            res = f"{f.max_residual:.2e}" if math.isfinite(f.max_residual) else "n/a"
            rows.append((f.entry, f.check, res, f"{f.tolerance:.0e}", verdict))
        widths = [max(len(r[i]) for r in rows) for i in range(5)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        status = "PASS" if self.passed else "FAIL"
        lines.append("")
        lines.append(f"overall: {status} ({len(self.fragments)} checks, {CONVENTION})")
        for msg in self.failures():
            lines.append(f"  failed {msg}")
        return "\n".join(lines)


def _evaluate_point(entry, point, checks, tol, order):
    ctx = PointContext(entry, point, order)
    cls = ctx.classification(tol["classify"])
    record = {
        "point": [float(x) for x in point],
        "classification": {**cls.to_dict(), "monotone": cls.monotone},
    }
    results = {}
    for check in checks:
        if check == "classify":
            continue
        r, rec, msgs = _RUNNERS[check](ctx, tol[check], tol["classify"])
        record[check] = rec
        results[check] = (r, rec, msgs)
    return cls, record, results


def run_suite(config):
    """Run every requested and applicable check on every entry."""
    tol = config.tol
    entries_out = []
    pool = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
    try:
        for entry in config.entries():
            checks = [c for c in config.checks if c in applicable_checks(entry)]
            pts = sample_points(entry, config.points, config.seed)
            args = [(entry, p, checks, tol, config.jet_order) for p in pts]
            if pool is None:
                outs = [_evaluate_point(*a) for a in args]
            else:
                outs = list(pool.map(lambda a: _evaluate_point(*a), args))
            records = [rec for _, rec, _ in outs]
            if not all(r["classification"]["monotone"] for r in records):
                raise AssertionError(f"non-monotone classification flags on {entry.name}")
            frags = []
            for check in checks:
                if check == "classify":
                    frags.append(_classification_fragment(entry, [c for c, _, _ in outs], tol))
                else:
                    frags.append(_fragment(check, entry, tol[check], [o[2][check] for o in outs]))
            entries_out.append(
                {
                    "name": entry.name,
                    "expected_class": entry.expected_class,
                    "description": entry.description,
                    "records": records,
                    "fragments": frags,
                }
            )
    finally:
        if pool is not None:
            pool.shutdown()
    cfg = {
        "seed": config.seed,
        "jet_order": config.jet_order,
        "points": config.points,
        "checks": list(config.checks),
        "tolerances": tol,
    }
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    report = VerificationReport(config=cfg, entries=entries_out, generated_at=stamp)
    if config.output:
        report.write(config.output)
    return report


def _classification_fragment(entry, classes, tol):
    results = []
    for c in classes:
        ok = c.label == entry.expected_class
        msgs = [] if ok else [f"classified {c.label}, expected {entry.expected_class}"]
        results.append((0.0 if ok else math.inf, {"label": c.label}, msgs))
    return _fragment("classify", entry, tol["classify"], results)
