"""Named example manifolds with known classification."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complex_structures import (
    ANTI_SELF_DUAL,
    CAL_K,
    SELF_DUAL,
    StructureTriple,
    canonical_triple,
    kahler_structure,
)
from .errors import UnknownEntry
from .geometry import MetricField, conformally_flat, flat_metric, metric_from_kahler_potential
from .jets import Var, as_expr, parse_expr

CLASSES = ("generic", "complex", "Kahler", "HKT", "HK")


@dataclass(frozen=True)
class SamplingDomain:
    """Box ``[low, high]^D``, optionally cut to an annulus ``r_min < |x| < r_max``."""

    low: float = -1.0
    high: float = 1.0
    r_min: float | None = None
    r_max: float | None = None

    def sample(self, rng, dim, n):
        out = []
        while len(out) < n:
            if self.r_min is not None:
                # uniform direction, radius uniform in the shell volume
                v = rng.normal(size=dim)
                v /= np.linalg.norm(v)
                u = rng.uniform(self.r_min**dim, self.r_max**dim)
                out.append(v * u ** (1 / dim))
            else:
                out.append(rng.uniform(self.low, self.high, size=dim))
        return np.array(out)

    def contains(self, x):
        r = np.linalg.norm(x)
        if self.r_min is not None:
            return self.r_min < r < self.r_max
        return bool(np.all((self.low <= x) & (x <= self.high)))


@dataclass(frozen=True)
class ZooEntry:
    name: str
    metric: MetricField
    structures: StructureTriple
    expected_class: str
    domain: SamplingDomain = SamplingDomain()
    gauge: tuple | None = None  # A_M as field expressions
    expected_failures: frozenset = frozenset()  # checks this entry is meant to fail
    description: str = ""

    @property
    def dim(self):
        return self.metric.dim


def linear_potential(F):
    """``A_M = 1/2 x^N F_NM``, whose field strength ``d_M A_N - d_N A_M`` is ``F``."""
    F = np.asarray(F, dtype=float)
    D = F.shape[0]
    out = []
    for m in range(D):
        e = as_expr(0.0)
        for n in range(D):
            if F[n, m]:
                e = e + 0.5 * F[n, m] * Var(n)
        out.append(e)
    return tuple(out)


def rotated_triple(angle_tan_half=None):
    """Quaternionic triple ``(c I + s J, -s I + c J, K)`` with a position-dependent
    angle ``theta = 2 arctan(x1)``, written rationally in ``x1``."""
    c = "(1 - x1^2)/(1 + x1^2)"
    s = "(2*x1)/(1 + x1^2)"
    if angle_tan_half is not None:
        t = angle_tan_half
        c = f"(1 - ({t})^2)/(1 + ({t})^2)"
        s = f"(2*({t}))/(1 + ({t})^2)"

    def combo(u, v):
        # u * I + v * J entrywise
        rows = []
        for m in range(4):
            row = []
            for n in range(4):
                parts = []
                if SELF_DUAL[0][m, n]:
                    parts.append(f"{'-' if SELF_DUAL[0][m, n] < 0 else ''}({u})")
                if SELF_DUAL[1][m, n]:
                    parts.append(f"{'-' if SELF_DUAL[1][m, n] < 0 else ''}({v})")
                row.append(" + ".join(parts) if parts else "0")
            rows.append(row)
        return rows

    return StructureTriple([combo(c, s), combo(f"-{s}", c), CAL_K.copy()])


def random_polynomial_metric(rng, dim=4, eps=0.1):
    """``delta + eps * P(x)`` with symmetric random quadratic polynomials ``P_MN``.

    Positive definite on the unit box for small ``eps``.
    """
    entries = [[None] * dim for _ in range(dim)]
    for m in range(dim):
        for n in range(m, dim):
            e = as_expr(1.0 if m == n else 0.0) + eps * rng.normal()
            for k in range(dim):
                e = e + eps * rng.normal() * Var(k)
                for l in range(k, dim):
                    e = e + eps * rng.normal() * Var(k) * Var(l)
            entries[m][n] = entries[n][m] = e
    return MetricField(entries, name="random polynomial")


S4_FACTOR = "1 + (x1^2 + x2^2 + x3^2 + x4^2)/2"
GENERIC_FACTOR = "exp((x1 - x2*x3)/4)*(1 + x4^2/3)"
HOPF_FACTOR = "sqrt(x1^2 + x2^2 + x3^2 + x4^2)"
KAHLER_POTENTIAL = "z1*zb1 + z2*zb2 + (z1*zb1)^2"

ASD_FIELD = 0.7 * ANTI_SELF_DUAL[0] - 0.4 * ANTI_SELF_DUAL[1] + 0.9 * ANTI_SELF_DUAL[2]
SD_FIELD = 0.5 * SELF_DUAL[0] + 0.2 * SELF_DUAL[1] - 0.3 * SELF_DUAL[2]


def conf_flat_generic(f=GENERIC_FACTOR, name="conf_flat_generic", domain=SamplingDomain()):
    """HKT entry for the conformally flat metric ``delta / f^2`` with a user ``f``."""
    f = parse_expr(f, dim=4) if isinstance(f, str) else as_expr(f)
    return ZooEntry(
        name=name,
        metric=conformally_flat(f),
        structures=canonical_triple(),
        expected_class="HKT",
        domain=domain,
        description=f"conformally flat delta/f^2 with f = {f}",
    )


def _build_registry():
    flat = flat_metric(4)
    entries = [
        ZooEntry(
            name="flat_r4",
            metric=flat,
            structures=canonical_triple(),
            expected_class="HK",
            description="flat R^4 with the canonical quaternionic triple",
        ),
        ZooEntry(
            name="conf_flat_s4",
            metric=conformally_flat(S4_FACTOR),
            structures=canonical_triple(),
            expected_class="HKT",
            description=f"S^4 chart, delta/f^2 with f = {S4_FACTOR}",
        ),
        conf_flat_generic(),
        ZooEntry(
            name="hopf",
            metric=conformally_flat(HOPF_FACTOR),
            structures=canonical_triple(),
            expected_class="HKT",
            # 1 < |z| < 2 with |z|^2 = |x|^2 / 2
            domain=SamplingDomain(r_min=np.sqrt(2.0), r_max=2 * np.sqrt(2.0)),
            description="Hopf metric dzbar dz / (zbar z) = dx^2 / x^2 on 1 < |z| < 2",
        ),
        ZooEntry(
            name="kahler_from_potential",
            metric=metric_from_kahler_potential(KAHLER_POTENTIAL, 2),
            structures=kahler_structure(2),
            expected_class="Kahler",
            description=f"Kahler metric of K = {KAHLER_POTENTIAL}",
        ),
        ZooEntry(
            name="fubini_study_cp1",
            metric=metric_from_kahler_potential("log(1 + z1*zb1)", 1),
            structures=kahler_structure(1),
            expected_class="Kahler",
            description="two-dimensional Kahler metric of K = log(1 + z zbar)",
        ),
        ZooEntry(
            name="broken_complex",
            metric=flat,
            structures=rotated_triple(),
            expected_class="generic",
            expected_failures=frozenset({"n4", "sfhk"}),
            description="flat R^4, canonical triple rotated by 2 arctan(x1) in the I-J plane (not integrable)",
        ),
        ZooEntry(
            name="asd_gauge",
            metric=flat,
            structures=canonical_triple(),
            expected_class="HK",
            gauge=linear_potential(ASD_FIELD),
            description="flat R^4 with a constant anti-self-dual field strength",
        ),
        ZooEntry(
            name="sd_gauge",
            metric=flat,
            structures=canonical_triple(),
            expected_class="HK",
            gauge=linear_potential(SD_FIELD),
            expected_failures=frozenset({"gauge"}),
            description="flat R^4 with a constant self-dual field strength (breaks N=4)",
        ),
        ZooEntry(
            name="asd_gauge_s4",
            metric=conformally_flat(S4_FACTOR),
            structures=canonical_triple(),
            expected_class="HKT",
            gauge=linear_potential(ASD_FIELD),
            description="S^4 chart with a constant anti-self-dual field strength",
        ),
    ]
    return {e.name: e for e in entries}


REGISTRY = _build_registry()


def zoo_names():
    return list(REGISTRY)


def zoo_get(name):
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownEntry(name) from None
