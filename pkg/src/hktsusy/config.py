"""Plain-text run configuration.

A file has up to four sections; ``#`` starts a comment line and indented lines
continue the previous value::

    [metric]
    dim = 4
    g = 1/f2; 0; 0; 0        # one row per line, entries separated by ';'
        1/f2; 0; 0           # rows may stop at the diagonal (upper triangle)
        ...
    # or instead of g:  conformal_factor = <f>   or   kahler_potential = <K>

    [structures]
    kind = canonical         # or kahler, or I1 / I2 / I3 grids like g

    [gauge]
    A = <A1>; <A2>; <A3>; <A4>

    [run]
    name = my_manifold
    expected_class = HKT
    manifolds = flat_r4, hopf
    checks = classify, n4
    points = 20
    seed = 7
    jet_order = 3
    tolerance = 1e-9         # or: n4 = 1e-9, sfhk = 1e-8
    output = report.json
    threads = 1
    box = -1, 1              # or: annulus = 1.5, 2.5

Every error is a :class:`~hktsusy.errors.ParseError` carrying the line and
column of the offending text.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .complex_structures import StructureTriple, canonical_triple, kahler_structure
from .errors import ParseError
from .geometry import MetricField, conformally_flat, metric_from_kahler_potential
from .jets import parse_expr
from .verifier import CHECKS, RunConfig
from .zoo import CLASSES, SamplingDomain, ZooEntry

SECTIONS = {
    "metric": {"dim", "g", "conformal_factor", "kahler_potential"},
    "structures": {"kind", "I1", "I2", "I3"},
    "gauge": {"A"},
    "run": {
        "name", "expected_class", "manifolds", "checks", "points", "seed", "jet_order",
        "tolerance", "output", "threads", "box", "annulus",
    },
}


@dataclass
class Line:
    text: str
    line: int
    column: int  # 1-based column of text[0]


@dataclass
class Value:
    key: str
    line: int
    column: int
    lines: list = field(default_factory=list)

    @property
    def text(self):
        return " ".join(l.text for l in self.lines).strip()

    def error(self, message):
        return ParseError(message, self.line, self.column)


def parse_sections(text):
    """Split text into ``{section: {key: Value}}``."""
    sections = {}
    current = None
    last = None
    for n, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        body = raw.split("#", 1)[0].rstrip()
        col = len(raw) - len(raw.lstrip()) + 1
        if stripped.startswith("["):
            m = re.fullmatch(r"\[\s*(\w+)\s*\]", body.strip())
            if not m:
                raise ParseError("malformed section header", n, col)
            name = m.group(1)
            if name not in SECTIONS:
                raise ParseError(f"unknown section [{name}]", n, col)
            if name in sections:
                raise ParseError(f"duplicate section [{name}]", n, col)
            current = sections[name] = {}
            last = None
            continue
        if raw[0] in " \t" and last is not None:
            last.lines.append(Line(body.strip(), n, col))
            continue
        if current is None:
            raise ParseError("key outside of any section", n, col)
        if "=" not in body:
            raise ParseError("expected 'key = value'", n, col)
        key, _, rest = body.partition("=")
        key = key.strip()
        if key not in SECTIONS[_section_of(sections, current)]:
            raise ParseError(f"unknown key {key!r}", n, col)
        if key in current:
            raise ParseError(f"duplicate key {key!r}", n, col)
        vcol = body.index("=") + 1
        vcol += len(rest) - len(rest.lstrip()) + 1
        last = current[key] = Value(key, n, col, [Line(rest.strip(), n, vcol)] if rest.strip() else [])
    return sections


def _section_of(sections, current):
    return next(name for name, body in sections.items() if body is current)


def _expr(text, line, column, dim=None):
    try:
        return parse_expr(text, dim=dim)
    except ParseError as exc:
        inner = exc.column or 1
        raise ParseError(str(exc).split(" (column")[0], line, column + inner - 1) from None


def _cells(ln):
    """Split one ';'-separated row into (text, column) pairs."""
    out = []
    pos = 0
    for part in ln.text.split(";"):
        lead = len(part) - len(part.lstrip())
        if part.strip():
            out.append((part.strip(), ln.column + pos + lead))
        else:
            raise ParseError("empty grid entry", ln.line, ln.column + pos)
        pos += len(part) + 1
    return out


def _grid(value, dim, upper=False):
    rows = [l for l in value.lines if l.text]
    if len(rows) != dim:
        raise value.error(f"{value.key} needs {dim} rows, found {len(rows)}")
    grid = []
    for m, ln in enumerate(rows):
        cells = _cells(ln)
        allowed = {dim, dim - m} if upper else {dim}
        if len(cells) not in allowed:
            raise ParseError(f"row {m + 1} of {value.key} has {len(cells)} entries", ln.line, ln.column)
        grid.append([_expr(t, ln.line, c, dim) for t, c in cells])
    return grid


def _int(value, low=None):
    try:
        out = int(value.text)
    except ValueError:
        raise ParseError(f"{value.key} must be an integer", value.line, value.lines[0].column) from None
    if low is not None and out < low:
        raise ParseError(f"{value.key} must be at least {low}", value.line, value.lines[0].column)
    return out


def _floats(value, n):
    try:
        out = [float(p) for p in value.text.split(",")]
    except ValueError:
        raise ParseError(f"{value.key} expects numbers", value.line, value.lines[0].column) from None
    if len(out) != n:
        raise ParseError(f"{value.key} expects {n} numbers", value.line, value.lines[0].column)
    return out


def _tolerances(value):
    text = value.text
    col = value.lines[0].column
    try:
        if "=" not in text:
            return {c: float(text) for c in CHECKS if c != "classify"}
        out = {}
        for part in text.split(","):
            k, _, v = part.partition("=")
            k = k.strip()
            if k not in CHECKS:
                raise ParseError(f"unknown check {k!r} in tolerance", value.line, col)
            out[k] = float(v)
        return out
    except ValueError:
        raise ParseError("malformed tolerance", value.line, col) from None


def _list(value):
    return [p.strip() for p in value.text.split(",") if p.strip()]


def _custom_entry(sections):
    metric_sec = sections["metric"]
    run = sections.get("run", {})
    name = run["name"].text if "name" in run else "custom"
    kinds = [k for k in ("g", "conformal_factor", "kahler_potential") if k in metric_sec]
    if len(kinds) != 1:
        raise ParseError("[metric] needs exactly one of g, conformal_factor, kahler_potential", 1, 1)
    kind = kinds[0]
    v = metric_sec[kind]
    if kind == "kahler_potential":
        d = _int(metric_sec["dim"], 2) // 2 if "dim" in metric_sec else 2
        ln = v.lines[0]
        expr = _expr(v.text, ln.line, ln.column, 2 * d)
        metric = metric_from_kahler_potential(expr, d)
    elif kind == "conformal_factor":
        ln = v.lines[0]
        metric = conformally_flat(_expr(v.text, ln.line, ln.column, 4))
    else:
        if "dim" not in metric_sec:
            raise v.error("g needs 'dim'")
        D = _int(metric_sec["dim"], 1)
        grid = _grid(v, D, upper=True)
        try:
            metric = MetricField.from_strings(grid, name=name)
        except ValueError as exc:
            raise v.error(str(exc)) from None
    D = metric.dim
    structures = _structures(sections.get("structures", {}), D)
    gauge = None
    if "gauge" in sections:
        a = sections["gauge"].get("A")
        if a is None:
            raise ParseError("[gauge] needs A", 1, 1)
        cells = [c for ln in a.lines for c in [(t, ln.line, col) for t, col in _cells(ln)]]
        if len(cells) != D:
            raise a.error(f"A needs {D} entries, found {len(cells)}")
        gauge = tuple(_expr(t, line, col, D) for t, line, col in cells)
    expected = run["expected_class"].text if "expected_class" in run else "HKT"
    if expected not in CLASSES:
        v = run["expected_class"]
        raise ParseError(f"expected_class must be one of {', '.join(CLASSES)}", v.line, v.lines[0].column)
    domain = SamplingDomain()
    if "box" in run:
        lo, hi = _floats(run["box"], 2)
        domain = SamplingDomain(lo, hi)
    if "annulus" in run:
        r0, r1 = _floats(run["annulus"], 2)
        domain = SamplingDomain(r_min=r0, r_max=r1)
    return ZooEntry(
        name=name,
        metric=metric,
        structures=structures,
        expected_class=expected,
        domain=domain,
        gauge=gauge,
        description="from configuration file",
    )


def _structures(sec, D):
    kind = sec["kind"].text if "kind" in sec else None
    grids = [k for k in ("I1", "I2", "I3") if k in sec]
    if kind and grids:
        raise sec["kind"].error("give either kind or explicit I grids")
    if grids:
        if grids not in (["I1"], ["I1", "I2", "I3"]):
            raise ParseError("explicit structures need I1 alone or I1, I2, I3", 1, 1)
        return StructureTriple([_grid(sec[k], D) for k in grids])
    if kind in (None, "canonical"):
        if D % 4:
            raise ParseError(f"canonical quaternionic structures need dim divisible by 4, got {D}", 1, 1)
        return canonical_triple(D // 4)
    if kind == "kahler":
        if D % 2:
            raise ParseError(f"kahler structure needs even dim, got {D}", 1, 1)
        return kahler_structure(D // 2)
    v = sec["kind"]
    raise ParseError(f"unknown structure kind {kind!r}", v.line, v.lines[0].column)


def load_config(text, **overrides):
    """Build a :class:`RunConfig` from configuration text.

    Keyword ``overrides`` (non-``None`` values only) take precedence over the
    file, mirroring command-line flags.
    """
    sections = parse_sections(text)
    run = sections.get("run", {})
    kw = {}
    manifolds = _list(run["manifolds"]) if "manifolds" in run else []
    if "metric" in sections:
        entry = _custom_entry(sections)
        manifolds = [entry if m == entry.name else m for m in manifolds]
        if entry not in manifolds:
            manifolds.append(entry)
    elif "structures" in sections or "gauge" in sections:
        raise ParseError("[structures] and [gauge] need a [metric] section", 1, 1)
    kw["manifolds"] = manifolds
    if "checks" in run:
        checks = _list(run["checks"])
        bad = [c for c in checks if c not in CHECKS]
        if bad:
            v = run["checks"]
            raise ParseError(f"unknown check {bad[0]!r}", v.line, v.lines[0].column)
        kw["checks"] = tuple(checks)
    if "points" in run:
        kw["points"] = _int(run["points"], 1)
    if "seed" in run:
        kw["seed"] = _int(run["seed"])
    if "jet_order" in run:
        kw["jet_order"] = _int(run["jet_order"], 3)
    if "threads" in run:
        kw["threads"] = _int(run["threads"], 1)
    if "tolerance" in run:
        kw["tolerances"] = _tolerances(run["tolerance"])
    if "output" in run:
        kw["output"] = run["output"].text
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**kw)


def load_config_file(path, **overrides):
    with open(path, encoding="utf-8") as fh:
        return load_config(fh.read(), **overrides)
