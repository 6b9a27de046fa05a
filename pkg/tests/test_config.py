import textwrap

import pytest

from hktsusy.config import load_config, load_config_file, parse_sections
from hktsusy.errors import ParseError
from hktsusy.verifier import run_suite
from hktsusy.zoo import ZooEntry

GOOD = textwrap.dedent(
    """\
    # a conformally flat sphere chart spelled out entry by entry
    [metric]
    dim = 4
    g = 1/(1 + (x1^2+x2^2+x3^2+x4^2)/2)^2; 0; 0; 0
        1/(1 + (x1^2+x2^2+x3^2+x4^2)/2)^2; 0; 0
        1/(1 + (x1^2+x2^2+x3^2+x4^2)/2)^2; 0
        1/(1 + (x1^2+x2^2+x3^2+x4^2)/2)^2

    [structures]
    kind = canonical

    [run]
    name = my_sphere
    expected_class = HKT
    manifolds = flat_r4, my_sphere
    checks = classify, n4, sfhk
    points = 2
    seed = 11
    tolerance = n4 = 1e-10, sfhk = 1e-9
    box = -0.5, 0.5
    """
)


def test_good_file_builds_a_runnable_config(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(GOOD)
    cfg = load_config_file(path)
    assert cfg.points == 2 and cfg.seed == 11
    assert cfg.checks == ("classify", "n4", "sfhk")
    assert cfg.tol["n4"] == 1e-10
    assert cfg.manifolds[0] == "flat_r4"
    custom = cfg.manifolds[1]
    assert isinstance(custom, ZooEntry) and custom.name == "my_sphere"
    assert custom.domain.high == 0.5
    rep = run_suite(cfg)
    assert rep.passed
    assert [e["name"] for e in rep.entries] == ["flat_r4", "my_sphere"]


def test_overrides_win_over_file():
    cfg = load_config(GOOD, points=3, seed=None)
    assert cfg.points == 3 and cfg.seed == 11


def test_alternative_metric_forms():
    cfg = load_config("[metric]\nconformal_factor = 1 + x1^2\n[gauge]\nA = 0; 0; x1; -x2\n")
    entry = cfg.manifolds[0]
    assert entry.gauge is not None and entry.dim == 4
    cfg = load_config("[metric]\nkahler_potential = z1*zb1 + z2*zb2\n[structures]\nkind = kahler\n[run]\nexpected_class = Kahler\n")
    assert cfg.manifolds[0].expected_class == "Kahler"


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("[metric]\ndim = 4\ng = 1; 0; 0; 0\n    1; 0; 0\n    1; 0\n    1 +* x1\n", 6, 8),
        ("[metric]\nconformal_factor = 1 + sin(x1\n", 2, 27),
        ("[run]\npoints = many\n", 2, 10),
        ("[run]\npoints = 0\n", 2, 10),
        ("[bogus]\n", 1, 1),
        ("dim = 4\n", 1, 1),
        ("[run]\nseed 4\n", 2, 1),
        ("[run]\ncolour = red\n", 2, 1),
        ("[run]\nchecks = n4, magic\n", 2, 10),
        ("[run]\nseed = 1\nseed = 2\n", 3, 1),
        ("[metric]\ndim = 2\ng = 1; 0\n    1; 0; 0\n", 4, 5),
        ("[metric]\nconformal_factor = 1\n[run]\nexpected_class = super\n", 4, 18),
    ],
)
def test_errors_carry_line_and_column(text, line, column):
    with pytest.raises(ParseError) as info:
        load_config(text)
    assert (info.value.line, info.value.column) == (line, column)
    assert f"line {line}" in str(info.value)


def test_structures_without_metric_rejected():
    with pytest.raises(ParseError):
        load_config("[structures]\nkind = canonical\n")


def test_comments_and_continuations():
    secs = parse_sections("[run]\n# note\nmanifolds = flat_r4,  # trailing\n    hopf\n")
    assert secs["run"]["manifolds"].text == "flat_r4, hopf"
