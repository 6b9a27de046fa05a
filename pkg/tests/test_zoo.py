import numpy as np
import pytest

from hktsusy.errors import UnknownEntry
from hktsusy.geometry import build_geometry
from hktsusy.jets import evaluate
from hktsusy.verifier import sample_points
from hktsusy.zoo import CLASSES, REGISTRY, SamplingDomain, random_polynomial_metric, zoo_get, zoo_names


def test_registry_names_and_lookup():
    names = zoo_names()
    for required in ("flat_r4", "conf_flat_s4", "hopf", "kahler_from_potential", "broken_complex",
                     "asd_gauge", "sd_gauge"):
        assert required in names
    assert zoo_get("hopf") is REGISTRY["hopf"]
    with pytest.raises(UnknownEntry, match="no_such"):
        zoo_get("no_such")
    with pytest.raises(KeyError):
        zoo_get("no_such")


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_entries_are_well_formed(name):
    entry = REGISTRY[name]
    assert entry.name == name
    assert entry.expected_class in CLASSES
    assert entry.description
    if entry.gauge is not None:
        assert len(entry.gauge) == entry.dim


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_metrics_positive_definite_on_samples(name):
    entry = REGISTRY[name]
    for x in sample_points(entry, 20, seed=1):
        assert entry.domain.contains(x)
        geom = build_geometry(entry.metric, x, 3)
        assert np.linalg.eigvalsh(geom.metric[..., 0].real).min() > 0


def test_annulus_sampling():
    dom = REGISTRY["hopf"].domain
    pts = dom.sample(np.random.default_rng(0), 4, 500)
    r = np.linalg.norm(pts, axis=1)
    assert r.min() > np.sqrt(2) and r.max() < 2 * np.sqrt(2)
    # volume-uniform: the outer half of the shell by radius holds most points
    mid = 1.5 * np.sqrt(2)
    assert np.mean(r > mid) > 0.7
    assert not dom.contains(np.zeros(4))


def test_box_sampling_and_determinism():
    dom = SamplingDomain(-0.5, 0.5)
    a = dom.sample(np.random.default_rng(3), 4, 10)
    b = dom.sample(np.random.default_rng(3), 4, 10)
    assert np.array_equal(a, b)
    assert np.all(np.abs(a) <= 0.5)
    assert not dom.contains(np.full(4, 0.6))


def test_random_polynomial_metric_is_a_small_quadratic_perturbation():
    m = random_polynomial_metric(np.random.default_rng(2), eps=0.1)

    def g(x):
        return np.array([[evaluate(m.entries[i][j], x).real for j in range(4)] for i in range(4)])

    x = np.array([0.1, 0.2, -0.3, 0.4])
    assert np.allclose(g(x), g(x).T)
    assert np.max(np.abs(g(0 * x) - np.eye(4))) < 0.5
    # third differences along a line vanish for a quadratic
    v = np.array([0.3, -0.1, 0.2, 0.5])
    d3 = g(3 * v) - 3 * g(2 * v) + 3 * g(v) - g(0 * v)
    assert np.max(np.abs(d3)) < 1e-12
