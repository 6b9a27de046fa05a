import itertools

import numpy as np
import pytest

from hktsusy.complex_structures import (
    ANTI_SELF_DUAL,
    ASD_BASIS,
    CAL_I,
    CAL_J,
    CAL_K,
    SELF_DUAL,
    StructureTriple,
    antisymmetry_residual,
    asd_decompose,
    asd_reconstruct,
    bismut_torsion,
    canonical_triple,
    commutant_check,
    hkt_check,
    hodge_dual,
    kahler_structure,
    nijenhuis_residual,
    nijenhuis_tensor,
    quaternion_residual,
    random_antisymmetric_tensor,
    x_identity_residual,
    x_identity_tensor,
)
from hktsusy.errors import ClassificationMismatch, NotAntisymmetric
from hktsusy.geometry import build_geometry, flat_metric
from hktsusy.verifier import sample_points
from hktsusy.zoo import REGISTRY
from support import brute_force_x


def test_canonical_matrices_form_a_quaternion_algebra():
    for B in SELF_DUAL + ANTI_SELF_DUAL:
        assert np.array_equal(B @ B, -np.eye(4))
        assert np.array_equal(B, -B.T)
    assert quaternion_residual([CAL_I, CAL_J, CAL_K]) == 0.0
    # the anti-self-dual family closes with the opposite orientation
    It, Jt, Kt = ANTI_SELF_DUAL
    assert quaternion_residual([It, Jt, -Kt]) == 0.0
    # the two families commute with each other
    for A in SELF_DUAL:
        for B in ANTI_SELF_DUAL:
            assert np.array_equal(A @ B, B @ A)


def test_duality_of_the_two_bases():
    for B in SELF_DUAL:
        assert np.allclose(hodge_dual(B), B)
    for B in ANTI_SELF_DUAL:
        assert np.allclose(hodge_dual(B), -B)


def test_block_structures():
    t = canonical_triple(2)
    vals = t.values(np.zeros(8))
    assert vals.shape == (3, 8, 8)
    assert quaternion_residual(list(vals)) == 0.0
    k = kahler_structure(3).values(np.zeros(6))[0]
    assert np.array_equal(k @ k, -np.eye(6))


def oracle_decompose(F):
    # independent: least squares on the six upper-triangular entries
    iu = np.triu_indices(4, 1)
    A = np.array([B[iu] for B in ASD_BASIS]).T
    coeffs, *_ = np.linalg.lstsq(A, F[iu], rcond=None)
    return coeffs


def test_asd_decomposition_matches_linear_solve():
    rng = np.random.default_rng(5)
    for _ in range(100):
        F = random_antisymmetric_tensor(rng, 4, 2)
        c = asd_decompose(F)
        assert np.allclose(c, oracle_decompose(F), atol=1e-12)
        assert np.allclose(asd_reconstruct(c), F, atol=1e-12)


def test_commutant_iff_self_dual_part_vanishes():
    rng = np.random.default_rng(17)
    triple = canonical_triple()
    for trial in range(100):
        a = rng.normal(size=3) * (trial % 2)  # half the cases purely anti-self-dual
        a[rng.integers(3)] *= rng.integers(2)
        b = rng.normal(size=3)
        F = asd_reconstruct(np.concatenate([a, b]))
        res = commutant_check(F, triple)
        assert res.commutes == (np.max(np.abs(a)) == 0)
        assert np.allclose(res.self_dual_part, a, atol=1e-12)
        if not res.commutes:
            assert res.max_residual > 1e-3


def test_commutant_with_curved_metric():
    g = 2.5 * np.eye(4)
    F = 0.3 * CAL_I.copy()
    res = commutant_check(F, canonical_triple(), g=g)
    assert not res.commutes
    res = commutant_check(0.3 * ANTI_SELF_DUAL[1], canonical_triple(), g=g)
    assert res.commutes


def test_non_antisymmetric_input_is_rejected():
    with pytest.raises(NotAntisymmetric):
        asd_decompose(np.eye(4))


def test_x_identity_tensor_matches_loops():
    rng = np.random.default_rng(2)
    C = random_antisymmetric_tensor(rng)
    I = rng.normal(size=(4, 4))
    J = rng.normal(size=(4, 4))
    assert np.allclose(x_identity_tensor(I, J, C), brute_force_x(I, J, C), atol=1e-12)


def test_x_identity_vanishes_for_distinct_structures():
    rng = np.random.default_rng(9)
    pairs = list(itertools.permutations(SELF_DUAL, 2)) + list(itertools.permutations(ANTI_SELF_DUAL, 2))
    for I, J in pairs:
        for _ in range(20):
            C = random_antisymmetric_tensor(rng)
            assert x_identity_residual(I, J, C) <= 1e-12


def test_x_identity_control_with_equal_structures():
    rng = np.random.default_rng(9)
    values = [x_identity_residual(CAL_I, CAL_I, random_antisymmetric_tensor(rng)) for _ in range(20)]
    brute = np.max(np.abs(brute_force_x(CAL_I, CAL_I, random_antisymmetric_tensor(rng))))
    assert min(values) > 1e-3 and brute > 1e-3


def test_random_antisymmetric_tensor():
    C = random_antisymmetric_tensor(np.random.default_rng(0))
    assert antisymmetry_residual(C) == 0.0
    assert np.count_nonzero(C) == 24


@pytest.mark.parametrize("name", ["conf_flat_s4", "hopf", "conf_flat_generic", "kahler_from_potential", "broken_complex"])
def test_nijenhuis_forms_agree(name):
    entry = REGISTRY[name]
    integrable = entry.expected_class != "generic"
    for x in sample_points(entry, 3, seed=4):
        geom = build_geometry(entry.metric, x, 3)
        for T in entry.structures.jets(x, 3):
            cov = nijenhuis_residual(geom, T)
            free = np.max(np.abs(nijenhuis_tensor(T)))
            if integrable:
                assert cov < 1e-12 and free < 1e-12
            else:
                assert min(cov, free) > 1e-3 or (cov < 1e-12 and free < 1e-12)
        if not integrable:
            Ts = entry.structures.jets(x, 3)
            assert max(nijenhuis_residual(geom, T) for T in Ts) > 1e-2
            assert max(np.max(np.abs(nijenhuis_tensor(T))) for T in Ts) > 1e-2


def test_bismut_torsion_vanishes_on_kahler():
    entry = REGISTRY["kahler_from_potential"]
    for x in sample_points(entry, 5, seed=1):
        geom = build_geometry(entry.metric, x, 3)
        C = bismut_torsion(geom, entry.structures.jets(x, 3)[0])
        assert np.max(np.abs(C[..., 0])) <= 1e-12


@pytest.mark.parametrize("name", ["conf_flat_s4", "hopf", "conf_flat_generic"])
def test_hkt_check_on_conformally_flat(name):
    entry = REGISTRY[name]
    for x in sample_points(entry, 3, seed=2):
        geom = build_geometry(entry.metric, x, 3)
        res = hkt_check(geom, entry.structures)
        assert res.max_residual < 1e-12
        assert res.torsion_spread < 1e-12
        assert antisymmetry_residual(res.torsion[..., 0]) < 1e-12
        assert np.max(np.abs(res.torsion[..., 0])) > 1e-3


def test_hkt_check_preconditions():
    geom = build_geometry(flat_metric(4), np.zeros(4), 3)
    with pytest.raises(ClassificationMismatch):
        hkt_check(geom, kahler_structure(2))
    bad = StructureTriple([CAL_I, CAL_J, CAL_I])
    with pytest.raises(ClassificationMismatch):
        hkt_check(geom, bad)
