from dataclasses import replace

import numpy as np
import pytest

from hktsusy.complex_structures import CAL_I, bismut_torsion
from hktsusy.geometry import build_geometry, flat_metric
from hktsusy.jets import jet_space
from hktsusy.superspace import bracket, residual_norm
from hktsusy.supercharges import (
    TORSION_Q,
    TORSION_S,
    build_complex_pair,
    build_F,
    build_Q_real,
    build_S,
    build_supercharges,
    field_strength,
    gauge_deform,
)
from hktsusy.verifier import full_norm, sample_points
from hktsusy.zoo import ASD_FIELD, REGISTRY, linear_potential, random_polynomial_metric

POINT = np.array([0.3, -0.5, 0.7, 0.2])


def charges_at(entry, x, order=3):
    geom = build_geometry(entry.metric, x, order)
    Ts = entry.structures.jets(x, order)
    C = bismut_torsion(geom, Ts[0]) if entry.structures.is_triple else None
    return geom, build_supercharges(geom, Ts, C)


def test_default_torsion_coefficients():
    assert TORSION_Q == 1j / 12
    assert TORSION_S == -1j / 4


def test_flat_charges_are_free():
    geom = build_geometry(flat_metric(4), POINT, 3)
    Q = build_Q_real(geom)
    want = {(tuple(int(i == m) for i in range(4)), (m,)): 1.0 for m in range(4)}
    assert Q.constant_terms() == want
    S = build_S(geom, geom.space.constant(CAL_I))
    terms = S.constant_terms()
    # S = psi^N I_N^M Pi_M
    for n in range(4):
        for m in range(4):
            key = (tuple(int(i == m) for i in range(4)), (n,))
            assert terms.get(key, 0.0) == CAL_I[n, m]


def test_flat_hamiltonian_is_half_momentum_squared():
    geom = build_geometry(flat_metric(4), POINT, 3)
    H = bracket(build_Q_real(geom), build_Q_real(geom)).scale(1 / 2j)
    want = {(tuple(2 * int(i == m) for i in range(4)), ()): 0.5 for m in range(4)}
    assert H.constant_terms() == pytest.approx(want)


@pytest.mark.parametrize("name", ["conf_flat_s4", "hopf", "kahler_from_potential", "fubini_study_cp1"])
def test_hamiltonian_leading_symbol(name):
    entry = REGISTRY[name]
    x = sample_points(entry, 1, seed=3)[0]
    geom, cs = charges_at(entry, x)
    ginv = geom.inverse[..., 0].real
    D = geom.dim
    for m in range(D):
        for n in range(m, D):
            mom = [0] * D
            mom[m] += 1
            mom[n] += 1
            c = cs.H.coefficient(tuple(mom), ())[0]
            assert c == pytest.approx(0.5 * ginv[m, n] * (1 if m == n else 2), abs=1e-13)


@pytest.mark.parametrize("name", sorted(n for n in REGISTRY if n != "broken_complex"))
def test_S_is_bracket_of_Q_and_F(name):
    entry = REGISTRY[name]
    for x in sample_points(entry, 2, seed=8):
        _, cs = charges_at(entry, x)
        for S, F in zip(cs.S, cs.F):
            ref = bracket(cs.Q, F)
            assert full_norm(S.truncate(ref.order) - ref) <= 1e-10


def test_S_differs_from_bracket_without_integrability():
    entry = REGISTRY["broken_complex"]
    x = sample_points(entry, 1, seed=8)[0]
    _, cs = charges_at(entry, x)
    worst = max(full_norm(S.truncate(1) - bracket(cs.Q, F)) for S, F in zip(cs.S, cs.F))
    assert worst > 1e-3


def test_parity_and_degree_bounds():
    entry = REGISTRY["asd_gauge_s4"]
    geom, cs = charges_at(entry, POINT)
    for q in cs.charges:
        assert q.parity == "odd" and q.momentum_degree == 1 and q.grassmann_degree <= 3
    for f in cs.F:
        assert f.parity == "even" and f.momentum_degree == 0 and f.grassmann_degree == 2
    assert cs.H.parity == "even" and cs.H.momentum_degree == 2
    from hktsusy.jets import lift_array

    A = np.array([lift_array(e, POINT, 2) for e in linear_potential(ASD_FIELD)])
    gauged = gauge_deform(cs, A)
    assert all(q.parity == "odd" and q.momentum_degree == 1 for q in gauged.charges)
    assert gauged.H.parity == "even" and gauged.H.momentum_degree == 2
    assert full_norm(gauged.Q - cs.Q) > 1e-3


def test_zero_potential_changes_nothing():
    geom, cs = charges_at(REGISTRY["conf_flat_s4"], POINT)
    A = np.zeros((4, jet_space(4, 2).size))
    gauged = gauge_deform(cs, A)
    for a, b in zip(cs.charges + (cs.H,), gauged.charges + (gauged.H,)):
        assert full_norm(a - b) == 0.0


def test_constant_potential_field_strength_is_exact():
    from hktsusy.jets import lift_array

    sp = jet_space(4, 2)
    A = np.array([lift_array(e, POINT, 2) for e in linear_potential(ASD_FIELD)])
    F = field_strength(sp, A)
    assert np.allclose(F[..., 0], ASD_FIELD, atol=1e-15)
    assert np.allclose(F[..., 1:], 0.0)


def test_kahler_Q_and_S_anticommute():
    entry = REGISTRY["kahler_from_potential"]
    for x in sample_points(entry, 3, seed=5):
        _, cs = charges_at(entry, x)
        assert cs.torsion is None
        scale = residual_norm(cs.H)
        assert residual_norm(bracket(cs.Q, cs.S[0])) / scale <= 1e-10
        assert residual_norm(bracket(cs.S[0], cs.S[0]) - cs.H.scale(2j)) / scale <= 1e-10


def test_complex_pair_on_flat_space():
    geom = build_geometry(flat_metric(4), POINT, 3)
    Q, Qbar = build_complex_pair(geom)
    assert Q.n_fermions == 8
    H = bracket(Qbar, Q).scale(0.5 / 1j)
    assert residual_norm(bracket(Q, Q)) == 0.0
    want = {(tuple(2 * int(i == m) for i in range(4)), ()): 0.5 for m in range(4)}
    terms = {k: v for k, v in H.constant_terms().items() if abs(v) > 1e-15}
    assert terms == pytest.approx(want)


def test_complex_pair_needs_the_right_connection_sign():
    metric = random_polynomial_metric(np.random.default_rng(4))
    geom = build_geometry(metric, POINT * 0.5, 3)
    Q, Qbar = build_complex_pair(geom)
    scale = residual_norm(bracket(Qbar, Q))
    assert residual_norm(bracket(Q, Q)) / scale <= 1e-12
    flipped = replace(geom, spin_connection=-geom.spin_connection)
    Qf, _ = build_complex_pair(flipped)
    assert residual_norm(bracket(Qf, Qf)) / scale > 1e-3


def test_fermion_charge_generates_structure_rotation():
    # on flat space {F, psi^A} rotates the generator by the structure
    geom = build_geometry(flat_metric(4), POINT, 3)
    F = build_F(geom, geom.space.constant(CAL_I))
    from hktsusy.superspace import SuperElement

    psi = SuperElement.generator(0, POINT, 2, 4)
    out = bracket(F, psi).constant_terms()
    # psi^1 goes to a unit multiple of psi^2
    nonzero = {k: v for k, v in out.items() if abs(v) > 1e-15}
    assert set(nonzero) == {((0, 0, 0, 0), (1,))}
    assert abs(nonzero[((0, 0, 0, 0), (1,))]) == pytest.approx(1.0)
