from __future__ import annotations

import itertools

import numpy as np
import pytest

from conftest import EPS, xyz_couplings
from ptrg.errors import DefectiveH0, TrackingLost, ZeroLongitudinalField
from ptrg.perturb import (
    PerturbationSplit,
    closed_form_element_sq,
    corrections,
    scaling_validation,
    split_hamiltonian,
)
from ptrg.qops import SpinSystem, spin_ops

SCALES = np.geomspace(1e-2, 1e-1, 6)


def g0_split():
    cs = xyz_couplings(0.0, 0.5j).replace(Bz=np.asarray(EPS, dtype=complex))
    return split_hamiltonian(cs)


def two_level(b=1.0):
    o = spin_ops(SpinSystem(1), 0)
    return PerturbationSplit.from_operators(o.z, b * o.x)


def test_split_without_transverse_field():
    sp = split_hamiltonian(xyz_couplings(0.1, 0.0))
    assert not np.any(sp.V) and sp.ratio == 0.0


def test_split_fig2(sys4, fig2):
    sp = split_hamiltonian(fig2)
    np.testing.assert_allclose(sp.V, -sp.V.conj().T, atol=1e-15)
    assert sp.ratio == pytest.approx(0.5 / np.sqrt(0.6))
    # H0 + V is the Hamiltonian sum(Bz S^z) + sum over ordered pairs of the couplings
    o = [spin_ops(sys4, i) for i in range(4)]
    full = sum(fig2.Bx[i] * o[i].x + fig2.By[i] * o[i].y + fig2.Bz[i] * o[i].z for i in range(4))
    for i, j in itertools.permutations(range(4), 2):
        full = full + (fig2.GammaX[i, j] * (o[i].x @ o[j].x + o[i].y @ o[j].y)
                       + fig2.GammaZ[i, j] * o[i].z @ o[j].z)
    np.testing.assert_allclose(sp.H, full, atol=1e-12)


def test_split_is_linear_in_fields(fig2):
    a = split_hamiltonian(fig2)
    b = split_hamiltonian(fig2.replace(Bx=0.3 * fig2.Bx, By=0.3 * fig2.By))
    np.testing.assert_allclose(b.V, 0.3 * a.V, atol=1e-15)
    np.testing.assert_allclose(b.H0, a.H0)


def test_zero_longitudinal_field(fig2):
    with pytest.raises(ZeroLongitudinalField):
        split_hamiltonian(fig2.replace(Bz=np.array([1, 0, 1, 1])))


def test_two_level_second_order():
    b = 0.05
    t = corrections(two_level(b), inner="standard")
    np.testing.assert_allclose(t.E1, 0, atol=1e-15)
    np.testing.assert_allclose(t.E2.real, [-b * b / 4, b * b / 4], atol=1e-15)
    exact = np.array([-0.5, 0.5]) * np.sqrt(1 + b * b)
    np.testing.assert_allclose(t.second_order.real, exact, atol=b**4)


def test_two_level_scaling_order():
    for inner in ("standard", "cpt"):
        r = scaling_validation(two_level(), SCALES, inner=inner)
        assert r.min_slope >= 3.9


def test_zero_scale_is_excluded():
    r = scaling_validation(two_level(), np.concatenate([[0.0], SCALES]))
    assert r.scales[0] > 0
    t = corrections(two_level())
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(two_level().scaled(0.0))), t.E0)
    with pytest.raises(ValueError):
        scaling_validation(two_level(), [0.05, 0.1])


def test_free_limit_first_order_vanishes():
    t = corrections(g0_split())
    nondeg = ~t.degenerate
    assert nondeg.sum() == 14
    np.testing.assert_allclose(t.E1[nondeg], 0, atol=1e-15)


def test_free_limit_zero_energy_cluster():
    t = corrections(g0_split())
    zero = [n for n in range(16) if abs(t.E0[n]) < 1e-12]
    assert len(zero) == 2 and t.degenerate[zero].all()
    # the zero-energy states are the sign patterns (+,-,-,+) and (-,+,+,-)
    bits = [tuple(int(b) for b in format(n, "04b")) for n in range(16)]
    energies = [0.5 * sum(e * (1 - 2 * b) for e, b in zip(EPS, bt)) for bt in bits]
    assert {bt for bt, e in zip(bits, energies) if abs(e) < 1e-12} == {(1, 0, 0, 1), (0, 1, 1, 0)}


def test_generic_scaling_matches_frozen(frozen):
    r = scaling_validation(g0_split(), SCALES)
    np.testing.assert_allclose(r.slopes, frozen["perturb_g0_slopes"], rtol=1e-6)
    assert r.min_slope >= 2.7


def test_bilinearity():
    sp = g0_split()
    half = PerturbationSplit.from_operators(sp.H0, 0.5 * sp.V)
    a, b = corrections(sp), corrections(half)
    np.testing.assert_allclose(b.E1, 0.5 * a.E1, atol=1e-14)
    np.testing.assert_allclose(b.E2, 0.25 * a.E2, atol=1e-14)


def test_first_order_sum_is_trace(fig2):
    sp = split_hamiltonian(fig2.replace(Bx=fig2.Bx.imag, By=fig2.By.imag))
    t = corrections(sp, inner="standard")
    np.testing.assert_allclose(t.E1.imag, 0, atol=1e-12)
    assert abs(t.E1.sum() - np.trace(sp.V)) < 1e-10


def test_closed_form_elements_at_free_limit():
    sp = g0_split()
    cs = sp.couplings
    # at g = 0 the unperturbed states are computational basis states
    for m, n in itertools.product(range(16), repeat=2):
        expected = closed_form_element_sq(cs, m, n)
        actual = abs(sp.V[m, n]) ** 2
        assert actual == pytest.approx(expected, abs=1e-15)
    assert closed_form_element_sq(cs, 0, 0) == 0.0
    assert closed_form_element_sq(cs, 0, 3) == 0.0
    assert closed_form_element_sq(cs, 0, 8) == pytest.approx(0.25 * 2 * 0.25 / 0.6)


def test_fig2_h0_clusters_reported(fig2):
    t = corrections(split_hamiltonian(fig2))
    assert t.unresolved.sum() == 14
    assert t.notes


def test_defective_h0():
    h0 = np.array([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(DefectiveH0):
        corrections(PerturbationSplit.from_operators(h0, np.eye(2)))


def test_level_crossing_loses_tracking():
    o = spin_ops(SpinSystem(1), 0)
    sp = PerturbationSplit.from_operators(0.01 * o.z, -2.0 * o.z + 0.3 * o.x)
    with pytest.raises(TrackingLost):
        scaling_validation(sp, np.geomspace(1e-3, 1.0, 8), inner="standard")


def test_invalid_inner():
    with pytest.raises(ValueError):
        corrections(two_level(), inner="rho")

