from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EPS, xyz_couplings
from ptrg.errors import NonPositiveRadicand, SingularDifference
from ptrg.model import (
    XYZFieldParams,
    build_charge,
    build_charges,
    build_fields_xyz,
    build_hamiltonian_from_charges,
    build_hamiltonian_xxz,
    check_integrability_xxz,
    check_integrability_xyz,
    coupling_family,
    xxz_couplings,
)
from ptrg.ptsym import parity_op, pt_residual
from ptrg.qops import SpinSystem, spin_ops


def test_coupling_families():
    assert coupling_family("rational", 0.5, 0.0) == pytest.approx((2.0, 2.0))
    gx, gz = coupling_family("trigonometric", np.pi / 2, 0.0)
    assert gx == pytest.approx(1.0) and abs(gz) < 1e-15
    assert abs(coupling_family("hyperbolic", 20.0, 0.0)[1] - 1) < 1e-3
    with pytest.raises(SingularDifference):
        coupling_family("rational", 0.3, 0.3)
    with pytest.raises(SingularDifference):
        coupling_family("trigonometric", np.pi, 0.0)
    with pytest.raises(ValueError):
        coupling_family("elliptic", 1.0, 0.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 3.0), st.sampled_from(["rational", "trigonometric", "hyperbolic"]))
def test_families_are_antisymmetric(d, kind):
    if kind == "trigonometric" and abs(np.sin(d)) < 1e-6:
        return
    a = np.array(coupling_family(kind, d, 0.0))
    b = np.array(coupling_family(kind, 0.0, d))
    np.testing.assert_allclose(a, -b, rtol=1e-14)


def test_fig2_fields():
    cs = xyz_couplings(0.1, 0.5j)
    assert cs.Bx[0] == pytest.approx(0.5j / np.sqrt(0.6))
    assert cs.GammaX[0, 1] == pytest.approx(0.1 * np.sqrt(0.6 * 0.8) / (0.1 - 0.3))
    np.testing.assert_array_equal(cs.Bz, 1)
    zero = xyz_couplings(0.1, 0.0)
    assert np.all(zero.Bx == 0) and np.all(zero.By == 0)


def test_radicand_and_distinct_checks():
    with pytest.raises(NonPositiveRadicand):
        XYZFieldParams(1.0, 1.0, -0.5, 0.5, 0.5, 0.5, EPS, 0.1)
    with pytest.raises(ValueError, match="distinct"):
        xyz_couplings(0.1, 0.5, eps=(0.1, 0.1, 0.3, 0.5))


@pytest.mark.parametrize("family", ["rational", "trigonometric", "hyperbolic"])
def test_xxz_integrable(family):
    r = check_integrability_xxz(xxz_couplings(family, EPS, 0.3))
    assert r.max_residual < 1e-10


def test_xxz_symmetric_violation():
    cs = xxz_couplings("rational", (0.1, 0.3, 0.5), 0.3)
    gx = cs.GammaX.copy()
    gx[0, 1] = gx[1, 0] = 1.0
    r = check_integrability_xxz(cs.replace(GammaX=gx, GammaY=gx))
    assert r.antisymmetry_x == pytest.approx(2.0)


@pytest.mark.parametrize("field", [0.5j, 0.5])
def test_xyz_integrable(field):
    assert check_integrability_xyz(xyz_couplings(0.1, field)).max_residual < 1e-10


def test_xyz_zeroed_gamma_z_breaks():
    cs = xyz_couplings(0.1, 0.5j)
    r = check_integrability_xyz(cs.replace(GammaZ=np.zeros((4, 4))))
    assert r.max_residual > 1e-3


def test_xxz_hamiltonian_free_and_single_site():
    s = SpinSystem(3)
    h = build_hamiltonian_xxz(s, xxz_couplings("rational", (0.1, 0.3, 0.5), 0.0))
    expected = sorted(0.5 * (a * 0.1 + b * 0.3 + c * 0.5) for a in (1, -1) for b in (1, -1) for c in (1, -1))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(h)), expected, atol=1e-14)
    one = SpinSystem(1)
    h1 = build_hamiltonian_xxz(one, xxz_couplings("rational", (0.7,), 2.0))
    np.testing.assert_allclose(h1, 0.7 * spin_ops(one, 0).z)


def test_xxz_hamiltonian_two_sites_by_hand():
    s = SpinSystem(2)
    cs = xxz_couplings("rational", (0.1, 0.3), 0.2)
    h = build_hamiltonian_xxz(s, cs)
    gx, gz = cs.GammaX[0, 1], cs.GammaZ[0, 1]
    # basis 00, 01, 10, 11 with 0 = up; Gamma antisymmetric so the sum over i != j cancels
    zz = 0.2 * (gz + cs.GammaZ[1, 0]) / 4
    ff = 0.2 * (gx + cs.GammaX[1, 0])
    hand = np.array([
        [0.2 + zz, 0, 0, 0],
        [0, -0.1 - zz, ff, 0],
        [0, ff, 0.1 - zz, 0],
        [0, 0, 0, -0.2 + zz],
    ])
    np.testing.assert_allclose(h, hand, atol=1e-14)
    np.testing.assert_allclose(h, h.conj().T)


def test_xxz_imaginary_coupling_is_pt_symmetric():
    s = SpinSystem(4)
    h = build_hamiltonian_xxz(s, xxz_couplings("rational", EPS, 0.3, imaginary_x_coupling=True))
    p = parity_op(s)
    np.testing.assert_allclose(p @ h.conj() @ p, h, atol=1e-14)
    # antisymmetric couplings cancel in the i != j sum, leaving the free part
    free = sum(e * spin_ops(s, i).z for i, e in enumerate(EPS))
    np.testing.assert_allclose(h, free, atol=1e-14)


def test_free_charge_spectrum():
    s = SpinSystem(3)
    cs = xyz_couplings(0.0, 0.0, eps=(0.1, 0.3, 0.5))
    for i in range(3):
        q = build_charge(s, cs, i)
        np.testing.assert_allclose(q, spin_ops(s, i).z)
        vals, counts = np.unique(np.round(np.linalg.eigvalsh(q), 12), return_counts=True)
        np.testing.assert_allclose(vals, [-0.5, 0.5])
        assert list(counts) == [4, 4]


def test_fig2_charge_symmetries(sys4, frozen):
    p = parity_op(sys4)
    for i, q in enumerate(build_charges(sys4, xyz_couplings(0.1, 0.5j))):
        assert np.linalg.norm(q - q.conj().T) > 1e-3
        # P-pseudo-Hermiticity holds exactly; the antilinear PT residual does not vanish
        np.testing.assert_allclose(q.conj().T, p @ q @ p, atol=1e-14)
        assert pt_residual(q, p) == pytest.approx(frozen["fig2_pt_residual"][i], rel=1e-10)
    for q in build_charges(sys4, xyz_couplings(0.1, 0.5)):
        np.testing.assert_allclose(q, q.conj().T, atol=1e-14)


def test_xxz_limit_of_charge_matches_pairing_form(sys4):
    cs = xxz_couplings("rational", EPS, 0.4)
    q = build_charge(sys4, cs, 1)
    o = [spin_ops(sys4, k) for k in range(4)]
    ref = o[1].z.copy()
    for k in range(4):
        if k != 1:
            ref = ref + cs.GammaX[1, k] * (o[1].x @ o[k].x + o[1].y @ o[k].y) + cs.GammaZ[1, k] * o[1].z @ o[k].z
    np.testing.assert_allclose(q, ref, atol=1e-14)


def test_hamiltonian_from_charges(sys4):
    qs = build_charges(sys4, xyz_couplings(0.1, 0.5j))
    np.testing.assert_array_equal(build_hamiltonian_from_charges(qs, [1, 0, 0, 0]), qs[0])
    assert not np.any(build_hamiltonian_from_charges(qs, [0, 0, 0, 0]))
    h = build_hamiltonian_from_charges(qs, [1, 1, 1, 1])
    for q in qs:
        assert np.linalg.norm(h @ q - q @ h) < 1e-10
    with pytest.raises(ValueError):
        build_hamiltonian_from_charges(qs, [1, 1])


def test_dimension_mismatch(sys4):
    with pytest.raises(ValueError):
        build_charge(SpinSystem(3), xyz_couplings(0.1, 0.5j), 0)
    with pytest.raises((IndexError, ValueError)):
        build_charge(sys4, xyz_couplings(0.1, 0.5j), 4)
