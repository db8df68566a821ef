from __future__ import annotations

import numpy as np
import pytest

from conftest import EPS, xyz_couplings
from ptrg.charges import commutation_report, make_charge_set, quadratic_coeffs, quadratic_residual, transfer_matrix
from ptrg.errors import PoleAtEpsilon
from ptrg.model import build_hamiltonian_from_charges, check_integrability_xxz, check_integrability_xyz, xxz_couplings
from ptrg.qops import SpinSystem, spin_ops


def free_set(n=3):
    return xyz_couplings(0.0, 0.0, eps=EPS[:n])


def test_free_charges_commute():
    s = SpinSystem(3)
    assert commutation_report(make_charge_set(s, free_set())).max_pair == 0.0


def test_fig2_charges_commute(sys4, fig2):
    cset = make_charge_set(sys4, fig2)
    h = build_hamiltonian_from_charges(cset.charges, [1, 1, 1, 1])
    r = commutation_report(cset, h)
    assert r.max_pair < 1e-10
    assert r.max_with_hamiltonian < 1e-10
    np.testing.assert_allclose(r.pairs, r.pairs.T)


def test_threads_give_identical_charges(sys4, fig2):
    a = make_charge_set(sys4, fig2)
    b = make_charge_set(sys4, fig2, threads=4)
    for qa, qb in zip(a.charges, b.charges):
        np.testing.assert_array_equal(qa, qb)


def test_zeroed_gamma_z_breaks_commutation(sys4, fig2):
    broken = fig2.replace(GammaZ=np.zeros((4, 4)))
    assert commutation_report(make_charge_set(sys4, broken)).max_pair > 1e-3


@pytest.mark.parametrize("cs", [
    xyz_couplings(0.1, 0.5j),
    xyz_couplings(0.1, 0.5),
    xxz_couplings("rational", EPS, 0.3),
    xxz_couplings("trigonometric", EPS, 0.3),
    xxz_couplings("hyperbolic", EPS, 0.3),
    xxz_couplings("rational", (0.1, 0.3, 0.5), 0.3),
    xxz_couplings("hyperbolic", (0.1, 0.3, 0.5, 0.7, 0.9), 0.3),
])
def test_integrability_implies_commutation(cs):
    if np.array_equal(cs.GammaX, cs.GammaY) and not np.any(cs.Bx):
        small = check_integrability_xxz(cs).max_residual < 1e-10
    else:
        small = check_integrability_xyz(cs).max_residual < 1e-10
    assert small
    assert commutation_report(make_charge_set(SpinSystem(cs.n), cs)).max_pair < 1e-10


def test_free_quadratic_relation():
    s = SpinSystem(3)
    qr = quadratic_coeffs(free_set())
    assert not np.any(qr.C)
    np.testing.assert_allclose(qr.K, 1)
    res = quadratic_residual(make_charge_set(s, free_set()), qr)
    assert res.kappa == 0.25 and res.max_residual < 1e-14


def test_fig2_quadratic_relation(sys4, fig2, frozen):
    qr = quadratic_coeffs(fig2)
    assert qr.branch_agreement < 1e-10
    res = quadratic_residual(make_charge_set(sys4, fig2, "pauli"), qr)
    assert res.kappa == frozen["kappa"]
    assert res.max_residual < 1e-8


def test_non_integrable_quadratic_relation(sys4, fig2):
    gz = fig2.GammaZ.copy()
    gz[0, 1] *= 1.5
    bad = fig2.replace(GammaZ=gz)
    qr = quadratic_coeffs(bad)
    assert qr.branch_agreement > 1e-3
    res = quadratic_residual(make_charge_set(sys4, bad, "pauli"), qr)
    assert all(r.max() > 1e-3 for r in res.by_kappa.values())


def test_quadratic_residual_shift_invariance():
    s = SpinSystem(4)
    a = xxz_couplings("rational", EPS, 0.3)
    b = xxz_couplings("rational", tuple(e + 2.0 for e in EPS), 0.3)
    ra = quadratic_residual(make_charge_set(s, a, "pauli"), quadratic_coeffs(a))
    rb = quadratic_residual(make_charge_set(s, b, "pauli"), quadratic_coeffs(b))
    np.testing.assert_allclose(ra.per_charge, rb.per_charge, atol=1e-12)


def test_transfer_matrix():
    one = SpinSystem(1)
    cs1 = xxz_couplings("rational", (0.2,), 0.1)
    np.testing.assert_allclose(transfer_matrix(one, cs1, 1.2), spin_ops(one, 0).z)
    s = SpinSystem(2)
    cs = xxz_couplings("rational", (0.0, 0.5), 0.1)
    np.testing.assert_allclose(transfer_matrix(s, cs, 1.0), spin_ops(s, 0).z + 2 * spin_ops(s, 1).z)
    t2, t3 = transfer_matrix(s, cs, 2.0), transfer_matrix(s, cs, 3.5)
    assert not np.any(t2 @ t3 - t3 @ t2)
    with pytest.raises(PoleAtEpsilon):
        transfer_matrix(s, cs, 0.5)
