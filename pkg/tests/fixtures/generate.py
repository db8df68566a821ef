"""
Regenerate ``frozen.json``, the oracle values the test-suite asserts against.

Run from the repository root:  python tests/fixtures/generate.py

The values were produced once from a first oracle run and then frozen; rerun
this only when a change in numerical behavior is intended, and review the diff.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ptrg.charges import make_charge_set, quadratic_coeffs, quadratic_residual
from ptrg.dynamics import LindbladSpec, evolve_closed, evolve_lindblad, steady_state_metric
from ptrg.eig import eig_general
from ptrg.errors import BrokenPTPhase, Inapplicable
from ptrg.model import XYZFieldParams, build_charge, build_fields_xyz
from ptrg.perturb import scaling_validation, split_hamiltonian
from ptrg.ptsym import counterpart_discrepancy, parity_op, pt_residual, q_from_fields, signature_and_c
from ptrg.qops import SpinSystem, density_matrix

EPS = (0.1, 0.3, 0.5, 0.7)
HERE = Path(__file__).parent


def xyz(g, field):
    return build_fields_xyz(XYZFieldParams(1.0, 1.0, 0.5, 0.5, field, field, EPS, g))


def times():
    return np.arange(1001) * 0.05


def main():
    sys_ = SpinSystem(4)
    p = parity_op(sys_)
    out = {}

    cs = xyz(0.1, 0.5j)
    q1 = build_charge(sys_, cs, 0)
    d = eig_general(q1)
    out["fig2_q1_eigenvalues"] = [[e.real, e.imag] for e in d.eigenvalues]
    out["fig2_pt_residual"] = [pt_residual(build_charge(sys_, cs, i), p) for i in range(4)]
    try:
        signature_and_c(d, p)
        out["fig2_q1_signature"] = "ok"
    except BrokenPTPhase:
        out["fig2_q1_signature"] = "BrokenPTPhase"
    restricted = signature_and_c(d, p, broken="restrict")
    out["fig2_q1_restricted"] = {
        "sector_size": restricted.diagnostics["sector_size"],
        "signature": restricted.signature.tolist(),
    }
    qr = quadratic_coeffs(cs)
    out["kappa"] = quadratic_residual(make_charge_set(sys_, cs, "pauli"), qr).kappa
    q = q_from_fields(cs)
    out["field_rule_q"] = q.tolist()
    out["counterpart_discrepancy"] = counterpart_discrepancy(sys_, cs, q, 0)

    from ptrg.model import xxz_couplings
    from ptrg.ptsym import solve_q_xxz
    try:
        solve_q_xxz(xxz_couplings("rational", EPS, 0.1, imaginary_x_coupling=True))
        out["solve_q_fig"] = None
    except Inapplicable as exc:
        out["solve_q_fig"] = exc.residual

    psi0 = sys_.basis_state("0000")
    metrics = {}
    for name, g, field in (("fig3a", 0.1, 0.5j), ("fig3d", 1.0, 0.5j)):
        h = build_charge(sys_, xyz(g, field), 0)
        pt = signature_and_c(eig_general(h), p, broken="extend")
        tr = evolve_closed(h, psi0, times(), mode="ClosedCPWeighted", pt=pt)
        m = steady_state_metric(tr, (40, 50))
        metrics[name] = {"std": m.std.tolist(), "drift": m.drift.tolist()}
    h = build_charge(sys_, xyz(1.0, 0.5), 0)
    tr = evolve_lindblad(h, density_matrix(psi0), LindbladSpec(0.05, (0, 1, 2, 3)), times())
    m = steady_state_metric(tr, (40, 50))
    metrics["fig3f"] = {"std": m.std.tolist(), "drift": m.drift.tolist()}
    out["steady_state"] = metrics

    cs0 = xyz(0.0, 0.5j).replace(Bz=np.asarray(EPS, dtype=complex))
    sc = scaling_validation(split_hamiltonian(cs0), np.geomspace(1e-2, 1e-1, 6))
    out["perturb_g0_slopes"] = sc.slopes.tolist()

    (HERE / "frozen.json").write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
