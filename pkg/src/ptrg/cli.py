"""
Command-line front end.

    ptrg --config fig2.json --out results/ [--threads 4] [--seedless]

``--config bundled:<name>`` loads one of the configurations shipped in
``ptrg/configs``.  Exit status is 0 on success, 2 for invalid input and 3 for
a numerical failure; diagnostics go to standard error as one line.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .bethe import RichardsonProblem, bethe_state, energy_from_roots, richardson_hamiltonian, solve_richardson, verify_eigenstate
from .charges import make_charge_set, commutation_report, quadratic_coeffs, quadratic_residual
from .config import RunConfig, load_config
from .dynamics import LindbladSpec, Mode, TrajectoryRecord, evolve_closed, evolve_lindblad_adaptive, steady_state_metric
from .eig import PTTag, classify_spectrum, eig_general
from .errors import ConfigError, PTRGError
from .model import FAMILIES, build_hamiltonian_from_charges, check_integrability_xxz, check_integrability_xyz, coupling_family
from .perturb import corrections, scaling_validation, split_hamiltonian
from .ptsym import parity_op, signature_and_c
from .qops import SpinSystem, density_matrix

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
GRID_POLE_TOL = 1e-6


# --- serialization ------------------------------------------------------------


def fmt(x) -> str:
    return format(float(x), ".17g")


def to_jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def trajectory_rows(tr: TrajectoryRecord):
    for k, t in enumerate(tr.times):
        for i in range(tr.site_count):
            yield [fmt(t), i, fmt(tr.sx[k, i]), fmt(tr.sy[k, i]), fmt(tr.sz[k, i]),
                   fmt(tr.norm_or_trace[k]), tr.mode.value]


TRAJECTORY_HEADER = ["t", "site", "sx", "sy", "sz", "norm_or_trace", "mode"]
SPECTRUM_HEADER = ["charge_index", "eig_index", "re", "im", "tag", "partner"]
COUPLINGS_HEADER = ["family", "d", "gamma_x", "gamma_z", "nearest_pole"]


# --- tasks ----------------------------------------------------------------------


def _nearest_pole(family: str, d: float) -> float:
    if family == "trigonometric":
        return float(np.round(d / np.pi) * np.pi)
    return 0.0


def couplings_export(d_grid, families=FAMILIES):
    """Rows ``(family, d, Gamma^x, Gamma^z, nearest pole)``; poles closer than 1e-6 are rejected."""
    rows = []
    for fam in families:
        for d in d_grid:
            pole = _nearest_pole(fam, d)
            if abs(d - pole) < GRID_POLE_TOL:
                raise ConfigError(f"d={d} lies on a pole of the {fam} coupling")
            gx, gz = coupling_family(fam, d, 0.0)
            rows.append((fam, float(d), float(gx), float(gz), pole))
    return rows


def _charges(cfg: RunConfig, threads: int):
    cs = cfg.couplings()
    return cs, make_charge_set(SpinSystem(cs.n), cs, threads=threads)


def task_spectrum(cfg, out, threads):
    cs, cset = _charges(cfg, threads)
    idx = cfg.params.get("charges", list(range(cs.n)))
    tol = cfg.params.get("tag_tol", 1e-8)

    def one(i):
        ev = eig_general(cset[i]).eigenvalues
        return ev, classify_spectrum(ev, tol)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(one, idx))
    rows, per = [], {}
    for i, (ev, cls) in zip(idx, results):
        for n, (e, tag, partner) in enumerate(zip(ev, cls.tags, cls.partners)):
            rows.append([i, n, fmt(e.real), fmt(e.imag), tag.value, partner])
        per[str(i)] = {t.value: cls.count(t) for t in PTTag}
        per[str(i)]["dichotomous"] = cls.dichotomous
    files = {"spectrum.csv": (SPECTRUM_HEADER, rows)}
    return {"tags": per, "all_dichotomous": all(v["dichotomous"] for v in per.values())}, files


def task_charges(cfg, out, threads):
    cs, cset = _charges(cfg, threads)
    h = None
    if "weights" in cfg.params:
        h = build_hamiltonian_from_charges(cset.charges, cfg.params["weights"])
    rep = commutation_report(cset, h)
    qr = quadratic_coeffs(cs)
    pauli = make_charge_set(SpinSystem(cs.n), cs, convention="pauli", threads=threads)
    res = quadratic_residual(pauli, qr)
    return {
        "max_commutator": rep.max_pair,
        "max_commutator_with_hamiltonian": rep.max_with_hamiltonian,
        "quadratic_kappa": res.kappa,
        "quadratic_residual": res.max_residual,
        "quadratic_branch_agreement": qr.branch_agreement,
    }, {}


def task_integrability(cfg, out, threads):
    cs = cfg.couplings()
    if cfg.model["kind"] == "xxz":
        r = check_integrability_xxz(cs)
        metrics = {"antisymmetry_x": r.antisymmetry_x, "antisymmetry_z": r.antisymmetry_z,
                   "triple": r.triple}
    else:
        r = check_integrability_xyz(cs)
        metrics = {"linear": r.linear, "quadratic": r.quadratic,
                   "linear_as_printed": r.linear_as_printed}
    metrics["max_residual"] = r.max_residual
    _, cset = _charges(cfg, threads)
    metrics["max_commutator"] = commutation_report(cset).max_pair
    return metrics, {}


def _hamiltonian(cfg, threads):
    cs, cset = _charges(cfg, threads)
    if "weights" in cfg.params:
        return cs, build_hamiltonian_from_charges(cset.charges, cfg.params["weights"])
    return cs, cset[cfg.params.get("hamiltonian_charge", 0)]


def _times(params):
    t_max = params.get("t_max", 10.0)
    step = params.get("sample_dt", 0.05)
    n = int(round(t_max / step))
    return np.arange(n + 1) * step


def _steady(tr, params):
    if "window" not in params:
        return None
    m = steady_state_metric(tr, params["window"])
    return {"window": list(m.window), "std": m.std, "drift": m.drift, "samples": m.samples}


def task_dynamics(cfg, out, threads):
    cs, h = _hamiltonian(cfg, threads)
    sys_ = SpinSystem(cs.n)
    psi0 = sys_.basis_state(cfg.params.get("initial", "0" * cs.n))
    mode = Mode.CP if cfg.params.get("mode", "standard") == "cp" else Mode.STANDARD
    pt = None
    if mode is Mode.CP:
        pt = signature_and_c(eig_general(h), parity_op(sys_), broken="extend")
    tr = evolve_closed(h, psi0, _times(cfg.params), mode=mode, pt=pt,
                       dt=cfg.params.get("dt", 1e-3))
    metrics = {"mode": mode.value, "method": tr.method, "broken_pt": tr.broken_pt,
               "max_imag": tr.max_imag, "final_sz": tr.sz[-1], "steady_state": _steady(tr, cfg.params)}
    return metrics, {"trajectory.csv": (TRAJECTORY_HEADER, list(trajectory_rows(tr)))}


def task_lindblad(cfg, out, threads):
    cs, h = _hamiltonian(cfg, threads)
    sys_ = SpinSystem(cs.n)
    rho0 = density_matrix(sys_.basis_state(cfg.params.get("initial", "0" * cs.n)))
    spec = LindbladSpec(cfg.params.get("gamma", 0.0),
                        tuple(cfg.params.get("jump_sites", range(cs.n))))
    tr = evolve_lindblad_adaptive(h, rho0, spec, _times(cfg.params), dt=cfg.params.get("dt", 1e-3))
    metrics = {"mode": tr.mode.value, "dt_used": tr.dt,
               "max_trace_error": float(np.max(np.abs(tr.norm_or_trace - 1))),
               "final_sz": tr.sz[-1], "steady_state": _steady(tr, cfg.params)}
    return metrics, {"trajectory.csv": (TRAJECTORY_HEADER, list(trajectory_rows(tr)))}


def task_perturb(cfg, out, threads):
    split = split_hamiltonian(cfg.couplings())
    inner = cfg.params.get("inner", "cpt")
    table = corrections(split, inner=inner, degeneracy_tol=cfg.params.get("degeneracy_tol", 1e-9))
    rows = [[n, fmt(table.E0[n].real), fmt(table.E0[n].imag), fmt(table.E1[n].real),
             fmt(table.E1[n].imag), fmt(table.E2[n].real), fmt(table.E2[n].imag),
             int(table.degenerate[n]), int(table.unresolved[n])] for n in range(table.E0.size)]
    nondeg = ~table.degenerate
    metrics = {
        "ratio": split.ratio,
        "max_abs_E1_nondegenerate": float(np.max(np.abs(table.E1[nondeg]), initial=0.0)),
        "degenerate_levels": int(table.degenerate.sum()),
        "unresolved_levels": int(table.unresolved.sum()),
        "notes": list(table.notes),
    }
    if "scales" in cfg.params:
        sc = scaling_validation(split, cfg.params["scales"], inner=inner)
        metrics["slopes"] = sc.slopes
        metrics["min_slope"] = sc.min_slope
    header = ["level", "E0_re", "E0_im", "E1_re", "E1_im", "E2_re", "E2_im", "degenerate", "unresolved"]
    return metrics, {"perturb.csv": (header, rows)}


def task_bethe(cfg, out, threads):
    m = cfg.model
    g = cfg.params.get("bethe_g", m["g"])
    eps = np.asarray(m["epsilon"], dtype=float)
    prob = RichardsonProblem(eps, g, cfg.params.get("M", 1))
    roots = solve_richardson(prob)
    sys_ = SpinSystem(eps.size)
    state = bethe_state(sys_, eps, roots.roots)
    check = verify_eigenstate(richardson_hamiltonian(sys_, eps, g), state.normalized)
    result = {
        "g": g, "M": prob.M, "roots": roots.roots, "residual": roots.residual,
        "perturbed_path": roots.perturbed, "overlap": check.overlap,
        "eigen_residual": check.residual, "rayleigh": check.rayleigh,
        "energy_from_roots": energy_from_roots(eps, roots.roots),
        "trace": [{"g": gk, "roots": rk} for gk, rk in roots.trace],
    }
    metrics = {k: result[k] for k in ("residual", "overlap", "eigen_residual", "perturbed_path")}
    return metrics, {"bethe.json": result}


def task_couplings(cfg, out, threads):
    grid = cfg.params.get("d_grid", [0.5, 1.0, 1.5])
    rows = [[fam, fmt(d), fmt(gx), fmt(gz), fmt(p)] for fam, d, gx, gz, p in couplings_export(grid)]
    return {"rows": len(rows)}, {"couplings.csv": (COUPLINGS_HEADER, rows)}


TASK_HANDLERS = {
    "spectrum": task_spectrum,
    "charges": task_charges,
    "integrability": task_integrability,
    "dynamics": task_dynamics,
    "lindblad": task_lindblad,
    "perturb": task_perturb,
    "bethe": task_bethe,
    "couplings": task_couplings,
}


# --- orchestration -----------------------------------------------------------------


class RandomnessUsed(RuntimeError):
    pass


@contextlib.contextmanager
def forbid_randomness():
    """Make the common numpy and stdlib RNG entry points raise while active."""

    def guard(*_a, **_k):
        raise RandomnessUsed("random number generation used in a --seedless run")

    targets = [(np.random, name) for name in
               ("default_rng", "seed", "random", "rand", "randn", "normal", "uniform", "choice",
                "standard_normal", "permutation", "shuffle", "integers", "randint")
               if hasattr(np.random, name)]
    targets += [(random, name) for name in ("random", "seed", "randint", "choice", "shuffle",
                                            "uniform", "gauss")]
    saved = [(mod, name, getattr(mod, name)) for mod, name in targets]
    try:
        for mod, name in targets:
            setattr(mod, name, guard)
        yield
    finally:
        for mod, name, fn in saved:
            setattr(mod, name, fn)


def _resolve_config(arg: str):
    if arg.startswith("bundled:"):
        name = arg.split(":", 1)[1]
        if not name.endswith(".json"):
            name += ".json"
        return resources.files("ptrg") / "configs" / name
    return Path(arg)


def bundled_configs() -> list[str]:
    root = resources.files("ptrg") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def run(config_path, out_dir=None, threads: int = 1, seedless: bool = False) -> int:
    """Execute one configuration; return the process exit code."""
    t0 = time.perf_counter()
    try:
        cfg = load_config(_resolve_config(str(config_path)))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out = Path(out_dir or cfg.output_dir or "out")
    summary = {
        "config": cfg.raw,
        "versions": {"ptrg": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        "task": cfg.task,
    }
    status, code, files = "ok", EXIT_OK, {}
    guard = forbid_randomness() if seedless else contextlib.nullcontext()
    try:
        with guard:
            metrics, files = TASK_HANDLERS[cfg.task](cfg, out, threads)
        summary["metrics"] = metrics
    except ValueError as exc:  # includes ConfigError and input-domain PTRGErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (PTRGError, np.linalg.LinAlgError) as exc:
        status, code = "numerical_failure", EXIT_NUMERICAL
        summary["error"] = f"{type(exc).__name__}: {exc}"
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    summary["status"] = status
    summary["exit_code"] = code

    out.mkdir(parents=True, exist_ok=True)
    for name, payload in sorted(files.items()):
        if name.endswith(".csv"):
            if "csv" in cfg.formats:
                _write_csv(out / name, *payload)
        elif "json" in cfg.formats:
            (out / name).write_text(dumps(payload), encoding="utf-8")
    (out / "summary.json").write_text(dumps(summary), encoding="utf-8")
    print(f"wall time {time.perf_counter() - t0:.3f} s", file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ptrg", description="Run a PT-symmetric Richardson-Gaudin experiment.")
    p.add_argument("--config", required=False, help="JSON config path or bundled:<name>")
    p.add_argument("--out", default=None, help="output directory (overrides the config)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for per-charge work")
    p.add_argument("--seedless", action="store_true", help="fail if any random number is drawn")
    p.add_argument("--list-bundled", action="store_true", help="list bundled configs and exit")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.list_bundled:
        print("\n".join(bundled_configs()))
        return EXIT_OK
    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return EXIT_INVALID
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    return run(args.config, args.out, args.threads, args.seedless)


if __name__ == "__main__":
    sys.exit(main())
