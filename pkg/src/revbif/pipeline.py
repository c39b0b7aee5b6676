"""End-to-end stages shared by the command line and the tests.

Each stage returns plain dictionaries ready for JSON. ``branches_document``
is self-contained: ``verify_document`` rebuilds the field, the coordinate map
and the seeds from it without re-deriving anything.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exprs import expand, parse_hamiltonian
from .io import SystemFile, config_hash, sha256_text, dump_system
from .linalg import matrix_from_json, matrix_to_json
from .normal_forms import NormalFormResult, birkhoff_normalize
from .orbits import FlowConfig, FamilyLost, absence_scan, certify_orbit, continue_family
from .poly import Poly, PolyVector, default_names, hamiltonian_vector_field
from .reduction import (BranchFamily, BranchReport, ReducedMap, RestrictedMap, analyze_branches,
                        build_reduced_map, numeric_branch_continue, restrict_to_fix)
from .symplectic import CanonicalModel, Classification, build_model, time_rescale
from .templates import center_coordinates, rotation_coordinates

__all__ = ["PipelineConfig", "Analysis", "parse_grid", "analyze_system", "branches_document",
           "verify_document", "scan_system", "provenance", "StageError", "SCENARIO"]

SCENARIO = {"4:2": "two one-parameter families", "6:2": "no small symmetric orbits",
            "6:4": "two two-parameter families"}


class StageError(RuntimeError):
    """Failure in a pipeline stage, tagged with module and operation."""

    def __init__(self, module: str, operation: str, message: str, locus: str = ""):
        super().__init__(f"[{module}.{operation}] {message}" + (f" ({locus})" if locus else ""))
        self.module, self.operation, self.locus = module, operation, locus


def parse_grid(grid: str | Sequence[float] | None, default: str = "1e-5:1e-2:10") -> list[float]:
    """``"a:b:steps"`` (logarithmic, positive) or a comma list; sorted decreasing."""
    if grid is None:
        grid = default
    if not isinstance(grid, str):
        vals = [float(v) for v in grid]
    elif ":" in grid:
        a, b, k = grid.split(":")
        a, b, k = float(a), float(b), int(k)
        if a <= 0 or b <= 0 or k < 1:
            raise ValueError("grid bounds must be positive and steps >= 1")
        vals = list(np.logspace(math.log10(a), math.log10(b), k))
    else:
        vals = [float(v) for v in grid.split(",") if v.strip()]
    if not vals:
        raise ValueError("empty grid")
    return sorted(vals, key=abs, reverse=True)


@dataclass
class PipelineConfig:
    input: str | None = None
    out: str | None = None
    order: int | None = None
    mode: str | None = None
    sigma_grid: list = field(default_factory=lambda: parse_grid(None))
    lambda_grid: list = field(default_factory=lambda: [0.0, 0.5, -0.5, 1.0])
    scan_seeds: int = 10000
    scan_radius: float = 0.1
    scan_halfwidth: float = 0.5
    tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if not self.sigma_grid or any(s <= 0 for s in self.sigma_grid):
            raise ValueError("sigma grid must be nonempty and positive")
        if self.scan_seeds < 0:
            raise ValueError("scan seed count must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    def hash(self) -> str:
        d = self.to_dict()
        d.pop("out", None)
        return config_hash(d)


def provenance(system: SystemFile | None, cfg: PipelineConfig, case: str, **extra) -> dict:
    p = {"config_hash": cfg.hash(), "case": case, "scenario": SCENARIO.get(case, ""),
         "seed": cfg.seed}
    if system is not None:
        p["input_sha256"] = sha256_text(dump_system(system))
        p["order"] = cfg.order or system.order
        p["mode"] = cfg.mode or system.mode
    p.update(extra)
    return p


@dataclass
class Analysis:
    system: SystemFile
    H: Poly
    classification: Classification
    model: CanonicalModel
    rescaled: CanonicalModel
    H_canonical: Poly
    H_rescaled: Poly
    order: int
    mode: str
    nf: NormalFormResult | None = None
    reduced: ReducedMap | None = None
    restricted: RestrictedMap | None = None
    report: BranchReport | None = None

    @property
    def case(self) -> str:
        return self.model.case

    @property
    def alpha(self):
        return self.model.alpha


def analyze_system(system: SystemFile, order: int | None = None, mode: str | None = None,
                   stop: str = "branches", lambdas: Sequence[float] = (0.0, 0.5, -0.5, 1.0)) -> Analysis:
    """Run the symbolic stages up to ``stop`` (``normalize``, ``nf``,
    ``reduce`` or ``branches``)."""
    order = order or system.order
    mode = mode or system.mode
    try:
        H = system.dynamics_polynomial()
        if mode == "float":
            H = H.to_float()
        cls, model = build_model(H, system.involution, system.symplectic)
        rmodel = time_rescale(model)
        Hc = H.substitute_linear(model.P)
        Hr = rmodel.to_canonical(H)
    except ValueError as exc:
        raise StageError("symplectic-lin", "normalize", str(exc), "input Hamiltonian") from exc
    an = Analysis(system, H, cls, model, rmodel, Hc, Hr, order, mode)
    if stop == "normalize":
        return an
    try:
        an.nf = birkhoff_normalize(Hr.truncate(order), order, rmodel)
    except ValueError as exc:
        raise StageError("normal-forms", "birkhoff_normalize", str(exc), f"order {order}") from exc
    if stop == "nf":
        return an
    try:
        an.reduced = build_reduced_map(an.nf, rmodel)
        an.restricted = restrict_to_fix(an.reduced)
    except ValueError as exc:
        raise StageError("ls-reduction", "build_reduced_map", str(exc)) from exc
    if stop == "reduce":
        return an
    try:
        an.report = analyze_branches(an.restricted, model.case, alpha=model.alpha, lambdas=lambdas)
    except ValueError as exc:
        raise StageError("ls-reduction", "analyze_branches", str(exc)) from exc
    return an


def _poly_text(p: Poly, names) -> str:
    return p.to_text(names) if not p.is_zero() else "0"


def branches_document(an: Analysis, sigmas: Sequence[float]) -> dict:
    """Branch families, refined tables and everything ``verify`` needs."""
    rep = an.report
    n = an.model.n
    names = list(default_names(n))
    Phi = an.nf.coordinate_map()
    fams = []
    for fam in rep.families:
        grid = [fam.sigma_sign * abs(s) for s in sigmas]
        table = numeric_branch_continue(fam, grid, an.restricted)
        fams.append({"family": fam.to_dict(), "table": table})
    return {
        "case": an.case,
        "verdict": rep.verdict,
        "report": rep.to_dict(),
        "alpha": an.alpha,
        "alpha_float": float(an.alpha),
        "variables": names,
        "hamiltonian_canonical": _poly_text(an.H_canonical, names),
        "R_hat": matrix_to_json(an.model.R_hat),
        "poisson_hat": matrix_to_json(an.model.poisson_hat),
        "P": matrix_to_json(an.model.P),
        "coordinate_map": [_poly_text(c, names) for c in Phi],
        "rotation_indices": rotation_coordinates(n),
        "center_indices": center_coordinates(n),
        "order": an.order,
        "mode": an.mode,
        "sigma_grid": list(map(float, sigmas)),
        "families": fams,
    }


def _poly_from_text(text: str, names) -> Poly:
    return expand(parse_hamiltonian(text, names), len(names))


def document_field(doc: dict):
    names = doc["variables"]
    H = _poly_from_text(doc["hamiltonian_canonical"], names)
    K = matrix_from_json(doc["poisson_hat"])
    X = hamiltonian_vector_field(H, K)
    return H, X, matrix_from_json(doc["R_hat"])


def _slope(amps, sig):
    a, s = np.asarray(amps, float), np.abs(np.asarray(sig, float))
    ok = (a > 0) & (s > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(s[ok]), np.log(a[ok]), 1)[0])


def verify_document(doc: dict, tol: float = 1e-12, closure_tol: float = 1e-10,
                    slope_tol: float = 0.02, period_tol: float = 1e-4,
                    noise_floor: float = 1e-10, families: Sequence[str] | None = None) -> dict:
    """Shoot every family of a branches document along its sigma grid.

    Returns
    -------
    dict
        ``records`` (per orbit), ``families`` (per-family checks) and
        ``passed``.
    """
    names = doc["variables"]
    n = len(names)
    H, X, R = document_field(doc)
    Phi = [_poly_from_text(t, names) for t in doc["coordinate_map"]]
    Phi = PolyVector(Phi).to_float()
    alpha = doc["alpha_float"]
    cfg = FlowConfig.for_involution(R, rtol=tol, atol=tol * 1e-2)
    fix = list(cfg.fix_indices)
    rot = [i for i in doc["rotation_indices"] if i in fix]
    field_c = X.to_float().compile()
    Rf = np.asarray(R, dtype=float)
    out_recs, fam_out = [], []
    for entry in doc["families"]:
        fam = entry["family"]
        if families is not None and fam["family_id"] not in families:
            continue
        fix_names = fam["fix_coordinates"]
        pinned = [fam["fix_indices"][fix_names.index(z)] for z in fam["zero_coordinates"]]
        pinned += [fam["fix_indices"][fix_names.index(c)] for c in fam["center_coordinates"]]
        seeds = []
        for row in entry["table"]:
            if not row["converged"] or row["amplitude"] <= 0:
                continue
            u = np.zeros(n)
            for k, idx in enumerate(fam["fix_indices"]):
                u[idx] = row["point"][k]
            x = np.array([float(c.evaluate(list(u))) for c in Phi])
            x[list(cfg.perp_indices)] = 0.0
            seeds.append((row["sigma"], x, 2 * math.pi / ((1 + row["sigma"]) * alpha)))
        lost = None
        try:
            recs = continue_family(field_c, cfg, seeds, fam["family_id"], pinned, rot, alpha)
        except FamilyLost as exc:
            recs, lost = exc.records, str(exc)
        for r in recs:
            if r.ok:
                r.extra.update(certify_orbit(field_c, cfg, r, Rf, H))
        good = [r for r in recs if r.ok]
        amps = [r.amplitude for r in good]
        sig_eff = [2 * math.pi / (alpha * r.T) - 1 for r in good]
        disc = [r.extra["period_discrepancy"] for r in good]
        checks = {
            "all_converged": lost is None and len(good) == len(seeds) and len(seeds) > 0,
            "closure": bool(good) and max(r.closure_residual for r in good) <= closure_tol,
            "slope": _slope(amps, sig_eff),
            "amplitude_monotone": all(a2 < a1 for a1, a2 in zip(amps, amps[1:])),
            "period_limit_error": abs(good[-1].T - 2 * math.pi / alpha) if good else float("inf"),
            "period_discrepancy_decreasing": all(
                d2 <= d1 or d2 <= noise_floor for d1, d2 in zip(disc, disc[1:])),
            "symmetry": max((r.extra.get("symmetry_residual", 0) for r in good), default=float("inf")),
            "energy_drift": max((r.extra.get("energy_drift", 0) for r in good), default=float("inf")),
        }
        checks["slope_ok"] = abs(checks["slope"] - 0.5) <= slope_tol
        checks["period_limit_ok"] = checks["period_limit_error"] <= period_tol
        checks["symmetry_ok"] = checks["symmetry"] <= 10 * max(tol, 1e-10)
        checks["energy_ok"] = checks["energy_drift"] <= 1e-8
        checks["passed"] = all(checks[k] for k in (
            "all_converged", "closure", "slope_ok", "amplitude_monotone", "period_limit_ok",
            "period_discrepancy_decreasing", "symmetry_ok", "energy_ok"))
        if lost:
            checks["lost"] = lost
        fam_out.append({"family_id": fam["family_id"], "lambda": fam.get("lambda"),
                        "center_direction": fam["center_direction"], "checks": checks})
        out_recs.extend(recs)
    return {"case": doc["case"], "records": [r.to_dict() for r in out_recs], "families": fam_out,
            "flow_config": cfg.to_dict(),
            "passed": bool(fam_out) and all(f["checks"]["passed"] for f in fam_out)}


def continuation_rows(result: dict) -> tuple[list, list]:
    header = ["family_id", "sigma", "amplitude", "period", "closure_residual", "fix_residual",
              "status"]
    rows = [[r["family_id"], r["sigma"], r["amplitude"], r["T"], r["closure_residual"],
             r["fix_residual"], r["status"]] for r in result["records"]]
    return header, rows


def scan_system(system: SystemFile, count: int, radius: float = 0.1, halfwidth: float = 0.5,
                seed: int = 0, tol: float = 1e-10) -> dict:
    """Absence scan in canonical coordinates around the equilibrium."""
    an = analyze_system(system, stop="normalize")
    K = an.model.poisson_hat
    X = hamiltonian_vector_field(an.H_canonical, K)
    cfg = FlowConfig.for_involution(an.model.R_hat, rtol=tol, atol=tol * 1e-2,
                                    newton_tol=1e-10, newton_rtol=1e-8)
    T = 2 * math.pi / float(an.alpha)
    rot = [i for i in rotation_coordinates(an.model.n) if i in cfg.fix_indices]
    rep = absence_scan(X.to_float().compile(), cfg, radius, count, (T - halfwidth, T + halfwidth),
                       rot, seed=seed)
    rep["case"] = an.case
    rep["flow_config"] = cfg.to_dict()
    return rep
