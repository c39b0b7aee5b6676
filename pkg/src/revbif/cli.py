"""Command line interface: ``revbif <subcommand> [options]``.

Subcommands share one option set; artifacts go to ``--out`` (default: the
``REVBIF_OUT`` environment variable, else ``./revbif_out``). Exit status is 0
iff every declared check of the subcommand passes; a verdict such as "outside
the generic set" is a result, not a failure.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

from . import __version__
from .demos import DEMO_CASES, demo_system
from .io import dump_results, load_results, load_system, write_csv
from .pipeline import (PipelineConfig, StageError, analyze_system, branches_document,
                       continuation_rows, parse_grid, provenance, scan_system, verify_document)

SUBCOMMANDS = ("normalize", "nf", "reduce", "branches", "verify", "scan", "demo")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="revbif", description=(
        "Symmetric periodic orbits near elliptic equilibria of reversible Hamiltonian systems."))
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="SUBCOMMAND")
    sub.required = True
    helps = {
        "normalize": "classify the linear part and write the canonical model",
        "nf": "reversible Birkhoff normal form",
        "reduce": "reduced map B and its restriction G to Fix(R)",
        "branches": "branch families, verdicts and refined tables",
        "verify": "shoot the families of a branches.json",
        "scan": "quasi-random absence scan around the equilibrium",
        "demo": "run the built-in systems end to end",
    }
    for name in SUBCOMMANDS:
        s = sub.add_parser(name, help=helps[name])
        s.add_argument("--input", help="system file (verify: branches.json)")
        s.add_argument("--out", default=None, help="output directory")
        s.add_argument("--order", type=int, default=None, help="truncation order")
        s.add_argument("--mode", choices=("exact", "float"), default=None)
        s.add_argument("--sigma-grid", default="1e-5:1e-2:10",
                       help="a:b:steps (logarithmic) or a comma list of |sigma|")
        s.add_argument("--lambda-grid", default="0,0.5,-0.5,1",
                       help="comma list of center-direction ratios (the b = 0 boundary is added)")
        s.add_argument("--scan-seeds", type=int, default=10000)
        s.add_argument("--scan-radius", type=float, default=0.1)
        s.add_argument("--tol", type=float, default=1e-12, help="integrator relative tolerance")
        s.add_argument("--seed", type=int, default=0)
        if name == "demo":
            s.add_argument("--case", choices=DEMO_CASES + ("all",), default="all")
            s.add_argument("--alpha", default="1", help="linear frequency of the demo systems")
    return p


def _config(args) -> PipelineConfig:
    lam = [float(v) for v in args.lambda_grid.split(",") if v.strip()]
    return PipelineConfig(input=args.input, out=args.out, order=args.order, mode=args.mode,
                          sigma_grid=parse_grid(args.sigma_grid), lambda_grid=lam,
                          scan_seeds=args.scan_seeds, scan_radius=args.scan_radius,
                          tol=args.tol, seed=args.seed)


def _outdir(args) -> Path:
    out = args.out or os.environ.get("REVBIF_OUT") or "revbif_out"
    return Path(out)


def _need_input(args):
    if not args.input:
        raise StageError("cli-pipeline", args.command, "--input is required")
    return load_system(args.input)


def _write(out: Path, name: str, payload, kind: str, prov: dict):
    path = dump_results(payload, out / name, kind=kind, provenance=prov)
    print(f"wrote {path}")
    return path


def _cmd_symbolic(args, cfg, out) -> int:
    system = _need_input(args)
    stop = {"normalize": "normalize", "nf": "nf", "reduce": "reduce", "branches": "branches"}[args.command]
    an = analyze_system(system, cfg.order, cfg.mode, stop=stop, lambdas=cfg.lambda_grid)
    prov = provenance(system, cfg, an.case)
    if stop == "normalize":
        payload = {"classification": an.classification.to_dict(), "model": an.model.to_dict(),
                   "rescaled_model": an.rescaled.to_dict(),
                   "hamiltonian_canonical": an.H_canonical.to_text()}
        _write(out, "canonical_model.json", payload, "canonical_model", prov)
        print(f"case {an.case}, alpha = {an.alpha}, method {an.model.method}")
        return 0
    if stop == "nf":
        _write(out, "normal_form.json", an.nf.to_dict(), "normal_form", prov)
        print(f"normal form to order {an.order}: certificates {'pass' if an.nf.passed else 'FAIL'}")
        return 0 if an.nf.passed else 1
    if stop == "reduce":
        payload = {"reduced_map": an.reduced.to_dict(), "restricted": an.restricted.to_dict()}
        _write(out, "reduced_map.json", payload, "reduced_map", prov)
        for k, v in an.restricted.to_dict()["components"].items():
            print(f"G[{k}] = {v}")
        return 0
    doc = branches_document(an, cfg.sigma_grid)
    _write(out, "branches.json", doc, "branches", prov)
    rows = []
    for e in doc["families"]:
        for r in e["table"]:
            rows.append([e["family"]["family_id"], r["sigma"], r["amplitude"], r["residual"],
                         r["converged"]])
    write_csv(out / "branch_table.csv", ["family_id", "sigma", "amplitude", "residual", "converged"], rows)
    print(f"verdict: {doc['verdict']}")
    for e in doc["families"]:
        print(f"  {e['family']['family_id']}: {e['family']['leading_law']}")
    return 0


def _cmd_verify(args, cfg, out) -> int:
    if not args.input:
        raise StageError("cli-pipeline", "verify", "--input branches.json is required")
    doc = load_results(args.input, kind="branches")
    payload = doc["payload"]
    res = verify_document(payload, tol=cfg.tol)
    prov = dict(doc.get("provenance", {}))
    prov["config_hash"] = cfg.hash()
    _write(out, "orbits.json", res, "orbits", prov)
    h, rows = continuation_rows(res)
    write_csv(out / "continuation.csv", h, rows)
    for f in res["families"]:
        c = f["checks"]
        print(f"  {f['family_id']}: {'pass' if c['passed'] else 'FAIL'} slope={c['slope']:.4f} "
              f"period_err={c['period_limit_error']:.2e}")
    return 0 if res["passed"] or payload["verdict"] != "families" else 1


def _cmd_scan(args, cfg, out) -> int:
    system = _need_input(args)
    rep = scan_system(system, cfg.scan_seeds, cfg.scan_radius, seed=cfg.seed)
    _write(out, "scan.json", rep, "scan", provenance(system, cfg, rep["case"]))
    print(f"outcomes {rep['outcomes']}; verdict: {rep['verdict']} ({rep['note']})")
    return 0


def run_demo(case: str, cfg: PipelineConfig, out: Path | None = None, alpha="1",
             scan_seeds: int | None = None) -> list[tuple[str, str, bool]]:
    """Run one demo end to end; returns ``(check, value, passed)`` rows."""
    system = demo_system(case, alpha)
    an = analyze_system(system, cfg.order, cfg.mode, lambdas=cfg.lambda_grid)
    rows = []
    rows.append(("reduced map identities", "exact",
                 all(an.reduced.certificates[k] for k in ("equivariance", "anti_equivariance"))))
    doc = branches_document(an, cfg.sigma_grid)
    prov = provenance(system, cfg, case)
    if out is not None:
        dump_results(doc, out / f"demo_{case.replace(':', '-')}" / "branches.json", kind="branches",
                     provenance=prov)
    T = 2 * math.pi / float(an.alpha)
    if case in ("4:2", "6:4"):
        nf = len(doc["families"])
        rows.append(("families", str(nf), doc["verdict"] == "families" and nf > 0))
        res = verify_document(doc, tol=cfg.tol)
        if out is not None:
            d = out / f"demo_{case.replace(':', '-')}"
            dump_results(res, d / "orbits.json", kind="orbits", provenance=prov)
            h, r = continuation_rows(res)
            write_csv(d / "continuation.csv", h, r)
        slopes = [f["checks"]["slope"] for f in res["families"]]
        perr = max(f["checks"]["period_limit_error"] for f in res["families"])
        rows.append(("amplitude slope", f"{min(slopes):.4f}..{max(slopes):.4f}",
                     all(f["checks"]["slope_ok"] for f in res["families"])))
        rows.append((f"period -> {T:.6f}", f"{perr:.2e}",
                     all(f["checks"]["period_limit_ok"] for f in res["families"])))
        rows.append(("all family checks", "", res["passed"]))
    else:
        res_val = an.report.coefficients["resultant"]
        rows.append(("resultant", str(res_val), an.report.verdict == "no-branch"))
        n = cfg.scan_seeds if scan_seeds is None else scan_seeds
        rep = scan_system(system, n, cfg.scan_radius, seed=cfg.seed)
        if out is not None:
            dump_results(rep, out / "demo_6-2" / "scan.json", kind="scan", provenance=prov)
        rows.append((f"scan ({n} seeds)", f"{len(rep['found'])} found", not rep["found"]))
    return rows


def _cmd_demo(args, cfg, out) -> int:
    cases = DEMO_CASES if args.case == "all" else (args.case,)
    ok = True
    table = []
    for c in cases:
        t0 = time.time()
        rows = run_demo(c, cfg, out, args.alpha)
        for name, val, passed in rows:
            table.append((c, name, val, passed))
            ok &= passed
        print(f"case {c} done in {time.time() - t0:.1f} s")
    w = max(len(r[1]) for r in table)
    print(f"{'case':<5} {'check':<{w}} {'value':<22} result")
    for c, name, val, passed in table:
        print(f"{c:<5} {name:<{w}} {val:<22} {'PASS' if passed else 'FAIL'}")
    dump_results({"rows": [list(r) for r in table], "passed": ok}, out / "demo_summary.json",
                 kind="demo_summary", provenance=provenance(None, cfg, ",".join(cases)))
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
    except ValueError as exc:
        parser.error(str(exc))
    out = _outdir(args)
    try:
        if args.command in ("normalize", "nf", "reduce", "branches"):
            return _cmd_symbolic(args, cfg, out)
        if args.command == "verify":
            return _cmd_verify(args, cfg, out)
        if args.command == "scan":
            return _cmd_scan(args, cfg, out)
        return _cmd_demo(args, cfg, out)
    except StageError as exc:
        _failure(out, args.command, exc)
        return 2
    except (ValueError, OSError) as exc:
        _failure(out, args.command, StageError("cli-pipeline", args.command, str(exc),
                                               args.input or ""))
        return 2


def _failure(out: Path, command: str, exc: StageError):
    print(f"error {exc}", file=sys.stderr)
    try:
        dump_results({"failed": True, "error": str(exc), "module": exc.module,
                      "operation": exc.operation, "locus": exc.locus},
                     out / f"{command}.failed.json", kind="failure")
    except OSError:
        pass


if __name__ == "__main__":
    sys.exit(main())
