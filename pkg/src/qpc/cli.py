"""Command-line front end.  Every subcommand reads and writes files.

Exit status: 0 on success, 1 on invalid input, 2 when a solver fails (a flagged
artifact is still written when ``--out`` is given).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import io
from .capability import CapabilityKind, capability_report
from .errors import QpcError, SolverError, ValidationError
from .estimation import F_LB_MODES, estimate_capability, estimate_from_probabilities, estimate_with_errors
from .multiphoton import composition_criterion, thresholds, witness_from_counts
from .quantum import procmat_from_dict, procmat_to_dict
from .simulator import (
    DetectionModel,
    FusionUnitModel,
    PRESETS,
    SourceModel,
    fusion_with_delay,
    generate_counts,
    load_preset,
    squeezing_for_p1,
    sweep_delay,
    sweep_to_csv,
)
from .tomography import ClassicalFidelities, TomographyRecord, classical_fidelities, mle_fit, qpt_from_record

log = logging.getLogger("qpc")

KIND_CHOICES = ("cre", "pre")
CONFIG_FIELDS = {"schema", "kind", "name", "visibility", "coherence_length_um", "p1", "accidental_rate",
                 "n_t", "seed", "pair_rate", "p_white", "p_deph", "delays_um", "delay_um", "integration_time"}


def _configure_logging() -> None:
    level = os.environ.get("QPC_LOG", "WARNING").upper()
    if not isinstance(logging.getLevelName(level), int):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _emit(obj, out: str | None) -> None:
    text = io.dumps(obj)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_text(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_config(args) -> dict:
    if args.preset and args.inp:
        raise ValidationError("give either --preset or --in, not both")
    if args.preset:
        cfg = load_preset(args.preset)
    elif args.inp:
        cfg = io.read_json(args.inp)
    else:
        raise ValidationError("a model needs --preset or --in")
    io.check_fields(cfg, CONFIG_FIELDS, "simulation config", {"visibility"})
    return cfg


def _models(cfg: dict, seed: int | None):
    if "p1" in cfg and "accidental_rate" in cfg:
        raise ValidationError("give p1 or accidental_rate, not both")
    source = SourceModel(cfg.get("p_white", 0.0), cfg.get("p_deph", 0.0), cfg.get("pair_rate", 0.0),
                         squeezing_for_p1(cfg["p1"]) if "p1" in cfg else 0.0)
    acc = cfg.get("accidental_rate", source.accidental_fraction())
    unit = FusionUnitModel(float(cfg.get("delay_um", 0.0)), float(cfg.get("coherence_length_um", 203.0)),
                           float(cfg["visibility"]), float(acc))
    det = DetectionModel(int(cfg.get("n_t", 100_000)), int(cfg.get("seed", 0) if seed is None else seed),
                         cfg.get("integration_time"))
    return unit, det


# -- subcommands -----------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    unit, det = _models(cfg, args.seed)
    if args.delay is not None:
        unit = replace(unit, delay_um=args.delay)
    rec = generate_counts(fusion_with_delay(unit), det, unit.accidental_rate)
    rec.metadata.update({"delay_um": unit.delay_um, "visibility": unit.visibility,
                         "coherence_length_um": unit.coherence_length_um})
    _emit(rec.to_dict(), args.out)
    return 0


def _load_record(path: str) -> TomographyRecord:
    d = io.read_json(path)
    if not isinstance(d, dict):
        raise ValidationError(f"{path}: expected a tomography record object")
    return TomographyRecord.from_dict(d)


def cmd_reconstruct(args) -> int:
    rec = _load_record(args.inp)
    if args.method == "linear":
        chi = qpt_from_record(rec).normalize()
        out = {"method": "linear", "chi": procmat_to_dict(chi)}
    else:
        res = mle_fit(rec)
        out = {"method": "mle", "converged": res.converged, "iterations": res.iterations,
               "residual": res.residual, "lambda": res.lam, "chi": procmat_to_dict(res.chi.normalize())}
        if not res.converged:
            out["flags"] = ["MLE optimiser stopped before convergence"]
    _emit({"schema": io.SCHEMA, "kind": "reconstruction", **out}, args.out)
    return 0


def _load_chi(path: str):
    d = io.read_json(path)
    if isinstance(d, dict) and d.get("kind") == "reconstruction":
        d = d["chi"]
    if not isinstance(d, dict) or "matrix" not in d:
        raise ValidationError(f"{path}: expected a process matrix object")
    io.check_fields(d, {"schema", "kind", "dim", "normalized", "matrix"}, "process matrix")
    chi = procmat_from_dict(d)
    return chi if chi.normalized else chi.normalize()


def cmd_capability(args) -> int:
    chi = _load_chi(args.inp)
    kinds = [CapabilityKind.parse(k) for k in (args.kind or list(KIND_CHOICES))]
    reports = [capability_report(chi, k, args.tol, args.audit, args.seed or 0).to_dict(args.matrices)
               for k in kinds]
    _emit(reports[0] if len(reports) == 1 else {"schema": io.SCHEMA, "kind": "capability_reports",
                                                  "reports": reports}, args.out)
    return 0


def _load_fidelities(path: str):
    d = io.read_json(path)
    if isinstance(d, list):
        return None, d
    if not isinstance(d, dict):
        raise ValidationError(f"{path}: expected fidelities, probabilities or a tomography record")
    if d.get("kind") == "tomography_record":
        return classical_fidelities(TomographyRecord.from_dict(d)), None
    return ClassicalFidelities.from_dict(d), None


def cmd_estimate(args) -> int:
    f, probs = _load_fidelities(args.inp)
    kind = CapabilityKind.parse(args.kind[0] if args.kind else "cre")
    if probs is not None:
        est = estimate_from_probabilities(probs, kind, args.tol)
    elif args.errors:
        est = estimate_with_errors(f, None, kind, args.tol, f_lb_mode=args.f_lb_mode)
    else:
        est = estimate_capability(f, kind, args.tol, f_lb_mode=args.f_lb_mode)
    _emit(est.to_dict(), args.out)
    return 0


def _threshold_value(d: dict) -> float:
    th = d["threshold"]
    if isinstance(th, str):
        return thresholds(int(d.get("n_photons", 4)), th)
    return float(th)


def cmd_criterion(args) -> int:
    d = io.read_json(args.inp)
    io.check_fields(d, {"schema", "kind", "alphas", "tr_out", "tr_c", "f_sep", "f_c", "threshold", "n_photons"},
                    "criterion input", {"alphas", "tr_out", "tr_c", "f_sep", "f_c", "threshold"})
    rep = composition_criterion(d["alphas"], float(d["tr_out"]), float(d["tr_c"]), float(d["f_sep"]),
                                float(d["f_c"]), _threshold_value(d))
    _emit(rep.to_dict(), args.out)
    return 0


def cmd_witness(args) -> int:
    d = io.read_json(args.inp)
    if isinstance(d, list):
        d = {"counts": d}
    io.check_fields(d, {"schema", "kind", "pattern", "phase", "counts", "metadata"}, "witness counts", {"counts"})
    x_counts, z_counts = {}, {}
    for k, row in enumerate(d["counts"]):
        io.check_fields(row, {"basis", "outcome", "n"}, f"counts[{k}]", {"basis", "outcome", "n"})
        table = {"X": x_counts, "Z": z_counts}.get(row["basis"])
        if table is None:
            raise ValidationError(f"counts[{k}]: basis must be 'X' or 'Z'")
        if row["outcome"] in table:
            raise ValidationError(f"counts[{k}]: duplicate outcome {row['outcome']!r}")
        table[row["outcome"]] = row["n"]
    pattern = d.get("pattern", "HVHVVH")
    phase = int(d.get("phase", 1))
    value, err = witness_from_counts(x_counts, z_counts, pattern, phase)
    _emit({"schema": io.SCHEMA, "kind": "witness_result", "pattern": pattern, "phase": phase,
           "witness": value, "witness_err": err, "detects_entanglement": value + 0.0 < 0.0}, args.out)
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    unit, det = _models(cfg, args.seed)
    delays = cfg.get("delays_um")
    if not delays:
        raise ValidationError("sweep needs 'delays_um' in the config")
    pts = sweep_delay(unit, det, delays, CapabilityKind.parse(args.kind[0] if args.kind else "cre"),
                      noiseless=args.noiseless, jobs=args.jobs, tol=args.tol)
    _emit_text(sweep_to_csv(pts), args.out)
    flagged = [f"{p.delta_tau_um:g}: {'; '.join(p.flags)}" for p in pts if p.flags]
    for line in flagged:
        log.warning("sweep point %s", line)
    return 0


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="inp", help="input file")
    common.add_argument("--out", help="output file (stdout when omitted)")
    common.add_argument("--kind", choices=KIND_CHOICES, action="append",
                        help="capability kind; repeat for both (default: both for capability, cre otherwise)")
    common.add_argument("--seed", type=int, default=None, help="RNG seed override")
    common.add_argument("--tol", type=float, default=1e-7, help="SDP tolerance")
    common.add_argument("--preset", choices=PRESETS, help="bundled simulator preset")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers (sweep)")

    p = argparse.ArgumentParser(prog="qpc", description="Capability analysis of two-photon fusion processes.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="model -> tomography record")
    s.add_argument("--delay", type=float, default=None, help="interferometer delay in micrometres")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("reconstruct", parents=[common], help="record -> process matrix")
    s.add_argument("--method", choices=("linear", "mle"), default="mle")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("capability", parents=[common], help="process matrix -> capability report")
    s.add_argument("--audit", type=int, default=0, help="random product inputs checked on the incapable part")
    s.add_argument("--no-matrices", dest="matrices", action="store_false", help="omit decomposition matrices")
    s.set_defaults(func=cmd_capability)

    s = sub.add_parser("estimate", parents=[common], help="classical fidelities -> partial-data estimate")
    s.add_argument("--errors", action="store_true", help="also compute the F_LB +- dF_LB band")
    s.add_argument("--f-lb-mode", choices=F_LB_MODES, default="none",
                   help="tie the fusion fidelity of the estimate to F_LB (equal) or leave it free")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("criterion", parents=[common], help="compositions + constituents -> verdict")
    s.set_defaults(func=cmd_criterion)

    s = sub.add_parser("witness", parents=[common], help="X/Z count record -> GHZ witness value")
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("sweep", parents=[common], help="preset -> capability-vs-delay CSV")
    s.add_argument("--noiseless", action="store_true", help="use expected instead of sampled counts")
    s.set_defaults(func=cmd_sweep)
    return p


def _failure_artifact(exc: SolverError) -> dict:
    d = {"schema": io.SCHEMA, "kind": "solver_failure", "message": str(exc), "flags": ["solver_failure"]}
    if exc.solution is not None:
        d["solver_certificates"] = exc.solution.certificates()
    return d


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol <= 0:
        parser.error("--tol must be positive")
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args)
    except SolverError as exc:
        log.error("%s", exc)
        if args.out:
            Path(args.out).write_text(io.dumps(_failure_artifact(exc)), encoding="utf-8")
        return 2
    except (ValidationError, QpcError) as exc:
        log.error("%s", exc)
        return 1
    except OSError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
