"""Command-line front end.

Exit codes: 0 every check passed, 1 a mathematical check failed (a witness
is printed), 2 the configuration was invalid.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Any, Optional, Sequence

from moddist.config import ConfigError, ExperimentConfig
from moddist.embedding import VerificationFailure, reports_to_csv, verify_embedding
from moddist.generators import (
    InvalidParams,
    ModularDistanceParams,
    base_generators,
    integer_relation_divisibility,
    triangle_free_check_bruteforce,
    triangle_free_check_valuation,
    truncated_generators,
    weight_function,
)
from moddist.quotient_graphs import InstanceTooLarge, spectral_dominance_check
from moddist.spectral import (
    CertificationInfeasible,
    DegenerateQuotient,
    SpectralCertificate,
    spectral_certificate,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class CheckFailed(Exception):
    def __init__(self, document: dict):
        self.document = document
        super().__init__("check failed")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dump_json(doc: Any) -> str:
    return json.dumps(doc, indent=2) + "\n"


# -- pipelines ---------------------------------------------------------------


def generators_document(cfg: ExperimentConfig) -> str:
    ws = weight_function(cfg.params, cfg.n)
    if cfg.format == "json":
        return dump_json(ws.to_dict())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "sign", "j", "x", "y", "w"])
    for g in truncated_generators(cfg.params, cfg.n):
        x, y = g.vector
        w = ws.entries[g.vector]
        writer.writerow([g.atom.t, g.atom.sign, g.scale, x, y, f"{w.numerator}/{w.denominator}"])
    return buf.getvalue()


def _certificate_job(job: tuple) -> SpectralCertificate:
    params, n, grid, refine, margin = job
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CertificationInfeasible)
        cert = spectral_certificate(weight_function(params, n), grid, refine, margin)
    for w in caught:
        print(f"warning: n={n}: {w.message}", file=sys.stderr)
    return cert


def bound_certificates(cfg: ExperimentConfig) -> list[SpectralCertificate]:
    jobs = [(cfg.params, n, cfg.grid, cfg.refinement(), cfg.margin) for n in cfg.sweep]
    threads = cfg.threads or os.cpu_count() or 1
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
            return list(pool.map(_certificate_job, jobs))
    return [_certificate_job(job) for job in jobs]


def trend_summary(k: int, certs: Sequence[SpectralCertificate]) -> dict:
    """Does the ratio-bound sequence move toward 1/(k+1)?"""
    target = Fraction(1, k + 1)
    ratios = [c.alpha_ratio_bound for c in certs]
    gaps = [r - float(target) for r in ratios]
    deficits = [max(0.0, -2.0 - c.inf_estimate) for c in certs]
    return {
        "target_ratio": f"{target.numerator}/{target.denominator}",
        "n": [c.n for c in certs],
        "alpha_ratio_bounds": [_fmt(r) for r in ratios],
        "inf_estimates": [_fmt(c.inf_estimate) for c in certs],
        "deficit_below_minus_two": [_fmt(d) for d in deficits],
        "chi_lower_bounds": [c.chi_lower_bound for c in certs],
        "final_gap": _fmt(gaps[-1]),
        "approaching_target": abs(gaps[-1]) <= abs(gaps[0]) + 1e-12,
        "best_chi_lower_bound": max(c.chi_lower_bound for c in certs),
        "limit_chi": k + 1,
    }


def bound_document(cfg: ExperimentConfig) -> dict:
    certs = bound_certificates(cfg)
    return {
        "certificates": [c.to_dict() for c in certs],
        "trend": trend_summary(cfg.k, certs),
    }


def embed_document(cfg: ExperimentConfig) -> str:
    try:
        reports = verify_embedding(cfg.params, cfg.n)
    except VerificationFailure as exc:
        raise CheckFailed({"verdict": "fail", "error": str(exc)}) from exc
    if cfg.format == "csv":
        return reports_to_csv(reports)
    return dump_json(
        {
            "p": cfg.p,
            "q": cfg.q,
            "k": cfg.k,
            "n": cfg.n,
            "verdict": "pass",
            "edges": [r.row() for r in reports],
        }
    )


def kernel_divisibility_document(params: ModularDistanceParams) -> dict:
    atoms = [a for a in base_generators(params) if a.sign == 1]
    failures = []
    count = 0
    for triple in itertools.combinations(atoms, 3):
        count += 1
        try:
            integer_relation_divisibility(params, list(triple))
        except AssertionError as exc:
            failures.append(str(exc))
    return {
        "triples_checked": count,
        "verdict": "pass" if not failures else "fail",
        "failures": failures,
    }


def triangle_document(cfg: ExperimentConfig) -> dict:
    brute = triangle_free_check_bruteforce(cfg.params, cfg.max_scale)
    valuation = triangle_free_check_valuation(cfg.params)
    doc = brute.to_dict()
    doc["valuation_argument"] = valuation.verdict
    doc["kernel_divisibility"] = kernel_divisibility_document(cfg.params)
    ok = brute.passed and valuation.passed and doc["kernel_divisibility"]["verdict"] == "pass"
    doc["verdict"] = "pass" if ok else "fail"
    return doc


def quotient_document(cfg: ExperimentConfig) -> dict:
    ws = weight_function(cfg.params, cfg.n)
    moduli = cfg.moduli or [5]
    reports = [spectral_dominance_check(ws, m, cfg.vertex_cap) for m in moduli]
    docs = [r.to_dict() for r in reports]
    if len(docs) == 1:
        return {"p": cfg.p, "q": cfg.q, "k": cfg.k, "n": cfg.n, **docs[0]}
    return {"p": cfg.p, "q": cfg.q, "k": cfg.k, "n": cfg.n, "quotients": docs}


def report_document(cfg: ExperimentConfig) -> dict:
    """Run every check and attach one verdict per claim."""
    params = cfg.params
    ws = weight_function(params, cfg.n)
    verdicts: dict[str, str] = {}

    verdicts["total_weight_2k"] = "pass" if ws.total_weight == 2 * params.k else "fail"
    verdicts["central_symmetry"] = "pass" if ws.is_centrally_symmetric() else "fail"

    try:
        reports = verify_embedding(params, cfg.n)
        embed = {"verdict": "pass", "edges": len(reports)}
    except VerificationFailure as exc:
        embed = {"verdict": "fail", "error": str(exc)}
    verdicts["embedding_distance_p_mod_q"] = embed["verdict"]

    triangle = triangle_document(cfg)
    verdicts["triangle_free"] = triangle["verdict"]

    quotients = []
    dominance = "pass"
    for m in cfg.moduli:
        try:
            quotients.append(spectral_dominance_check(ws, m, cfg.vertex_cap).to_dict())
        except (DegenerateQuotient, InstanceTooLarge) as exc:
            quotients.append({"m": m, "skipped": f"{type(exc).__name__}: {exc}"})
        except AssertionError as exc:
            quotients.append({"m": m, "error": str(exc)})
            dominance = "fail"
    verdicts["finite_ratio_bound_dominance"] = dominance

    bound = bound_document(cfg)
    trend = bound["trend"]
    verdicts["chromatic_bound_trend"] = (
        "approaching" if trend["approaching_target"] else "not-approaching"
    )

    failed = [k for k, v in verdicts.items() if v == "fail"]
    return {
        "config": {
            "p": params.p,
            "q": params.q,
            "k": params.k,
            "n": cfg.n,
            "n_sweep": cfg.sweep,
            "grid": cfg.grid,
            "levels": cfg.levels,
            "moduli": list(cfg.moduli),
            "max_scale": cfg.max_scale,
            "margin": _fmt(cfg.margin),
        },
        "verdicts": verdicts,
        "overall": "fail" if failed else "pass",
        "generators": {"count": len(ws), "total_weight": str(ws.total_weight)},
        "embedding": embed,
        "triangle": triangle,
        "quotients": quotients,
        "bound": bound,
    }


# -- argument handling -------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moddist",
        description="Spectral chromatic bounds for modular-distance graphs on Z^2.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with ExperimentConfig fields")
    common.add_argument("--p", type=int, default=argparse.SUPPRESS)
    common.add_argument("--q", type=int, default=argparse.SUPPRESS)
    common.add_argument("--k", type=int, default=argparse.SUPPRESS)
    common.add_argument("--n", type=int, default=argparse.SUPPRESS)
    common.add_argument("--format", choices=["json", "csv"], default=argparse.SUPPRESS)
    common.add_argument("--output", "-o", default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)

    spectral = argparse.ArgumentParser(add_help=False)
    spectral.add_argument("--n-sweep", dest="n_sweep", type=_int_list, default=argparse.SUPPRESS)
    spectral.add_argument("--grid", type=int, default=argparse.SUPPRESS)
    spectral.add_argument("--levels", type=int, default=argparse.SUPPRESS)
    spectral.add_argument("--starts", type=int, default=argparse.SUPPRESS)
    spectral.add_argument(
        "--no-resonance-seeds", dest="resonance_seeds", action="store_false",
        default=argparse.SUPPRESS,
    )
    spectral.add_argument("--margin", type=float, default=argparse.SUPPRESS)
    spectral.add_argument("--certify", action="store_true", default=argparse.SUPPRESS)
    spectral.add_argument(
        "--target-separation", dest="target_separation", type=float, default=argparse.SUPPRESS
    )

    quotient = argparse.ArgumentParser(add_help=False)
    quotient.add_argument("--m", dest="moduli", type=_int_list, default=argparse.SUPPRESS)
    quotient.add_argument("--cap", dest="vertex_cap", type=int, default=argparse.SUPPRESS)

    triangle = argparse.ArgumentParser(add_help=False)
    triangle.add_argument("--max-scale", dest="max_scale", type=int, default=argparse.SUPPRESS)

    sub.add_parser("generators", parents=[common], help="emit the weighted generating set")
    sub.add_parser("bound", parents=[common, spectral], help="spectral certificates over n")
    sub.add_parser("embed-verify", parents=[common], help="exact distance check per generator")
    sub.add_parser("triangle-check", parents=[common, triangle], help="triangle-freeness")
    sub.add_parser("quotient-alpha", parents=[common, quotient], help="exact alpha of quotients")
    sub.add_parser(
        "report", parents=[common, spectral, quotient, triangle], help="run everything"
    )
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = vars(args).copy()
    command = values.pop("command")
    path = values.pop("config", None)
    base = ExperimentConfig.from_file(path).to_dict() if path else {}
    if command == "embed-verify" and "format" not in values and "format" not in base:
        values["format"] = "csv"
    base.update(values)
    return ExperimentConfig.from_mapping(base).validate()


def _emit(text: str, cfg: ExperimentConfig, command: str) -> None:
    path = cfg.output_path(command)
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ConfigError, InvalidParams, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    command = args.command
    try:
        if command == "generators":
            _emit(generators_document(cfg), cfg, command)
            return EXIT_OK
        if command == "bound":
            _emit(dump_json(bound_document(cfg)), cfg, command)
            return EXIT_OK
        if command == "embed-verify":
            _emit(embed_document(cfg), cfg, command)
            return EXIT_OK
        if command == "triangle-check":
            doc = triangle_document(cfg)
            _emit(dump_json(doc), cfg, command)
            return EXIT_OK if doc["verdict"] == "pass" else EXIT_FAIL
        if command == "quotient-alpha":
            _emit(dump_json(quotient_document(cfg)), cfg, command)
            return EXIT_OK
        if command == "report":
            doc = report_document(cfg)
            _emit(dump_json(doc), cfg, command)
            return EXIT_OK if doc["overall"] == "pass" else EXIT_FAIL
    except CheckFailed as exc:
        _emit(dump_json(exc.document), cfg, command)
        return EXIT_FAIL
    except (DegenerateQuotient, InstanceTooLarge, InvalidParams) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssertionError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    raise AssertionError(f"unhandled command {command}")


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
