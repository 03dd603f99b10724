"""Command-line front end: config ingestion, orchestration, report emission.

One JSON config per run.  Exit codes: 0 when every check passes, 2 when a
check fails, 1 on configuration or usage errors.  Reports are deterministic
given (config, seed) up to the wall-time field.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import jsonschema
import numpy as np

from . import schemas, suites
from .berezin import (
    KernelError,
    berezin_kernel,
    berezin_transform,
    minimal_dilation,
    moment_check,
    vn_check,
)
from .beurling import (
    SubspaceError,
    SubspaceHandle,
    beurling_conditions,
    beurling_factorize,
    coinvariant_span,
    compression_model,
)
from .fockmodel import TruncatedModel
from .phases import TwistError
from .polyball import TupleError, check_membership, mixed_defect
from .rewrite import AlgebraError, reduce_word
from .schemas import CONFIG_SCHEMAS
from .suites import Record
from .wold import SpecError, TupleSpec, assemble, wandering_data, wold_projections
from .words import ConfigError

EXIT_OK, EXIT_USAGE, EXIT_CHECK_FAILED = 0, 1, 2


class ConfigValidationError(ValueError):
    """Config rejected before any computation; carries JSON-pointer paths."""

    def __init__(self, pointers):
        self.pointers = pointers
        super().__init__("; ".join(msg for _, msg in pointers))


@dataclass(frozen=True)
class RunConfig:
    """One validated run: command name plus its schema-checked payload."""

    command: str
    data: dict

    @staticmethod
    def load(command: str, path) -> "RunConfig":
        with open(path) as fh:
            data = json.load(fh)
        validator = jsonschema.Draft202012Validator(CONFIG_SCHEMAS[command])
        errors = sorted(validator.iter_errors(data),
                        key=lambda e: list(e.absolute_path))
        if errors:
            raise ConfigValidationError(
                [(_pointer(e.absolute_path), f"{_pointer(e.absolute_path)}: {e.message}")
                 for e in errors]
            )
        return RunConfig(command, data)

    def __getitem__(self, key):
        return self.data[key]

    def __contains__(self, key):
        return key in self.data

    def get(self, key, default=None):
        return self.data.get(key, default)


def _versions() -> dict:
    try:
        pkg = metadata.version("polyball-lab")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "polyball-lab": pkg,
    }


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path)


def _matrix_json(mat: np.ndarray) -> dict:
    payload = {
        "dim": mat.shape[0],
        "entries": [[float(z.real), float(z.imag)] for row in mat for z in row],
    }
    if mat.shape[0] != mat.shape[1]:
        payload["cols"] = mat.shape[1]
    return payload


@dataclass
class Report:
    """Deterministic run record: config echo, per-check results, versions."""

    command: str
    config: dict
    records: list
    extra: dict = field(default_factory=dict)
    wall_time_s: float | None = None

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "records": [r.to_json() for r in self.records],
            "extra": self.extra,
            "wall_time_s": self.wall_time_s,
            "versions": _versions(),
        }

    @property
    def failed(self) -> bool:
        return any(r.passed is False for r in self.records)


def write_report(out_dir: Path, command: str, config, records: list[Record],
                 extra: dict | None = None,
                 spectra: np.ndarray | None = None,
                 matrices: dict | None = None):
    out_dir.mkdir(parents=True, exist_ok=True)
    config_echo = config.data if isinstance(config, RunConfig) else config
    report = Report(command, config_echo, records, extra or {})
    path = out_dir / "report.json"
    if spectra is not None:
        with open(out_dir / "spectra.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "eigenvalue"])
            for idx, value in enumerate(spectra):
                writer.writerow([idx, repr(float(value))])
        report.extra["spectra_csv"] = "spectra.csv"
    if matrices:
        mat_dir = out_dir / "matrices"
        mat_dir.mkdir(exist_ok=True)
        for name, mat in matrices.items():
            with open(mat_dir / f"{name}.json", "w") as fh:
                json.dump(_matrix_json(mat), fh)
        report.extra["matrices"] = sorted(matrices)
    return path, report


def _finish(path: Path, report: Report, started: float) -> int:
    report.wall_time_s = time.perf_counter() - started
    with open(path, "w") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True, default=str)
    for r in report.records:
        print(f"[{r.status:>7}] {r.name}"
              + (f"  residual={r.residual:.3e}" if r.residual is not None else "")
              + (f"  ({r.reason})" if r.reason else ""))
    print(f"report: {path}")
    return EXIT_CHECK_FAILED if report.failed else EXIT_OK


# --------------------------------------------------------------------------
# subcommand bodies


def cmd_check(config: RunConfig, out_dir: Path, started: float) -> int:
    lam, _D = schemas.parse_model(config["model"])
    T = schemas.parse_tuple(lam, config["tuple"])
    tol = config.get("tolerance", 1e-10)
    report = check_membership(T, tol)
    records = [
        Record("lambda_commuting", report.is_lambda_commuting,
               residual=report.commutation_residual),
    ]
    for powers, eig in report.positivity.items():
        records.append(Record(f"defect_positive[{''.join(map(str, powers))}]",
                              eig >= -1e-9, residual=float(eig)))
    records.append(Record("member", report.is_member))
    spectra = np.linalg.eigvalsh(mixed_defect(T, (1,) * T.k))
    path, payload = write_report(out_dir, "check", config, records,
                                 extra={"membership": report.to_json()},
                                 spectra=spectra)
    return _finish(path, payload, started)


def cmd_rewrite(config: RunConfig, out_dir: Path, started: float) -> int:
    lam, _ = schemas.parse_model(config["model"])
    word = schemas.parse_word(config["word"])
    left = reduce_word(lam, word, "leftmost")
    right = reduce_word(lam, word, "rightmost")
    records = [Record("confluent", left.terms == right.terms)]
    path, payload = write_report(out_dir, "rewrite", config, records,
                                 extra={"normal_form": left.to_text()})
    return _finish(path, payload, started)


def cmd_vn(config: RunConfig, out_dir: Path, started: float) -> int:
    lam, _ = schemas.parse_model(config["model"])
    T = schemas.parse_tuple(lam, config["tuple"])
    f = schemas.parse_polynomial(lam, config["polynomial"])
    lhs, rhs, ok = vn_check(T, f, config.get("D_prime"),
                            config.get("tolerance", 1e-9))
    records = [Record("vn_inequality", ok, residual=max(0.0, lhs - rhs),
                      details={"lhs": lhs, "rhs": rhs})]
    path, payload = write_report(out_dir, "vn", config, records,
                                 extra={"lhs": lhs, "rhs": rhs})
    return _finish(path, payload, started)


def cmd_berezin(config: RunConfig, out_dir: Path, started: float) -> int:
    lam, _ = schemas.parse_model(config["model"])
    T = schemas.parse_tuple(lam, config["tuple"])
    tol = config.get("tolerance", 1e-10)
    membership = check_membership(T, tol)
    if not membership.is_member:
        raise KernelError("tuple is not a polyball member")

    records, extra, matrices = [], {}, None
    if membership.is_pure:
        kern = berezin_kernel(T, tol, report=membership)
        records += [
            Record("kernel_isometry", kern.isometry_residual <= tol,
                   residual=kern.isometry_residual),
            Record("kernel_intertwining", kern.intertwining_residual <= tol,
                   residual=kern.intertwining_residual),
        ]
        extra = {"defect_dim": kern.defect_dim,
                 "nilpotency_degree": kern.nilpotency_degree,
                 "tail_bound": kern.tail_bound}
        matrices = {"kernel": kern.K}
    else:
        records.append(Record("kernel_isometry", None,
                              reason="non-pure member: no finite kernel"))
    if "polynomial" in config:
        f = schemas.parse_polynomial(lam, config["polynomial"])
        result = berezin_transform(T, f, tol=tol)
        if result.direct_residual is not None:
            records.append(Record("transform_matches_direct",
                                  result.direct_residual <= 10 * tol,
                                  residual=result.direct_residual))
        else:
            records.append(Record(
                "transform_matches_direct", None,
                reason="non-pure member: limit reported through the r-trend",
            ))
            extra["cauchy_increments"] = result.cauchy_increments
    path, payload = write_report(out_dir, "berezin", config, records, extra=extra,
                                 matrices=matrices)
    return _finish(path, payload, started)


def cmd_dilate(config: RunConfig, out_dir: Path, started: float) -> int:
    lam, _ = schemas.parse_model(config["model"])
    T = schemas.parse_tuple(lam, config["tuple"])
    tol = config.get("tolerance", 1e-10)
    report = check_membership(T, tol)
    if not report.is_member:
        raise KernelError("tuple is not a polyball member")
    if report.is_pure:
        rec = minimal_dilation(T, tol)
        records = [
            Record("dilation_compression", rec.compression_residual <= tol,
                   residual=rec.compression_residual),
            Record("dilation_span", rec.span_rank == rec.span_rank_expected,
                   residual=float(rec.span_rank_expected - rec.span_rank)),
        ]
        matrices = {"embedding": rec.embedding}
        for (i, s), V in rec.isometry_ops():
            matrices[f"V_{i}_{s}"] = V
        path, payload = write_report(out_dir, "dilate", config, records,
                                     extra=rec.to_json(), matrices=matrices)
        return _finish(path, payload, started)
    if all(x == 1 for x in T.n):
        mom = moment_check(T, config.get("moment_range", 3), tol)
        records = [Record("dilation_moments", mom.max_residual <= 1e-9,
                          residual=mom.max_residual)]
        path, payload = write_report(out_dir, "dilate", config, records,
                                     extra=mom.to_json())
        return _finish(path, payload, started)
    raise KernelError(
        "tuple is neither pure nor of arity one per block; no finite dilation route"
    )


def cmd_wold(config: RunConfig, out_dir: Path, started: float) -> int:
    lam, D = schemas.parse_model(config["model"])
    spec = TupleSpec.from_json(config["spec"])
    tol = config.get("tolerance", 1e-10)
    asm = assemble(lam, spec, D)
    proj = wold_projections(asm, tol)
    data = wandering_data(asm, tol, projections=proj)
    records = [
        Record("projections_idempotent", proj.idempotency <= tol,
               residual=proj.idempotency),
        Record("projections_orthogonal", proj.orthogonality <= tol,
               residual=proj.orthogonality),
        Record("projections_complete", proj.completeness <= tol,
               residual=proj.completeness),
        Record("projections_commute", proj.commutation <= tol,
               residual=proj.commutation),
        Record("wandering_kernel", data.kernel_residual <= tol,
               residual=data.kernel_residual),
    ]
    path, payload = write_report(out_dir, "wold", config, records,
                                 extra=data.to_json())
    return _finish(path, payload, started)


def cmd_beurling(config: RunConfig, out_dir: Path, started: float) -> int:
    lam, D = schemas.parse_model(config["model"])
    model = TruncatedModel(lam, D)
    aux = config.get("aux_dim", 1)
    tol = config.get("tolerance", 1e-8)
    mode = config["mode"]
    records, extra, matrices = [], {}, None

    if mode in ("span", "conditions", "compress"):
        if "vectors" not in config:
            raise SubspaceError(f"mode {mode!r} needs subspace vectors")
        vectors = np.array(
            [[schemas.parse_entry(e) for e in vec] for vec in config["vectors"]],
            dtype=complex,
        ).T
        M = SubspaceHandle.from_vectors(model, aux, vectors)
        extra["conditioning"] = M.conditioning
        if mode == "span":
            _L, verdict = coinvariant_span(M, tol)
            records.append(Record("coinvariant_span", verdict.holds,
                                  residual=float(verdict.expected_rank - verdict.span_rank),
                                  details={"vacuum_dim": verdict.vacuum_dim}))
        elif mode == "conditions":
            rep = beurling_conditions(M, config.get("buffer", 2), tol)
            records.append(Record("defect_positive", rep.min_defect_eig >= -tol,
                                  residual=rep.min_defect_eig))
            if rep.doubly_residual is None:
                records.append(Record("restricted_doubly", None,
                                      reason="no interior members below the buffer"))
            else:
                records.append(Record("restricted_doubly",
                                      rep.doubly_residual <= 10 * tol,
                                      residual=rep.doubly_residual))
        else:
            rep = compression_model(M, config.get("tolerance", 1e-10))
            records.append(Record("compression_member", rep.membership.is_member))
            records.append(Record("compression_pure", rep.membership.is_pure))
            records.append(Record("defect_rank_matches", rep.rank_matches,
                                  residual=float(rep.defect_rank - rep.vacuum_dim)))
    elif mode == "factorize":
        if "operator" not in config:
            raise SubspaceError("mode 'factorize' needs an operator")
        Y = schemas.parse_matrix(config["operator"])
        result = beurling_factorize(model, aux, Y, tol)
        records.append(Record("factorization", result.factor_residual <= tol,
                              residual=result.factor_residual))
        records.append(Record("multianalytic", result.multianalytic_residual <= tol,
                              residual=result.multianalytic_residual))
        extra.update(result.to_json())
        matrices = {"factor": result.A}

    path, payload = write_report(out_dir, "beurling", config, records,
                                 extra=extra, matrices=matrices)
    return _finish(path, payload, started)


def cmd_suite(config: RunConfig, out_dir: Path, started: float) -> int:
    seed = config["seed"]
    sizes = config.get("sizes", {})
    records = suites.run_all(seed, sizes)
    path, payload = write_report(out_dir, "suite", config, records,
                                 extra={"seed": seed})
    width = max(len(r.name) for r in records)
    print(f"{'check'.ljust(width)}  status   residual")
    for r in records:
        res = f"{r.residual:.3e}" if r.residual is not None else "-"
        print(f"{r.name.ljust(width)}  {r.status:<7}  {res}")
    return _finish(path, payload, started)


COMMANDS = {
    "check": cmd_check,
    "rewrite": cmd_rewrite,
    "vn": cmd_vn,
    "berezin": cmd_berezin,
    "dilate": cmd_dilate,
    "wold": cmd_wold,
    "beurling": cmd_beurling,
    "suite": cmd_suite,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="polyball-lab",
        description="twisted multi-shift models and their verification suites",
    )
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=False, help="path to the JSON run config")
        p.add_argument("--out", default="out", help="report directory")
        p.add_argument("--emit-schema", action="store_true",
                       help="print the JSON schema for this command and exit")
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    if args.emit_schema:
        print(json.dumps(CONFIG_SCHEMAS[args.command], indent=2, sort_keys=True))
        return EXIT_OK

    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return EXIT_USAGE

    try:
        config = RunConfig.load(args.command, args.config)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigValidationError as exc:
        for _, message in exc.pointers:
            print(f"error: {message}", file=sys.stderr)
        return EXIT_USAGE

    started = time.perf_counter()
    try:
        return COMMANDS[args.command](config, Path(args.out), started)
    except TwistError as exc:
        idx = getattr(exc, "entry_index", None)
        where = f"/model/lambda/{idx}" if idx is not None else "/model/lambda"
        print(f"error: {where}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, AlgebraError, TupleError, SpecError, SubspaceError,
            KernelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
