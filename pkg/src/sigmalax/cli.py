"""Command-line front end.

Exit status: 0 when the model is integrable (or the command succeeded),
1 when it is not integrable or not flat, 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import catalog, exact, lax, scanner, serialize
from .errors import SigmaLaxError, UnresolvedKernelComponent, ValidationError
from .flatness import DEFAULT_SEED, flatness_numeric, flatness_series
from .integrability import NOT_INTEGRABLE, IntegrabilityReport, check, derive_constraints, eom_descriptor

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    model: str | None = None
    builtin: str | None = None
    out: str | None = None
    format: str = "json"
    order: int = 8
    seed: int = DEFAULT_SEED
    tolerance: float = 1e-10
    samples: int = 100

    def validate(self) -> None:
        if self.command in ("check", "lax", "flatness") and (self.model is None) == (self.builtin is None):
            raise ValidationError("give exactly one of --model or --builtin")
        if self.tolerance <= 0:
            raise ValidationError("--tolerance must be positive")
        if self.order < 2:
            raise ValidationError("--order must be at least 2")
        if self.samples < 1:
            raise ValidationError("--samples must be positive")


def _load(cfg: RunConfig) -> serialize.LoadedModel:
    if cfg.builtin is not None:
        spec = catalog.builtin(cfg.builtin)
        expected = {"verdict": spec.expected_verdict} if spec.expected_verdict else {}
        return serialize.LoadedModel(spec.algebra, spec.pair, spec.projectors, expected, spec.name)
    return serialize.load(cfg.model)


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _table_lines(title: str, table) -> list[str]:
    lines = [f"{title} (rows j = J- grade, columns k = J+ grade)"]
    width = max(len(exact.fstr(x)) for row in table for x in row)
    for row in table:
        lines.append("  " + " ".join(exact.fstr(x).rjust(width) for x in row))
    return lines


def _check_pretty(model: serialize.LoadedModel, report: IntegrabilityReport) -> str:
    lines = [f"model: {model.name or '(file)'}", f"verdict: {report.verdict} [{report.mode}]"]
    if report.mode == "graded":
        for b in ("+", "-"):
            lines += _table_lines(f"factor {b}", report.factor_tables[b])
        lines += _table_lines("product", report.product_table)
        for b in ("+", "-"):
            lines += _table_lines(f"residual {b}", report.residual_table[b])
        if report.chosen_pi:
            lines.append("projector scalars: " + ", ".join(
                f"pi({k}) = {exact.fstr(v)}" for k, v in sorted(report.chosen_pi.items())))
    else:
        for b, rows in report.residual_table.items():
            lines.append(f"residual {b}: {len(rows)} nonzero basis pairs")
    if report.constraint_positions:
        lines.append("constraint positions: " + ", ".join(str(tuple(p)) for p in report.constraint_positions))
    if report.failing_branches:
        lines.append("failing: " + ", ".join(report.failing_branches))
    if report.verdict != NOT_INTEGRABLE and model.projectors:
        for c in derive_constraints(model.algebra, model.pair, model.projectors):
            if c.active:
                lines.append("constraint " + c.describe())
    lines.append("equations of motion:")
    lines += ["  " + e for e in eom_descriptor(model.algebra, model.pair).render()]
    lines += [f"note: {n}" for n in report.notes]
    return "\n".join(lines) + "\n"


def _check_csv(report: IntegrabilityReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.mode == "graded":
        w.writerow(["j", "k", "factor_plus", "factor_minus", "product", "residual_plus", "residual_minus"])
        for j, row in enumerate(report.product_table):
            for k, prod in enumerate(row):
                w.writerow([
                    j, k,
                    exact.fstr(report.factor_tables["+"][j][k]),
                    exact.fstr(report.factor_tables["-"][j][k]),
                    exact.fstr(prod),
                    exact.fstr(report.residual_table["+"][j][k]),
                    exact.fstr(report.residual_table["-"][j][k]),
                ])
    else:
        w.writerow(["branch", "a", "b", "component", "value"])
        for b, rows in report.residual_table.items():
            for (x, y), v in rows:
                for c, val in enumerate(v):
                    if val != 0:
                        w.writerow([b, x, y, c, exact.fstr(val)])
    return buf.getvalue()


def cmd_check(cfg: RunConfig) -> int:
    model = _load(cfg)
    report = check(model.pair)
    if cfg.format == "pretty":
        text = _check_pretty(model, report)
    elif cfg.format == "csv":
        text = _check_csv(report)
    else:
        data = {"model": model.name, **report.to_json()}
        if model.expected.get("verdict"):
            data["expected_verdict"] = model.expected["verdict"]
        text = serialize.dumps(data)
    _emit(text, cfg)
    return EXIT_FAIL if report.verdict == NOT_INTEGRABLE else EXIT_OK


def cmd_lax(cfg: RunConfig) -> int:
    model = _load(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        conn = lax.build_lax(model.pair)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if cfg.format == "pretty":
        text = "A(l) = " + "\n     + ".join(lax.pretty(conn)) + "\n"
    elif cfg.format == "csv":
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["power", "chirality", "row", "col", "value"])
        for p, m, ch in lax.laurent_coefficients(conn) if conn.exact else []:
            for (i, j), v in _nonzero(m):
                wr.writerow([p, ch, i, j, exact.fstr(v)])
        text = buf.getvalue()
    else:
        text = serialize.dumps({"model": model.name, **lax.to_json(conn)})
    _emit(text, cfg)
    return EXIT_OK


def _nonzero(m):
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            if m[i, j] != 0:
                yield (i, j), m[i, j]


def cmd_flatness(cfg: RunConfig) -> int:
    model = _load(cfg)
    try:
        report = flatness_series(model.pair, model.projectors, cfg.order)
        numeric = flatness_numeric(model.pair, model.projectors, trials=cfg.samples, seed=cfg.seed)
    except UnresolvedKernelComponent as exc:
        _emit(serialize.dumps({"model": model.name, "flat": False, "error": str(exc)}), cfg)
        return EXIT_FAIL
    report.max_float_residual = numeric
    report.seed = cfg.seed
    ok = report.flat and numeric < cfg.tolerance
    if cfg.format == "pretty":
        lines = [
            f"model: {model.name or '(file)'}",
            f"orders 0..{report.orders_checked}: {'flat' if report.flat else 'not flat'}"
            + (" modulo constraints" if report.modulo_constraints else ""),
        ]
        if not report.flat:
            lines.append(f"first nonzero order: {report.first_nonzero_order}")
        lines.append(f"sampled residual: {numeric:.3e} (tolerance {cfg.tolerance:g}, seed {cfg.seed})")
        text = "\n".join(lines) + "\n"
    elif cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["order", "nonzero_pairs"])
        for n, rows in sorted(report.residuals.items()):
            w.writerow([n, len(rows)])
        text = buf.getvalue()
    else:
        text = serialize.dumps({"model": model.name, **report.to_json(), "tolerance": cfg.tolerance})
    _emit(text, cfg)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_scan(cfg: RunConfig, family: str, rng: str, step: str) -> int:
    try:
        lo, hi = (exact.frac(x) for x in rng.split(":"))
        step_v = exact.frac(step)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad --range/--step: {exc}") from exc
    try:
        result = scanner.scan(family, lo, hi, step_v)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    if cfg.format == "csv":
        text = result.to_csv()
    elif cfg.format == "pretty":
        lines = [f"family: {result.family}, {len(result.grid)} points"]
        for desc, eqs in result.classified_loci:
            lines.append(f"  {desc}: " + "; ".join(eqs))
        lines += [f"note: {n}" for n in result.notes]
        text = "\n".join(lines) + "\n"
    else:
        text = serialize.dumps(result.to_json())
    _emit(text, cfg)
    return EXIT_OK


def cmd_catalog(cfg: RunConfig, action: str, name: str | None) -> int:
    if action == "list":
        rows = []
        for n in catalog.names():
            _, argnames = catalog.REGISTRY[n]
            rows.append(f"{n}({', '.join(argnames)})" if argnames else n)
        _emit("\n".join(rows) + "\n", cfg)
        return EXIT_OK
    if not name:
        raise ValidationError("catalog show needs a model name")
    spec = catalog.builtin(name)
    _emit(serialize.dumps(serialize.model_to_dict(spec)), cfg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--model", metavar="PATH", help="model JSON file")
    src.add_argument("--builtin", metavar="NAME", help="catalog model, e.g. zn_coset(5)")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "pretty"), default="json")
    common.add_argument("--order", type=int, default=8, help="series order K (>= 2)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--tolerance", type=float, default=1e-10)
    common.add_argument("--samples", type=int, default=100, help="random trials for sampled checks")

    parser = argparse.ArgumentParser(prog="sigmalax", description="Integrability checks for sigma-model operator pairs.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="run the integrability condition")
    sub.add_parser("lax", parents=[common], help="build the Lax connection")
    sub.add_parser("flatness", parents=[common], help="series and sampled flatness")
    scan = sub.add_parser("scan", parents=[common], help="scan a parameter family")
    scan.add_argument("--family", default="general_z2", choices=sorted(scanner.FAMILIES))
    scan.add_argument("--range", dest="range_", default="-3:3", metavar="LO:HI")
    scan.add_argument("--step", default="1")
    cat = sub.add_parser("catalog", parents=[common], help="list or export built-in models")
    cat.add_argument("action", choices=("list", "show"))
    cat.add_argument("name", nargs="?")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(
        command=args.command, model=args.model, builtin=args.builtin, out=args.out,
        format=args.format, order=args.order, seed=args.seed,
        tolerance=args.tolerance, samples=args.samples,
    )
    try:
        cfg.validate()
        if cfg.command == "check":
            return cmd_check(cfg)
        if cfg.command == "lax":
            return cmd_lax(cfg)
        if cfg.command == "flatness":
            return cmd_flatness(cfg)
        if cfg.command == "scan":
            return cmd_scan(cfg, args.family, args.range_, args.step)
        return cmd_catalog(cfg, args.action, args.name)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SigmaLaxError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
