"""Model files: algebra, operator pair, constraint projectors and optional expectations.

Schema::

    {
      "algebra": {"preset": "sl", "n": 3, "grading": "cyclic", "N": 3} | {"dim": .., "f": [[a, b, c, "p/q"], ..], ..},
      "sigma": {"plus": [..per grade..], "minus": [..], "alpha": "0"}
             | {"plus_matrix": [[..]], "minus_matrix": [[..]], "alpha": "0"}
             | {"action": {"sym": [..] | [[..]], "antisym": [..] | [[..]], "alpha": "0"}},
      "projectors": [{"label": "..", "grade": 1, "pi": [[..]]}, ..],
      "expected": {"verdict": "..", "lax": {..}}
    }

All rationals are integers or ``"p/q"`` strings. Floats are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import exact, lax
from .algebra import GradedLieAlgebra, algebra_to_json, build_algebra
from .catalog import ModelSpec
from .errors import ParseError, ValidationError
from .operators import ChiralOperatorPair, ConstraintProjector, from_action, validate_projectors


@dataclass
class LoadedModel:
    algebra: GradedLieAlgebra
    pair: ChiralOperatorPair
    projectors: list[ConstraintProjector] | None
    expected: dict = field(default_factory=dict)
    name: str = ""


def _reject_floats(obj, path: str = "") -> None:
    if isinstance(obj, float):
        raise ParseError("floating-point numbers are not allowed; use integers or 'p/q' strings", path or "$")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _reject_floats(v, f"{path}.{k}" if path else k)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _reject_floats(v, f"{path}[{i}]")


def _rationals(data, where: str):
    try:
        if data and isinstance(data[0], list):
            return exact.matrix(data)
        return [exact.frac(x) for x in data]
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(str(exc), where) from exc


def _operator(data, where: str):
    if not isinstance(data, list):
        raise ParseError("expected a list of grade eigenvalues or a matrix", where)
    return _rationals(data, where)


def parse_pair(alg: GradedLieAlgebra, sigma: dict) -> ChiralOperatorPair:
    if not isinstance(sigma, dict):
        raise ParseError("sigma must be an object", "sigma")
    try:
        alpha = exact.frac(sigma.get("alpha", 0))
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), "sigma.alpha") from exc
    if "action" in sigma:
        act = sigma["action"]
        return from_action(
            alg,
            _operator(act.get("sym", [0] * alg.grading_order), "sigma.action.sym"),
            _operator(act.get("antisym", [0] * alg.grading_order), "sigma.action.antisym"),
            exact.frac(act.get("alpha", 0)),
        )
    if "plus" in sigma and "minus" in sigma:
        return ChiralOperatorPair.from_matrices(
            alg, _operator(sigma["plus"], "sigma.plus"), _operator(sigma["minus"], "sigma.minus"), alpha
        )
    if "plus_matrix" in sigma and "minus_matrix" in sigma:
        return ChiralOperatorPair.from_matrices(
            alg,
            _operator(sigma["plus_matrix"], "sigma.plus_matrix"),
            _operator(sigma["minus_matrix"], "sigma.minus_matrix"),
            alpha,
        )
    raise ParseError("need plus/minus, plus_matrix/minus_matrix or action", "sigma")


def model_from_dict(data: dict) -> LoadedModel:
    if not isinstance(data, dict):
        raise ParseError("model file must hold a JSON object")
    _reject_floats(data)
    for key in ("algebra", "sigma"):
        if key not in data:
            raise ParseError("missing required section", key)
    alg = build_algebra(data["algebra"])
    pair = parse_pair(alg, data["sigma"])
    projectors = None
    if "projectors" in data:
        projectors = []
        for i, p in enumerate(data["projectors"]):
            where = f"projectors[{i}]"
            if "pi" not in p:
                raise ParseError("projector needs 'pi'", where)
            pi = _rationals(p["pi"], f"{where}.pi")
            if not hasattr(pi, "shape") or pi.shape[1] != alg.dim:
                raise ParseError("pi must be a matrix with dim columns", f"{where}.pi")
            projectors.append(ConstraintProjector(pi, p.get("label", ""), p.get("grade")))
        validate_projectors(pair, projectors)
    return LoadedModel(alg, pair, projectors, dict(data.get("expected", {})), data.get("name", ""))


def loads(text: str) -> LoadedModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from exc
    return model_from_dict(data)


def load(path: str | Path) -> LoadedModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read model file {path}: {exc.strerror}") from exc
    return loads(text)


def pair_to_json(pair: ChiralOperatorPair) -> dict:
    if pair.grading_diagonal:
        out = {
            "plus": [exact.fstr(x) for x in pair.eigen_plus],
            "minus": [exact.fstr(x) for x in pair.eigen_minus],
        }
    else:
        out = {
            "plus_matrix": exact.to_strings(pair.sigma_plus),
            "minus_matrix": exact.to_strings(pair.sigma_minus),
        }
    out["alpha"] = exact.fstr(pair.alpha)
    return out


def model_to_dict(spec: ModelSpec) -> dict:
    out = {
        "name": spec.name,
        "params": [exact.fstr(x) for x in spec.params],
        "algebra": algebra_to_json(spec.algebra),
        "sigma": pair_to_json(spec.pair),
        "projectors": [
            {"label": p.label, "grade": p.grade, "pi": exact.to_strings(p.pi)} for p in spec.projectors
        ],
        "notes": spec.notes,
    }
    expected: dict = {}
    if spec.expected_verdict:
        expected["verdict"] = spec.expected_verdict
    if spec.expected_lax is not None:
        expected["lax"] = lax.to_json(spec.expected_lax)
    if expected:
        out["expected"] = expected
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"
