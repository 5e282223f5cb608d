"""Reading and writing scenario files (JSON, ``"version": 1``).

A file holds ``prior``, ``signals``, ``joint1``, ``joint0`` (row = group 1's
signal), ``population``, ``threshold`` and ``cost``.  An optional ``eti`` list
of ``{"pair": [a, b], "mass": m, "state": 1}`` entries is applied in order, with
pairs given as signal labels.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .errors import CactError, ParseError, ValidationError
from .population import PopulationModel, ThresholdModel
from .scenario import Scenario
from .signal_info import ORDER_TOL, SimilarityTransform, apply_eti, build_info_structure

VERSION = 1
REQUIRED = ("prior", "joint1", "joint0", "population", "threshold", "cost")


def _read(source) -> dict:
    if isinstance(source, dict):
        return source
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {source}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: malformed JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top level must be an object")
    return data


def _population(entry: dict) -> PopulationModel:
    kind = entry.get("type")
    if kind == "poisson":
        return PopulationModel.poisson(float(entry["mean"]))
    if kind == "deterministic":
        return PopulationModel.deterministic(int(entry["size"]))
    if kind == "explicit":
        return PopulationModel.explicit(entry["outside"], entry["own"])
    raise ParseError(f"unknown population type {kind!r}")


def _threshold(entry: dict) -> ThresholdModel:
    kind = entry.get("type")
    if kind == "det":
        return ThresholdModel.deterministic(int(entry["value"]))
    if kind == "explicit":
        return ThresholdModel.explicit(entry["pmf"])
    raise ParseError(f"unknown threshold type {kind!r}")


def load_scenario(source, *, exact: bool = False, tol: float = ORDER_TOL) -> Scenario:
    """Build a validated :class:`Scenario` from a path or an already-parsed dict.

    Structural problems (bad JSON, missing or mistyped fields) raise
    :class:`ParseError`; violated model invariants are collected and raised
    together as :class:`ValidationError`.
    """
    data = _read(source)
    version = data.get("version", VERSION)
    if version != VERSION:
        raise ParseError(f"unsupported scenario version {version!r}")
    missing = [k for k in REQUIRED if k not in data]
    if missing:
        raise ParseError(f"missing field(s): {', '.join(missing)}")
    try:
        cost = float(data["cost"])
        prior = data["prior"]
        joint0, joint1 = data["joint0"], data["joint1"]
        population = _population(data["population"])
        threshold = _threshold(data["threshold"])
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CactError):
            raise ValidationError([f"{type(exc).__name__}: {exc}"]) from exc
        raise ParseError(f"malformed field: {exc}") from exc

    problems = []
    info = None
    try:
        info = build_info_structure(prior, joint0, joint1, data.get("signals"), exact=exact)
    except CactError as exc:
        problems.append(f"{type(exc).__name__}: {exc}")
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed signal structure: {exc}") from exc
    if cost < 0:
        problems.append("cost: must be nonnegative")
    if info is not None:
        for step in data.get("eti", []):
            try:
                pair = info.space.indices(step["pair"])
                info = apply_eti(info, SimilarityTransform(pair, step["mass"], step.get("state", 1)))
            except (CactError, KeyError, ValueError) as exc:
                problems.append(f"eti {step}: {type(exc).__name__}: {exc}")
                break
    if problems:
        raise ValidationError(problems)
    return Scenario(info, population, threshold, cost, tol)


def scenario_to_json(scn: Scenario) -> dict:
    info = scn.info
    return {
        "version": VERSION,
        "prior": float(info.prior),
        "signals": list(info.space.labels),
        "joint1": [[float(v) for v in row] for row in info.joint1],
        "joint0": [[float(v) for v in row] for row in info.joint0],
        "population": scn.population.to_json(),
        "threshold": scn.threshold.to_json(),
        "cost": float(scn.cost),
    }


def dump_scenario(scn: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_json(scn), indent=2) + "\n")


def bundled(name: str) -> dict:
    """Raw contents of a scenario shipped with the package (``"three_signal"``, ``"turnout_policymaker"``)."""
    return json.loads(resources.files("cact").joinpath(f"data/{name}.json").read_text())
