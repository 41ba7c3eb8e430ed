"""Scenario configuration files.

A scenario is a JSON object::

    {
      "catalog": ["../catalog/C1.json", "../catalog/C2.json"],
      "schedule": {"kind": "periodic", "ids": ["C1", "C2"]},
      "initial": {"kind": "random-interior", "seed": 1},
      "num_issues": 200,
      "tolerances": {"orbit": 1e-9},
      "outputs": "out/figure1"
    }

Catalog paths are relative to the config file; ``outputs`` is relative to
the working directory. Unknown keys anywhere are rejected.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .analysis import DEFAULT_TOLERANCES
from .errors import ConfigError, ScheduleError
from .matrixcore import SUM_TOL, InteractionMatrix, load_matrix, vertex_index
from .switching import Schedule

_NUMBER = {"type": "number"}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["catalog", "schedule", "initial", "num_issues"],
    "properties": {
        "catalog": {"type": "array", "minItems": 1, "items": {"type": "string"}},
        "schedule": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["constant", "periodic", "arbitrary"]},
                "ids": {"type": "array", "minItems": 1, "items": {"type": "string"}},
                "sequence": {"type": "array", "minItems": 1, "items": {"type": "string"}},
                "seed": {"type": "integer"},
                "democratic": {"type": "boolean"},
            },
        },
        "initial": {
            "oneOf": [
                {"type": "array", "minItems": 1, "items": _NUMBER},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {
                        "kind": {"const": "random-interior"},
                        "seed": {"type": "integer"},
                    },
                },
            ]
        },
        "num_issues": {"type": "integer", "minimum": 1},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: _NUMBER for k in DEFAULT_TOLERANCES},
        },
        "outputs": {"type": "string"},
        "samples": {"type": "integer", "minimum": 1},
        "check_seed": {"type": "integer"},
    },
}


@dataclass
class ScenarioConfig:
    catalog: dict[str, InteractionMatrix]
    schedule: Schedule
    x1: np.ndarray
    num_issues: int
    tolerances: dict[str, float]
    outputs: Path
    samples: int = 2000
    check_seed: int = 0
    initial_seed: int | None = None
    source: Path | None = None
    raw: dict = field(default_factory=dict)


def random_interior(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).dirichlet(np.ones(n))


def load_config(path, seed: int | None = None, num_issues: int | None = None,
                outputs=None) -> ScenarioConfig:
    """Parse and resolve a scenario file; overrides mirror the CLI flags.

    ``seed`` replaces the seed of a random-interior initial condition.

    Raises
    ------
    ConfigError
        Schema violations, unresolvable ids, unusable initial states, or a
        democratic schedule over matrices that are not doubly stochastic.
    MatrixFormatError
        A catalog file cannot be parsed or is not a valid interaction matrix.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {where}: {exc.message}") from exc

    catalog = {}
    for entry in doc["catalog"]:
        C = load_matrix(path.parent / entry)
        if C.id in catalog:
            raise ConfigError(f"{path}: duplicate matrix id {C.id!r}")
        catalog[C.id] = C

    spec = doc["schedule"]
    kind = spec["kind"]
    try:
        if kind == "constant":
            ids = spec.get("ids", [])
            if len(ids) != 1 or "sequence" in spec:
                raise ConfigError(f"{path}: constant schedule takes 'ids' with exactly one entry")
            schedule = Schedule.constant(catalog, ids[0])
        elif kind == "periodic":
            if "ids" not in spec or "sequence" in spec:
                raise ConfigError(f"{path}: periodic schedule takes 'ids' (the cycle)")
            schedule = Schedule.periodic(catalog, spec["ids"])
        else:
            schedule = Schedule.arbitrary(catalog, ids=spec.get("ids"), sequence=spec.get("sequence"),
                                          seed=spec.get("seed", 0), democratic=spec.get("democratic", False))
    except ScheduleError as exc:
        raise ConfigError(f"{path}: schedule: {exc}") from exc
    if kind != "arbitrary" and ("seed" in spec or "democratic" in spec):
        raise ConfigError(f"{path}: 'seed' and 'democratic' apply to arbitrary schedules only")
    for mid in sorted(schedule.maps):
        if not catalog[mid].report.satisfies_assumption_1:
            raise ConfigError(f"{path}: matrix {mid!r} is reducible, a star, or has n < 3")

    init = doc["initial"]
    initial_seed = None
    if isinstance(init, list):
        x1 = np.array(init, dtype=float)
    else:
        initial_seed = init.get("seed", 0) if seed is None else seed
        x1 = random_interior(schedule.n, initial_seed)
    if x1.shape != (schedule.n,) or x1.min() < 0 or abs(x1.sum() - 1.0) > SUM_TOL:
        raise ConfigError(f"{path}: initial state must be a simplex point of length {schedule.n}")
    if vertex_index(x1) is not None:
        raise ConfigError(f"{path}: initial state is a vertex (autocratic configuration)")

    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(doc.get("tolerances", {}))
    out = Path(outputs if outputs is not None else doc.get("outputs", "out"))
    return ScenarioConfig(
        catalog=catalog,
        schedule=schedule,
        x1=x1,
        num_issues=num_issues if num_issues is not None else doc["num_issues"],
        tolerances=tolerances,
        outputs=out,
        samples=doc.get("samples", 2000),
        check_seed=doc.get("check_seed", 0),
        initial_seed=initial_seed,
        source=path,
        raw=doc,
    )
