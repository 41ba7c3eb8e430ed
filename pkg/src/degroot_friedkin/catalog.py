"""The matrix catalogs and scenario files shipped with the package.

``C1``-``C3`` are general n=8 interaction matrices, ``C4``-``C5`` are n=8
doubly stochastic ones, and ``S1``-``S3`` form a small n=4 catalog (``S3``
doubly stochastic). All of them come from :func:`random_interaction_matrix`
with the seeds below, so the JSON files can be regenerated bit for bit with
``python -m degroot_friedkin.catalog``.
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from .matrixcore import InteractionMatrix, load_matrix, random_interaction_matrix, save_matrix

# id -> (n, density, seed, doubly_stochastic)
RECIPES = {
    "C1": (8, 0.4, 11, False),
    "C2": (8, 0.4, 12, False),
    "C3": (8, 0.4, 13, False),
    "C4": (8, 0.4, 14, True),
    "C5": (8, 0.4, 15, True),
    "S1": (4, 0.6, 21, False),
    "S2": (4, 0.6, 22, False),
    "S3": (4, 0.6, 23, True),
}


def generate(id: str) -> InteractionMatrix:
    n, density, seed, ds = RECIPES[id]
    return random_interaction_matrix(n, density, seed, ds, id=id)


def data_dir() -> Path:
    return Path(str(resources.files("degroot_friedkin") / "data"))


def scenario_path(name: str) -> Path:
    """Path of a shipped scenario config, e.g. ``scenario_path("figure1")``."""
    return data_dir() / "scenarios" / f"{name}.json"


def load(id: str) -> InteractionMatrix:
    return load_matrix(data_dir() / "catalog" / f"{id}.json")


def shipped_catalog(ids=None) -> dict[str, InteractionMatrix]:
    ids = RECIPES if ids is None else ids
    return {i: load(i) for i in ids}


def write_catalog(directory=None) -> None:
    directory = Path(directory) if directory is not None else data_dir() / "catalog"
    directory.mkdir(parents=True, exist_ok=True)
    for id in RECIPES:
        save_matrix(generate(id), directory / f"{id}.json")


if __name__ == "__main__":
    write_catalog()
