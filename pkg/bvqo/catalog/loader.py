from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

from bvqo.catalog.model import Catalog, JoinEdge, PkFk, Relation
from bvqo.errors import CatalogError, WorkloadParseError

LOGGER = logging.getLogger(__name__)

_PKFK_ALIASES = {
    None: PkFk.NONE,
    "none": PkFk.NONE,
    "lefttoright": PkFk.LEFT_TO_RIGHT,
    "left_to_right": PkFk.LEFT_TO_RIGHT,
    "righttoleft": PkFk.RIGHT_TO_LEFT,
    "right_to_left": PkFk.RIGHT_TO_LEFT,
}


def _require(entry: dict, key: str, where: str) -> Any:
    if key not in entry:
        raise WorkloadParseError("missing required key", field=f"{where}.{key}")
    return entry[key]


def _str_list(value: Any, where: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise WorkloadParseError("expected a list of strings", field=where)
    return tuple(value)


def _fraction(entry: dict, key: str, where: str) -> float:
    value = entry.get(key, 1.0)
    if value is None:
        return 1.0
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise WorkloadParseError("expected a number", field=f"{where}.{key}")
    if not 0.0 <= float(value) <= 1.0:
        raise WorkloadParseError(f"selectivity {value} out of range [0, 1]", field=f"{where}.{key}")
    return float(value)


def _parse_pkfk(value: Any, where: str) -> PkFk:
    key = value.strip().lower() if isinstance(value, str) else value
    if key not in _PKFK_ALIASES:
        raise WorkloadParseError(f"unknown pkfk value {value!r}", field=f"{where}.pkfk")
    return _PKFK_ALIASES[key]


def catalog_from_dict(document: Any) -> Catalog:
    if not isinstance(document, dict):
        raise WorkloadParseError("top level must be an object")
    raw_relations = _require(document, "relations", "$")
    if not isinstance(raw_relations, list):
        raise WorkloadParseError("expected a list", field="$.relations")

    relations: list[Relation] = []
    for i, entry in enumerate(raw_relations):
        where = f"relations[{i}]"
        if not isinstance(entry, dict):
            raise WorkloadParseError("expected an object", field=where)
        cardinality = _require(entry, "cardinality", where)
        if isinstance(cardinality, bool) or not isinstance(cardinality, int):
            raise WorkloadParseError("expected an integer", field=f"{where}.cardinality")
        name = _require(entry, "name", where)
        if not isinstance(name, str):
            raise WorkloadParseError("expected a string", field=f"{where}.name")
        try:
            relations.append(
                Relation(
                    name=name,
                    cardinality=cardinality,
                    columns=_str_list(_require(entry, "columns", where), f"{where}.columns"),
                    key_columns=_str_list(entry.get("key_columns", []), f"{where}.key_columns"),
                )
            )
        except WorkloadParseError:
            raise
        except CatalogError as exc:
            raise WorkloadParseError(str(exc), field=where) from exc

    edges: list[JoinEdge] = []
    for i, entry in enumerate(document.get("edges", [])):
        where = f"edges[{i}]"
        if not isinstance(entry, dict):
            raise WorkloadParseError("expected an object", field=where)
        try:
            edges.append(
                JoinEdge(
                    left=_require(entry, "left", where),
                    right=_require(entry, "right", where),
                    left_cols=_str_list(_require(entry, "left_cols", where), f"{where}.left_cols"),
                    right_cols=_str_list(_require(entry, "right_cols", where), f"{where}.right_cols"),
                    pkfk=_parse_pkfk(entry.get("pkfk"), where),
                    sel_lr=_fraction(entry, "sel_lr", where),
                    sel_rl=_fraction(entry, "sel_rl", where),
                )
            )
        except WorkloadParseError:
            raise
        except CatalogError as exc:
            raise WorkloadParseError(str(exc), field=where) from exc

    return Catalog(relations=tuple(relations), edges=tuple(edges))


def load_catalog(document: str) -> Catalog:
    try:
        payload = json.loads(document)
    except json.JSONDecodeError as exc:
        raise WorkloadParseError(exc.msg, line=exc.lineno) from exc
    return catalog_from_dict(payload)


def load_catalog_file(path: Path) -> Catalog:
    LOGGER.info("Loading workload: %s", path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CatalogError(f"Cannot read workload {path}: {exc}") from exc
    return load_catalog(text)


def dump_catalog(catalog: Catalog) -> dict[str, Any]:
    return {
        "relations": [
            {
                "name": r.name,
                "cardinality": r.cardinality,
                "columns": list(r.columns),
                "key_columns": list(r.key_columns),
            }
            for r in catalog.relations
        ],
        "edges": [
            {
                "left": e.left,
                "right": e.right,
                "left_cols": list(e.left_cols),
                "right_cols": list(e.right_cols),
                "pkfk": e.pkfk.value,
                "sel_lr": e.sel_lr,
                "sel_rl": e.sel_rl,
            }
            for e in catalog.edges
        ],
    }
