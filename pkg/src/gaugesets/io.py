"""Scenario, point and region files.

JSON documents carry ``"schema": "gaugesets/v1"`` and are validated
against the schemas shipped in ``gaugesets/schemas``.  JSON has no
infinity literal, so infinite offsets are written as ``"inf"`` and
``"-inf"``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Dict, List, Optional

import jsonschema
import numpy as np

from .errors import FormatError, SchemaError
from .geometry import ConvexBody, HalfSpace, Region
from .scenario import DEFAULT_ATOM, Partition, RandomSetModel, Scenario, bin_labels

log = logging.getLogger(__name__)

SCHEMA_ID = "gaugesets/v1"
FILE_PROB_TOL = 1e-6

_schemas: Dict[str, dict] = {}


def load_schema(name: str) -> dict:
    """``"scenarios"`` or ``"region"``."""
    if name not in _schemas:
        text = resources.files("gaugesets").joinpath("schemas", f"{name}.schema.json").read_text("utf-8")
        _schemas[name] = json.loads(text)
    return _schemas[name]


def _validate(doc, name: str):
    try:
        jsonschema.validate(doc, load_schema(name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{name} file invalid at {where}: {exc.message}") from None


def encode_float(x: float):
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return float(x) + 0.0  # no negative zero in files


def decode_float(x) -> float:
    if x == "inf":
        return math.inf
    if x == "-inf":
        return -math.inf
    return float(x)


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None


# ---------------------------------------------------------------------------
# scenario files


def body_from_json(spec: dict) -> ConvexBody:
    k = spec["kind"]
    try:
        if k == "point":
            return ConvexBody.point(spec["x"])
        if k == "box":
            return ConvexBody.box(spec["lo"], spec["hi"])
        if k == "polytope":
            hrep = None
            if "hrep" in spec:
                hrep = [HalfSpace(h["normal"], decode_float(h["offset"])) for h in spec["hrep"]]
            return ConvexBody(spec["vertices"], spec.get("rays"), hrep=hrep)
        if k == "cone":
            gens = spec["generators"]
            dim = spec.get("dim")
            if not gens and dim is None:
                raise SchemaError("a cone without generators needs 'dim'")
            return ConvexBody.cone(gens, dim=dim)
        if k == "translated_cone":
            return ConvexBody.translated_cone(spec["apex"], spec["generators"])
        if k == "halfspace":
            return ConvexBody.halfspace(spec["normal"], spec["offset"])
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"bad {k} body: {exc}") from None
    raise SchemaError(f"unknown body kind {k!r}")


def body_to_json(body: ConvexBody) -> dict:
    if body.vertices is None:
        raise FormatError("bodies without vertices cannot be written as scenarios")
    if body.is_cone:
        return {"kind": "cone", "generators": body.rays.tolist(), "dim": body.dim}
    if body.vertices.shape[0] == 1 and body.rays.shape[0] == 0:
        return {"kind": "point", "x": body.vertices[0].tolist()}
    out = {"kind": "polytope", "vertices": body.vertices.tolist()}
    if body.rays.shape[0]:
        out["rays"] = body.rays.tolist()
    return out


def model_from_json(doc: dict, atom_key: str = "atom") -> RandomSetModel:
    """Model from a parsed scenario document (validated here)."""
    if atom_key != "atom":
        # the atom field is renamed before validation
        doc = dict(doc)
        scen = []
        for s in doc.get("scenarios", []):
            s = dict(s)
            if atom_key in s:
                s["atom"] = s.pop(atom_key)
            scen.append(s)
        doc["scenarios"] = scen
    _validate(doc, "scenarios")
    items = doc["scenarios"]
    total = math.fsum(s["prob"] for s in items)
    if total <= 0 or abs(total - 1.0) > FILE_PROB_TOL:
        raise SchemaError(f"scenario probabilities sum to {total!r}, not 1")
    if total != 1.0:
        log.info("renormalising scenario probabilities (sum %r)", total)
    bodies = [body_from_json(s["body"]) for s in items]
    dims = {b.dim for b in bodies}
    if len(dims) != 1:
        raise SchemaError(f"scenario bodies live in different dimensions {sorted(dims)}")
    scen = [Scenario(s["prob"] / total, b, str(s.get("atom", DEFAULT_ATOM)))
            for s, b in zip(items, bodies)]
    return RandomSetModel(scen)


def load_scenarios(path, atom_key: str = "atom") -> RandomSetModel:
    return model_from_json(_read_json(path), atom_key)


def save_scenarios(model: RandomSetModel, path):
    doc = {"schema": SCHEMA_ID, "scenarios": [
        {"prob": float(s.prob), "atom": s.atom, "body": body_to_json(s.body)}
        for s in model.scenarios]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# point tables


@dataclass
class PointTable:
    columns: List[str]
    data: np.ndarray
    weights: Optional[np.ndarray] = None
    atoms: Optional[List[str]] = None


def read_points_csv(path, atom_column: Optional[str] = None, weight_column: str = "weight",
                    bin_column: Optional[str] = None, bins: int = 10) -> PointTable:
    """Numeric point columns plus optional weight and atom columns.

    ``bin_column`` names a numeric covariate that is turned into
    equal-frequency atoms (and dropped from the coordinates).
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except UnicodeDecodeError:
        raise FormatError(f"{path}: not UTF-8 text") from None
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    if not body:
        raise FormatError(f"{path}: no data rows")
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise FormatError(f"{path}: line {i} has {len(r)} fields, header has {len(header)}")
    for name in (atom_column, bin_column):
        if name is not None and name not in header:
            raise FormatError(f"{path}: no column named {name!r}")
    special = {atom_column, bin_column, weight_column if weight_column in header else None}
    coord = [j for j, h in enumerate(header) if h not in special]
    if not coord:
        raise FormatError(f"{path}: no coordinate columns")

    def num(j, r, line):
        try:
            return float(r[j])
        except ValueError:
            raise FormatError(f"{path}: line {line}, column {header[j]!r}: "
                              f"not a number: {r[j]!r}") from None

    data = np.array([[num(j, r, i) for j in coord] for i, r in enumerate(body, start=2)])
    if not np.isfinite(data).all():
        raise FormatError(f"{path}: coordinates must be finite")
    weights = None
    if weight_column in header:
        j = header.index(weight_column)
        weights = np.array([num(j, r, i) for i, r in enumerate(body, start=2)])
    atoms = None
    if atom_column is not None:
        j = header.index(atom_column)
        atoms = [r[j].strip() for r in body]
    if bin_column is not None:
        j = header.index(bin_column)
        cov = [num(j, r, i) for i, r in enumerate(body, start=2)]
        labels = bin_labels(cov, bins)
        atoms = labels if atoms is None else [f"{a}/{b}" for a, b in zip(atoms, labels)]
    return PointTable([header[j] for j in coord], data, weights, atoms)


def model_from_table(table: PointTable):
    from .scenario import from_point_samples

    return from_point_samples(table.data.tolist(), table.weights, table.atoms)


# ---------------------------------------------------------------------------
# region files


@dataclass
class AtomRegion:
    label: str
    empty: bool
    constraints: List[HalfSpace]
    vertices: Optional[np.ndarray] = None
    rays: Optional[np.ndarray] = None

    def __eq__(self, other):
        if not isinstance(other, AtomRegion):
            return NotImplemented
        if (self.label, self.empty) != (other.label, other.empty):
            return False
        if len(self.constraints) != len(other.constraints):
            return False
        for a, b in zip(self.constraints, other.constraints):
            if not np.array_equal(a.normal, b.normal) or a.offset != b.offset:
                return False
        for x, y in ((self.vertices, other.vertices), (self.rays, other.rays)):
            if (x is None) != (y is None) or (x is not None and not np.array_equal(x, y)):
                return False
        return True

    @property
    def dim(self) -> int:
        if self.constraints:
            return len(self.constraints[0].normal)
        if self.vertices is not None and self.vertices.size:
            return self.vertices.shape[1]
        return 2

    @classmethod
    def from_region(cls, label, region: Region) -> "AtomRegion":
        empty = region.is_empty()
        V = R = None
        if region.vertices is not None and not empty:
            V, R = region.vertices, region.rays
        return cls(str(label), empty, list(region.constraints), V, R)

    @classmethod
    def from_body(cls, label, body: ConvexBody) -> "AtomRegion":
        if body.is_empty:
            return cls(str(label), True, [], None, None)
        cons = list(body.hrep) if body.hrep is not None else []
        V = body.vertices
        R = body.rays if V is not None else None
        return cls(str(label), False, cons, V, R)


@dataclass
class RegionDoc:
    atoms: List[AtomRegion]
    meta: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict:
        atoms = []
        for a in self.atoms:
            item = {
                "label": a.label,
                "empty": a.empty,
                "constraints": [{"normal": [encode_float(v) for v in c.normal],
                                 "offset": encode_float(c.offset)} for c in a.constraints],
            }
            if a.vertices is not None:
                key = "2d" if a.dim == 2 else ""
                R = a.rays if a.rays is not None else np.zeros((0, a.dim))
                item["vertices" + key] = (a.vertices + 0.0).tolist()
                item["rays" + key] = (R + 0.0).tolist()
            atoms.append(item)
        return {"schema": SCHEMA_ID, "atoms": atoms, "meta": self.meta}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"

    @classmethod
    def from_json(cls, doc: dict) -> "RegionDoc":
        _validate(doc, "region")
        atoms = []
        for a in doc["atoms"]:
            cons = [HalfSpace(c["normal"], decode_float(c["offset"])) for c in a["constraints"]]
            V = R = None
            for key in ("2d", ""):
                if "vertices" + key in a:
                    dim = 2 if key else (len(cons[0].normal) if cons else None)
                    V = np.asarray(a["vertices" + key], dtype=float)
                    R = np.asarray(a.get("rays" + key, []), dtype=float)
                    d = V.shape[1] if V.size else (dim or 2)
                    V = V.reshape(-1, d)
                    R = R.reshape(-1, d)
            atoms.append(AtomRegion(a["label"], a["empty"], cons, V, R))
        return cls(atoms, dict(doc["meta"]))


def save_region(doc: RegionDoc, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(doc.dumps())


def load_region(path) -> RegionDoc:
    return RegionDoc.from_json(_read_json(path))


def format_value(x: float) -> str:
    """Table formatting: ``inf``, integers without a decimal point, else repr."""
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def partition_of(model: RandomSetModel) -> Partition:
    return model.partition()
