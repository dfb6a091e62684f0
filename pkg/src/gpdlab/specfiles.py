"""JSON spec-file ingestion and serialization.

All input files carry ``spec_version: 1`` and a ``kind`` tag.  Parsing
validates every invariant at load: groupoid files must satisfy the
groupoid axioms, atlas files the atlas laws, domain files the domain
constraints.  Diagnostics name the offending field path and witness.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .algebra import AlgebraElement
from .conical import LayerDomain, NamedBase, RayBase, Vertex
from .gluing import GluingAtlas, GluingPiece
from .groupoid import FiniteGroupoid, validate

SPEC_VERSION = 1


class SchemaError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _load_json(path):
    path = Path(path)
    if not path.exists():
        raise SchemaError(str(path), "file does not exist")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None


def _expect(cond: bool, path: str, message: str):
    if not cond:
        raise SchemaError(path, message)


def _check_envelope(doc, kind: str, where: str):
    _expect(isinstance(doc, dict), where, "document must be a JSON object")
    _expect(doc.get("spec_version") == SPEC_VERSION, f"{where}.spec_version",
            f"unsupported version {doc.get('spec_version')!r} (supported: {SPEC_VERSION})")
    _expect(doc.get("kind") == kind, f"{where}.kind",
            f"expected kind {kind!r}, got {doc.get('kind')!r}")


# ---------------------------------------------------------------------------
# groupoids


def groupoid_from_dict(doc, where: str = "groupoid") -> FiniteGroupoid:
    _check_envelope(doc, "groupoid", where)
    units = doc.get("units")
    _expect(isinstance(units, list) and all(isinstance(u, str) for u in units),
            f"{where}.units", "must be an array of strings")
    arrows_spec = doc.get("arrows")
    _expect(isinstance(arrows_spec, list), f"{where}.arrows", "must be an array")
    arrows, dom, rng = [], {}, {}
    for i, spec in enumerate(arrows_spec):
        here = f"{where}.arrows[{i}]"
        _expect(isinstance(spec, dict), here, "must be an object")
        for key in ("id", "dom", "rng"):
            _expect(isinstance(spec.get(key), str), f"{here}.{key}", "must be a string")
        arrows.append(spec["id"])
        dom[spec["id"]] = spec["dom"]
        rng[spec["id"]] = spec["rng"]
    unit_arrows = doc.get("unit_arrows")
    _expect(isinstance(unit_arrows, dict), f"{where}.unit_arrows", "must be a map unit -> arrow")
    inverse = doc.get("inverse")
    _expect(isinstance(inverse, dict), f"{where}.inverse", "must be a map arrow -> arrow")
    compose_spec = doc.get("compose")
    _expect(isinstance(compose_spec, list), f"{where}.compose", "must be an array of [g, h, gh]")
    compose = {}
    for i, triple in enumerate(compose_spec):
        here = f"{where}.compose[{i}]"
        _expect(isinstance(triple, list) and len(triple) == 3, here, "must be a triple [g, h, gh]")
        g, h, k = triple
        for name, val in (("g", g), ("h", h), ("gh", k)):
            _expect(val in dom, f"{here}", f"{name}={val!r} is not a declared arrow id")
        _expect((g, h) not in compose, here, f"duplicate compose entry for ({g!r}, {h!r})")
        compose[(g, h)] = k
    try:
        groupoid = FiniteGroupoid(units, arrows, dom, rng, unit_arrows, inverse, compose)
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from None
    report = validate(groupoid)
    if not report.ok:
        first = report.violations[0]
        raise SchemaError(
            where,
            f"groupoid axioms violated: {first.axiom} at witness {first.witness!r}",
        )
    return groupoid


def groupoid_to_dict(g: FiniteGroupoid) -> dict:
    names = {a: _id_str(a) for a in g.arrows}
    unit_names = {x: _id_str(x) for x in g.units}
    return {
        "spec_version": SPEC_VERSION,
        "kind": "groupoid",
        "units": [unit_names[x] for x in g.units],
        "arrows": [
            {"id": names[a], "dom": unit_names[g.dom[a]], "rng": unit_names[g.rng[a]]}
            for a in g.arrows
        ],
        "unit_arrows": {unit_names[x]: names[g.unit_arrow[x]] for x in g.units},
        "inverse": {names[a]: names[g.inverse[a]] for a in g.arrows},
        "compose": [[names[a], names[b], names[k]] for (a, b), k in g.compose.items()],
    }


def _id_str(value) -> str:
    return value if isinstance(value, str) else repr(value)


def parse_groupoid(path) -> FiniteGroupoid:
    return groupoid_from_dict(_load_json(path), where=str(path))


# ---------------------------------------------------------------------------
# atlases


def atlas_from_dict(doc, where: str = "atlas", base_dir: Path | None = None) -> GluingAtlas:
    _check_envelope(doc, "atlas", where)
    units = doc.get("units")
    _expect(isinstance(units, list) and all(isinstance(u, str) for u in units),
            f"{where}.units", "must be an array of strings")
    pieces_spec = doc.get("pieces")
    _expect(isinstance(pieces_spec, list) and pieces_spec, f"{where}.pieces",
            "must be a non-empty array")
    pieces = []
    for i, spec in enumerate(pieces_spec):
        here = f"{where}.pieces[{i}]"
        _expect(isinstance(spec, dict), here, "must be an object")
        gspec = spec.get("groupoid")
        if isinstance(gspec, str):
            gpath = Path(gspec)
            if base_dir is not None and not gpath.is_absolute():
                gpath = base_dir / gpath
            groupoid = parse_groupoid(gpath)
        elif isinstance(gspec, dict):
            groupoid = groupoid_from_dict(gspec, where=f"{here}.groupoid")
        else:
            raise SchemaError(f"{here}.groupoid", "must be an inline groupoid or a path string")
        emb = spec.get("embedding")
        _expect(isinstance(emb, dict), f"{here}.embedding", "must be a map piece-unit -> unit")
        pieces.append(GluingPiece(groupoid, emb))
    phis = {}
    for i, spec in enumerate(doc.get("phis", [])):
        here = f"{where}.phis[{i}]"
        _expect(isinstance(spec, dict), here, "must be an object")
        src, dst = spec.get("src"), spec.get("dst")
        _expect(isinstance(src, int) and 0 <= src < len(pieces), f"{here}.src", "bad piece index")
        _expect(isinstance(dst, int) and 0 <= dst < len(pieces), f"{here}.dst", "bad piece index")
        mapping = spec.get("map")
        _expect(isinstance(mapping, dict), f"{here}.map", "must be a map arrow -> arrow")
        phis[(src, dst)] = mapping
    try:
        atlas = GluingAtlas(units, pieces, phis or None)
        atlas.check()
        return atlas
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from None


def parse_atlas(path) -> GluingAtlas:
    p = Path(path)
    return atlas_from_dict(_load_json(p), where=str(p), base_dir=p.parent)


# ---------------------------------------------------------------------------
# domains


def domain_from_dict(doc, where: str = "domain") -> LayerDomain:
    _check_envelope(doc, "domain", where)
    n = doc.get("n")
    _expect(isinstance(n, int) and n >= 2, f"{where}.n", "dimension must be an integer >= 2")
    _expect(doc.get("no_cracks") is True, f"{where}.no_cracks",
            "must be true (cracked domains are out of scope)")
    vertices_spec = doc.get("vertices")
    _expect(isinstance(vertices_spec, list) and vertices_spec, f"{where}.vertices",
            "must be a non-empty array")
    vertices = []
    for i, spec in enumerate(vertices_spec):
        here = f"{where}.vertices[{i}]"
        _expect(isinstance(spec, dict), here, "must be an object")
        vid = spec.get("id")
        _expect(isinstance(vid, str), f"{here}.id", "must be a string")
        base_spec = spec.get("base")
        _expect(isinstance(base_spec, dict), f"{here}.base", "must be an object")
        btype = base_spec.get("type")
        if btype == "rays":
            angles = base_spec.get("angles")
            _expect(
                isinstance(angles, list) and all(isinstance(a, (int, float)) for a in angles),
                f"{here}.base.angles", "must be an array of numbers",
            )
            interior = base_spec.get("interior_angle")
            if interior is not None:
                _expect(isinstance(interior, (int, float)), f"{here}.base.interior_angle",
                        "must be a number")
            base = RayBase(tuple(float(a) for a in angles),
                           None if interior is None else float(interior))
        elif btype == "named":
            _expect(isinstance(base_spec.get("name"), str), f"{here}.base.name", "must be a string")
            comps = base_spec.get("components")
            _expect(isinstance(comps, int) and comps >= 1, f"{here}.base.components",
                    "must be a positive integer")
            base = NamedBase(base_spec["name"], comps)
        else:
            raise SchemaError(f"{here}.base.type", f"unknown base type {btype!r}")
        coords = spec.get("coords")
        if coords is not None:
            _expect(isinstance(coords, list) and len(coords) == n, f"{here}.coords",
                    f"must be an array of {n} numbers")
            coords = tuple(float(c) for c in coords)
        vertices.append(Vertex(vid, base, coords))
    edges = []
    for i, e in enumerate(doc.get("edges", [])):
        here = f"{where}.edges[{i}]"
        _expect(isinstance(e, list) and len(e) == 2, here, "must be a pair of vertex ids")
        edges.append((e[0], e[1]))
    try:
        return LayerDomain(n, tuple(vertices), tuple(edges))
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from None


def domain_to_dict(d: LayerDomain) -> dict:
    verts = []
    for v in d.vertices:
        if isinstance(v.base, RayBase):
            base = {"type": "rays", "angles": list(v.base.angles)}
            if v.base.interior_angle is not None:
                base["interior_angle"] = v.base.interior_angle
        else:
            base = {"type": "named", "name": v.base.name, "components": v.base.components}
        spec = {"id": _id_str(v.id), "base": base}
        if v.coords is not None:
            spec["coords"] = list(v.coords)
        verts.append(spec)
    return {
        "spec_version": SPEC_VERSION,
        "kind": "domain",
        "n": d.dimension,
        "vertices": verts,
        "edges": [[_id_str(a), _id_str(b)] for a, b in d.edges],
        "no_cracks": True,
    }


def parse_domain(path) -> LayerDomain:
    return domain_from_dict(_load_json(path), where=str(path))


# ---------------------------------------------------------------------------
# algebra elements


def element_from_dict(doc, groupoid: FiniteGroupoid, where: str = "element") -> AlgebraElement:
    _check_envelope(doc, "element", where)
    coeffs = doc.get("coefficients")
    _expect(isinstance(coeffs, dict), f"{where}.coefficients", "must be a map arrow -> [re, im]")
    aidx = groupoid.arrow_index()
    vec = np.zeros(groupoid.n_arrows, dtype=np.complex128)
    for arrow, pair in coeffs.items():
        here = f"{where}.coefficients[{arrow!r}]"
        _expect(arrow in aidx, here, "unknown arrow id")
        _expect(
            isinstance(pair, list) and len(pair) == 2
            and all(isinstance(x, (int, float)) for x in pair),
            here, "must be [re, im]",
        )
        vec[aidx[arrow]] = complex(pair[0], pair[1])
    return AlgebraElement(groupoid, vec)


def element_to_dict(a: AlgebraElement) -> dict:
    return {
        "spec_version": SPEC_VERSION,
        "kind": "element",
        "coefficients": {
            _id_str(arrow): [c.real, c.imag] for arrow, c in a.as_dict().items()
        },
    }


def parse_element(path, groupoid: FiniteGroupoid) -> AlgebraElement:
    return element_from_dict(_load_json(path), groupoid, where=str(path))


def dump(doc: dict, path=None) -> str:
    """Deterministic serialization (sorted keys, fixed layout)."""
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
