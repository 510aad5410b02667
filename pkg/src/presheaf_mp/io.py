"""JSON model, evidence, beliefs and transformation files.

Model files hold a poset and presheaf given either explicitly or through a
graphical spec, plus Hamiltonians or factors and optional weights.  The string
``"inf"`` stands for +infinity.  Floats are written with Python's shortest
round-trip ``repr`` so dumps are byte-stable.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .energy import check_subobject, hamiltonians_from_factors
from .errors import ParseError, ValidationError
from .poset import Poset, build_poset
from .presheaf import FiniteSetPresheaf, GraphicalSpec, check_weights, graphical_presheaf
from .transform import NaturalTransformation


@dataclass
class Model:
    poset: Poset
    presheaf: FiniteSetPresheaf
    hamiltonians: dict
    weights: dict | None = None
    spec: GraphicalSpec | None = None
    factors: dict | None = None

    def __iter__(self):
        return iter((self.poset, self.presheaf, self.hamiltonians, self.weights))


def read_json(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def _number(x, where):
    if isinstance(x, str):
        if x in ("inf", "+inf", "Infinity"):
            return math.inf
        raise ParseError(f"{where}: expected a number or \"inf\", got {x!r}")
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"{where}: expected a number, got {x!r}")
    return float(x)


def _vector(xs, where) -> np.ndarray:
    if not isinstance(xs, list):
        raise ParseError(f"{where}: expected a list")
    return np.array([_number(x, where) for x in xs], dtype=float)


def _index_vector(xs, where) -> np.ndarray:
    if not isinstance(xs, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in xs):
        raise ParseError(f"{where}: expected a list of integers")
    return np.array(xs, dtype=np.int64)


def _field(obj, elements, where, required=True) -> dict:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object keyed by element")
    unknown = set(obj) - set(elements)
    if unknown:
        raise ValidationError(f"{where}: unknown element {sorted(unknown)[0]!r}")
    out = {}
    for a in elements:
        if a in obj:
            out[a] = _vector(obj[a], f"{where}.{a}")
        elif required:
            raise ValidationError(f"{where}: missing element {a!r}")
    return out


def parse_spec(obj) -> GraphicalSpec:
    try:
        variables = [(str(n), int(k)) for n, k in obj["variables"]]
        regions = [list(r) for r in obj["regions"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"graphical: malformed spec ({exc})") from None
    return GraphicalSpec(variables, regions)


def model_from_dict(obj) -> Model:
    if not isinstance(obj, dict):
        raise ParseError("model file must hold a JSON object")
    spec = None
    if "graphical" in obj:
        spec = parse_spec(obj["graphical"])
        F = graphical_presheaf(spec)
        if "poset" in obj:
            declared = _parse_poset(obj["poset"])
            if not declared.same_as(F.poset):
                raise ValidationError("declared poset differs from the region inclusion order")
    elif "presheaf" in obj:
        if "poset" not in obj:
            raise ParseError("explicit presheaf needs a \"poset\" section")
        P = _parse_poset(obj["poset"])
        ps = obj["presheaf"]
        if not isinstance(ps, dict) or "sets" not in ps:
            raise ParseError("presheaf: expected {\"sets\": ..., \"maps\": ...}")
        sets = ps["sets"]
        sizes = {}
        for a in P:
            if a not in sets:
                raise ValidationError(f"presheaf.sets: missing element {a!r}")
            sizes[a] = int(sets[a])
        maps = {}
        for key, idx in (ps.get("maps") or {}).items():
            if "->" not in key:
                raise ParseError(f"presheaf.maps: key {key!r} is not of the form \"a->b\"")
            a, b = key.split("->", 1)
            maps[(a, b)] = _index_vector(idx, f"presheaf.maps.{key}")
        F = FiniteSetPresheaf(P, sizes, maps)
    else:
        raise ParseError("model needs a \"graphical\" or a \"presheaf\" section")
    els = list(F.poset)
    factors = None
    if "hamiltonians" in obj:
        H = _field(obj["hamiltonians"], els, "hamiltonians")
    elif "factors" in obj:
        factors = _field(obj["factors"], els, "factors", required=False)
        H = hamiltonians_from_factors(spec, factors, F)
    else:
        H = {a: np.zeros(F.sizes[a]) for a in els}
    check_subobject(F, H)
    weights = None
    if obj.get("weights") is not None:
        weights = check_weights(F, _field(obj["weights"], els, "weights"))
    return Model(F.poset, F, H, weights, spec, factors)


def _parse_poset(obj) -> Poset:
    try:
        elements = [str(e) for e in obj["elements"]]
        pairs = [(str(b), str(a)) for b, a in obj.get("leq", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"poset: malformed section ({exc})") from None
    return build_poset(elements, pairs)


def load_model(path) -> Model:
    return model_from_dict(read_json(path))


def load_evidence(path) -> dict:
    obj = read_json(path)
    if not isinstance(obj, dict) or not all(isinstance(v, int) for v in obj.values()):
        raise ParseError("evidence file must map variable names to integer values")
    return obj


def num_out(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def field_to_json(v) -> dict:
    return {a: [num_out(x) for x in np.asarray(v[a], dtype=float)] for a in v}


def dump_model(model: Model) -> str:
    """Canonical explicit form (graphical models are expanded)."""
    F = model.presheaf
    obj = {
        "poset": {"elements": list(F.poset.elements), "leq": [[b, a] for b, a in F.poset.relation_pairs()]},
        "presheaf": {"sets": {a: int(F.sizes[a]) for a in F.poset},
                     "maps": {f"{a}->{b}": [int(i) for i in F.maps[(a, b)]] for a, b in F.pairs}},
        "hamiltonians": field_to_json(model.hamiltonians),
    }
    if model.weights is not None:
        obj["weights"] = field_to_json(model.weights)
    return dumps(obj)


def _is_flat(x) -> bool:
    return isinstance(x, list) and all(not isinstance(v, (list, dict)) for v in x)


def _render(obj, depth: int) -> str:
    pad = "  " * (depth + 1)
    if isinstance(obj, dict) and obj:
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_render(v, depth + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * depth + "}"
    if isinstance(obj, list) and obj and not _is_flat(obj):
        items = [pad + _render(v, depth + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + "  " * depth + "]"
    return json.dumps(obj, ensure_ascii=False, allow_nan=False, separators=(", ", ": "))


def dumps(obj) -> str:
    """Deterministic JSON text: nested containers indented, scalar lists on one line."""
    return _render(obj, 0) + "\n"


def load_beliefs(path, F: FiniteSetPresheaf) -> dict:
    return _field(read_json(path), list(F.poset), "beliefs")


def load_transform(path) -> tuple:
    """``(source_model, target_model, phi)``; paths inside the file are relative to it."""
    obj = read_json(path)
    base = Path(path).parent
    try:
        src, tgt, comps = obj["source"], obj["target"], obj["components"]
    except (KeyError, TypeError):
        raise ParseError("transform file needs \"source\", \"target\" and \"components\"") from None
    M = load_model(base / src)
    G = load_model(base / tgt)
    comps = {a: _index_vector(c, f"components.{a}") for a, c in comps.items()}
    missing = [a for a in M.poset if a not in comps]
    if missing:
        raise ValidationError(f"components: missing element {missing[0]!r}")
    return M, G, NaturalTransformation(M.presheaf, G.presheaf, comps)
