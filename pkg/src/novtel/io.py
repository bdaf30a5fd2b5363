"""JSON loading with field-level diagnostics.

Every loader reports the JSON path of the offending field, and the line
and column when the file itself is not valid JSON.
"""

from __future__ import annotations

import json
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, List, Optional

from .complex import GradedComplex, GradedMap
from .errors import NovtelError, ShapeError, UnsupportedInput
from .neck import NeckParams, OrbitDatum
from .ray import Ray, RayHomotopy, RayMorphism, tensor_rays
from .unital import UnitData


class InputError(UnsupportedInput):
    """Malformed input file; ``field`` is a JSON path such as ``prefix[1].differential[0]``."""

    def __init__(self, message: str, source: str = "", field: str = ""):
        where = ":".join(x for x in (source, field) if x)
        super().__init__(f"{where}: {message}" if where else message)
        self.source = source
        self.field = field


def read_json(path) -> Any:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(f"cannot read file ({exc.strerror})", str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                         str(path)) from None


@contextmanager
def field(source: str, path: str):
    """Re-raise shape and value errors as :class:`InputError` tagged with ``path``."""
    try:
        yield
    except InputError:
        raise
    except (KeyError, IndexError) as exc:
        raise InputError(f"missing field {exc}", source, path) from None
    except (ShapeError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(str(exc), source, path) from None


def _obj(data, source: str, path: str = "") -> dict:
    if not isinstance(data, dict):
        raise InputError(f"expected an object, got {type(data).__name__}", source, path)
    return data


def kind_of(data) -> str:
    if isinstance(data, dict):
        if "prefix" in data:
            return "ray"
        if "degrees" in data:
            return "complex"
        if "alpha" in data:
            return "neck"
        if "C" in data and "p" in data:
            return "bundle"
    if isinstance(data, list):
        return "orbits"
    return "unknown"


def complex_from(data, source: str = "", path: str = "") -> GradedComplex:
    _obj(data, source, path)
    gens_path = f"{path}.degrees" if path else "degrees"
    for i, entry in enumerate(data.get("degrees", [])):
        with field(source, f"{gens_path}[{i}]"):
            int(entry["degree"])
            list(entry["generators"])
    for i, entry in enumerate(data.get("differential", [])):
        with field(source, f"{path + '.' if path else ''}differential[{i}]"):
            int(entry["from_degree"])
            entry["matrix"]
    with field(source, path or "complex"):
        return GradedComplex.from_json(data)


def ray_from(data, source: str = "", path: str = "") -> Ray:
    _obj(data, source, path)
    pre = f"{path}." if path else ""
    if "prefix" not in data:
        raise InputError("missing field 'prefix'", source, path)
    prefix = [complex_from(c, source, f"{pre}prefix[{i}]") for i, c in enumerate(data["prefix"])]
    if not prefix:
        raise InputError("a ray needs at least one slice", source, f"{pre}prefix")
    maps = []
    for i, m in enumerate(data.get("maps", [])):
        with field(source, f"{pre}maps[{i}]"):
            if i + 1 >= len(prefix):
                raise ShapeError(f"map c_{i + 1} has no target slice")
            maps.append(GradedMap.from_json(m, prefix[i], prefix[i + 1]))
    if len(maps) != len(prefix) - 1:
        raise InputError(f"expected {len(prefix) - 1} maps, got {len(maps)}", source, f"{pre}maps")
    tail = data.get("tail")
    with field(source, f"{pre}tail"):
        if tail is None:
            phi = GradedMap(prefix[-1], prefix[-1], {k: _identity(prefix[-1], k) for k in prefix[-1].gens})
        else:
            phi = GradedMap.from_json(tail.get("endomorphism", tail), prefix[-1], prefix[-1])
        return Ray(prefix, maps, phi, data.get("name", ""))


def _identity(C: GradedComplex, k: int):
    from .linalg import Mat
    return Mat.identity(C.rank(k))


def morphism_from(data, source: Ray, target: Ray, src: str = "", path: str = "") -> RayMorphism:
    _obj(data, src, path)
    with field(src, path):
        return RayMorphism.from_json(data, source, target)


def homotopy_from(data, F: RayMorphism, G: RayMorphism, src: str = "", path: str = "") -> RayHomotopy:
    _obj(data, src, path)
    S, Tg = F.source, F.target
    K, q = [], []
    for i, m in enumerate(data.get("K", []), start=1):
        with field(src, f"{path}.K[{i - 1}]"):
            K.append(GradedMap.from_json(m, S.slice(i), Tg.slice(i)))
    for i, m in enumerate(data.get("q", []), start=1):
        with field(src, f"{path}.q[{i - 1}]"):
            q.append(GradedMap.from_json(m, S.slice(i), Tg.slice(i + 1)))
    return RayHomotopy(F, G, K, q)


def unit_from(data, ray: Ray, source: str = "", path: str = "") -> UnitData:
    _obj(data, source, path)
    with field(source, path or "unit"):
        return UnitData.from_json(data, ray)


def neck_from(data, source: str = "", path: str = "") -> NeckParams:
    _obj(data, source, path)
    with field(source, path or "neck"):
        return NeckParams.from_json(data)


def orbits_from(data, source: str = "", path: str = "orbits") -> Dict[str, OrbitDatum]:
    """Orbit data keyed by generator label (an object) or a list with ``label`` fields."""
    items = data.items() if isinstance(data, dict) else ((o.get("label", ""), o) for o in data)
    out = {}
    for label, o in items:
        with field(source, f"{path}.{label}" if label else path):
            out[label] = OrbitDatum.from_json(o, label)
    return out


def stream_from(data, source: str = "", path: str = "stream") -> List[tuple]:
    """An orbit stream: list of ``[period, cz]`` pairs or objects with those keys."""
    from .novikov import as_fraction
    out = []
    if not isinstance(data, list):
        raise InputError("orbit stream must be a list", source, path)
    for i, o in enumerate(data):
        with field(source, f"{path}[{i}]"):
            if isinstance(o, dict):
                out.append((as_fraction(o["period"]), int(o["cz"])))
            else:
                per, cz = o
                out.append((as_fraction(per), int(cz)))
    return out


class Bundle:
    """A realization bundle: rays ``C``, ``Cprime`` and ``D``, product ``p``, unit ``u``, map ``f``, homotopy ``E``."""

    def __init__(self, data, source: str = ""):
        _obj(data, source)
        self.C = ray_from(data["C"], source, "C") if "C" in data else None
        if self.C is None:
            raise InputError("missing field 'C'", source)
        self.Cprime = ray_from(data["Cprime"], source, "Cprime") if "Cprime" in data else self.C
        if "D" not in data:
            raise InputError("missing field 'D'", source)
        self.D = ray_from(data["D"], source, "D")
        with field(source, "C (x) Cprime"):
            self.CC = tensor_rays(self.Cprime, self.C)
        for key in ("p", "unit", "f"):
            if key not in data:
                raise InputError(f"missing field {key!r}", source)
        self.p = morphism_from(data["p"], self.CC, self.D, source, "p")
        self.u = unit_from(data["unit"], self.Cprime, source, "unit")
        self.f = morphism_from(data["f"], self.C, self.D, source, "f")
        self.E = None
        if data.get("E") is not None:
            from .ray import compose
            from .unital import unit_tensor_id
            comp = compose(self.p, unit_tensor_id(self.u, self.C, self.CC))
            self.E = homotopy_from(data["E"], comp, self.f, source, "E")
        self.schedule = data.get("schedule")


def dump(obj) -> str:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def bundle_to_json(C: Ray, D: Ray, p: RayMorphism, u: UnitData, f: RayMorphism,
                   E: Optional[RayHomotopy] = None, Cprime: Optional[Ray] = None,
                   schedule=None) -> dict:
    out = {"C": C.to_json(), "D": D.to_json(), "p": p.to_json(), "unit": u.to_json(), "f": f.to_json()}
    if Cprime is not None and Cprime is not C:
        out["Cprime"] = Cprime.to_json()
    if E is not None:
        out["E"] = {"K": [m.to_json() for m in E.K], "q": [m.to_json() for m in E.q]}
    if schedule is not None:
        out["schedule"] = [str(x) for x in schedule]
    return out
