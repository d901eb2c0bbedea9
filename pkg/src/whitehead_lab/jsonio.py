"""JSON encodings for groups, elements, tuples and reports."""
from __future__ import annotations

import json
from pathlib import Path

from .errors import InputError, NotAUnit, UnknownCatalogEntry
from .groups import (
    CATALOG,
    SHORT_NAMES,
    FiniteGroup,
    build_group,
    catalog_group,
    center,
    group_fingerprint,
    is_normal,
    is_prime,
)
from .grouprings import Basis, GroupRingElt, conj_basis, group_basis, radical_index

SCHEMA = "whitehead-lab/1"


def dumps(obj: dict) -> str:
    """Canonical JSON: schema tag first, sorted keys, fixed indentation."""
    return json.dumps({"schema": SCHEMA, **obj}, sort_keys=True, indent=2) + "\n"


# -- group specs -------------------------------------------------------------------------


def _smallest_prime_factor(n: int) -> int | None:
    for q in range(2, n + 1):
        if n % q == 0 and is_prime(q):
            return q
    return None


def _infer_p(name: str, params: dict) -> int | None:
    if name in ("cyclic", "dihedral", "quaternion") and "n" in params:
        return _smallest_prime_factor(int(params["n"]))
    if name == "heisenberg":
        return int(params.get("p", 3))
    if name == "direct_product":
        for f in params.get("factors", []):
            q = _infer_p(f.get("name", ""), f.get("params", {}))
            if q:
                return q
    return None


def _parse_params(text: str) -> dict:
    text = text.strip()
    if not text:
        return {}
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"bad catalog parameters: {exc}") from exc
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise InputError(f"expected key=value in catalog parameters, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = int(v) if v.strip().lstrip("-").isdigit() else v.strip()
    return out


def group_from_spec(spec: dict, p: int | None = None) -> FiniteGroup:
    """Build a group from ``{"p", "generators"}`` or ``{"p", "catalog", "params"}``."""
    if not isinstance(spec, dict):
        raise InputError("group spec must be a JSON object")
    p = p if p is not None else spec.get("p")
    if "catalog" in spec:
        name = spec["catalog"]
        params = spec.get("params") or {}
        if name in SHORT_NAMES and not params:
            cname, params, q = SHORT_NAMES[name]
            if p is not None and p != q:
                raise InputError(f"{name} is a {q}-group")
            G = catalog_group(cname, params, q)
            return FiniteGroup(G.p, G.table, G.inverse, G.generator_ids, name=name)
        if name not in CATALOG:
            raise UnknownCatalogEntry(f"unknown catalog entry {name!r}")
        if p is None:
            p = _infer_p(name, params)
        if p is None:
            raise InputError(f"cannot infer p for {name}; pass --p")
        return catalog_group(name, params, int(p))
    if "generators" in spec:
        if p is None:
            raise InputError("a generator spec needs p")
        return build_group(spec["generators"], int(p), name=spec.get("name", "custom"))
    raise InputError("group spec needs 'generators' or 'catalog'")


def resolve_group(arg: str, p: int | None = None) -> FiniteGroup:
    """``catalog:NAME[:PARAMS]`` (PARAMS as ``k=v,...`` or JSON) or a path to a JSON spec."""
    if arg.startswith("catalog:"):
        rest = arg[len("catalog:") :]
        name, _, params = rest.partition(":")
        return group_from_spec({"catalog": name, "params": _parse_params(params)}, p)
    path = Path(arg)
    if not path.is_file():
        raise InputError(f"no such group file: {arg}")
    try:
        spec = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"bad group file: {exc}") from exc
    return group_from_spec(spec, p)


def group_info(G: FiniteGroup) -> dict:
    idx = G.subgroup_index
    cl = G.classes
    return {
        "name": G.name,
        "p": G.p,
        "order": G.order,
        "fingerprint": group_fingerprint(G),
        "generators": list(G.generator_ids),
        "abelian": G.is_abelian,
        "abelianization_order": G.abelianization.group.order,
        "center_order": center(G).order,
        "radical_index": radical_index(G),
        "classes": [
            {"representative": r, "size": len(m), "members": list(m)} for r, m in zip(cl.representatives, cl.members)
        ],
        "subgroups": [
            {
                "index": idx[H],
                "order": H.order,
                "members": list(H.members),
                "cyclic": H.is_cyclic,
                "normal": is_normal(G, H),
            }
            for H in G.subgroups
        ],
    }


def catalog_listing() -> dict:
    return {
        "families": list(CATALOG),
        "short_names": {k: {"catalog": n, "params": prm, "p": q} for k, (n, prm, q) in SHORT_NAMES.items()},
    }


# -- elements and tuples ------------------------------------------------------------------


def element_to_json(x: GroupRingElt) -> dict:
    """Coefficients as decimal strings keyed by monomial label; value is ``coeff / p^shift``."""
    return {
        "basis": {"kind": x.basis.kind, "group": x.group.name, "size": x.basis.size},
        "p": x.p,
        "precision": x.prec,
        "shift": x.shift,
        "coeffs": {str(i): str(c) for i, c in enumerate(x.coeffs)},
    }


def element_from_json(d: dict, basis: Basis) -> GroupRingElt:
    b = d.get("basis", {})
    kind = b.get("kind", basis.kind) if isinstance(b, dict) else b
    if kind != basis.kind:
        raise InputError(f"expected a {basis.kind} vector")
    try:
        raw = d["coeffs"]
        coeffs = [0] * basis.size
        if isinstance(raw, dict):
            for k, v in raw.items():
                coeffs[int(k)] = int(v)
        else:
            if len(raw) != basis.size:
                raise ValueError(f"expected {basis.size} coefficients")
            coeffs = [int(v) for v in raw]
        return GroupRingElt(basis, tuple(coeffs), int(d["p"]), int(d["precision"]), int(d.get("shift", 0)))
    except (KeyError, ValueError, TypeError, IndexError) as exc:
        raise InputError(f"bad element: {exc}") from exc


def _entries_json(t) -> list[dict]:
    idx = t.G.subgroup_index
    return [
        {"subgroup": idx[H], "order": H.order, "members": list(H.members), "elt": element_to_json(x)}
        for H, x in sorted(t.entries.items(), key=lambda kv: idx[kv[0]])
    ]


def phi_tuple_to_json(t) -> dict:
    return {"kind": "phi", "shape": t.shape, "p": t.p, "entries": _entries_json(t)}


def psi_tuple_to_json(t) -> dict:
    return {"kind": "psi", "p": t.p, "entries": _entries_json(t)}


def howell_to_json(B) -> dict:
    return {
        "p": B.p,
        "modulus_exponent": B.prec,
        "ncols": B.ncols,
        "rows": [[str(a) for a in row] for row in B.rows],
        "pivots": [list(pv) for pv in B.pivots],
        "length": B.length(),
    }


def _entries_by_subgroup(G: FiniteGroup, d: dict) -> dict:
    subs = G.subgroups
    out = {}
    for e in d.get("entries", []):
        try:
            out[subs[int(e["subgroup"])]] = e["elt"]
        except (KeyError, IndexError, ValueError) as exc:
            raise InputError(f"bad tuple entry: {exc}") from exc
    return out


def phi_tuple_from_json(G: FiniteGroup, d: dict):
    from .additive import PhiTuple, entry_basis, shape_subgroups

    shape = d.get("shape", "cyclic")
    if shape not in ("cyclic", "all"):
        raise InputError(f"unknown shape {shape!r}")
    raw = _entries_by_subgroup(G, d)
    entries = {}
    for H in shape_subgroups(G, shape):
        if H not in raw:
            raise InputError(f"tuple is missing subgroup {G.subgroup_index[H]}")
        entries[H] = element_from_json(raw[H], entry_basis(H, shape))
    return PhiTuple(G, shape, entries)


def psi_tuple_from_json(G: FiniteGroup, d: dict):
    from .multiplicative import PsiTuple

    raw = _entries_by_subgroup(G, d)
    entries = {}
    for H in G.subgroups:
        if H not in raw:
            raise InputError(f"tuple is missing subgroup {G.subgroup_index[H]}")
        entries[H] = element_from_json(raw[H], group_basis(H.ab.group))
    try:
        return PsiTuple(G, entries)
    except NotAUnit as exc:
        raise InputError(f"bad unit tuple: {exc}") from exc


def parse_vector(text: str, basis: Basis, p: int, prec: int) -> GroupRingElt:
    """Comma-separated integer coefficients on ``basis``."""
    try:
        coeffs = tuple(int(c) for c in text.split(","))
    except ValueError as exc:
        raise InputError(f"bad coefficient list: {exc}") from exc
    if len(coeffs) != basis.size:
        raise InputError(f"expected {basis.size} coefficients, got {len(coeffs)}")
    return GroupRingElt(basis, coeffs, p, prec)


__all__ = [
    "SCHEMA",
    "catalog_listing",
    "conj_basis",
    "dumps",
    "element_from_json",
    "element_to_json",
    "group_from_spec",
    "group_info",
    "howell_to_json",
    "parse_vector",
    "phi_tuple_from_json",
    "phi_tuple_to_json",
    "psi_tuple_from_json",
    "psi_tuple_to_json",
    "resolve_group",
]
