"""Context-definition documents (JSON) and the built-in demo contexts."""

from __future__ import annotations

import json
import re
from dataclasses import fields

from ..contexts import KINDS, Caps, LieContext, make_signature

PARITY_NAMES = {"even": 0, "odd": 1, 0: 0, 1: 1, "0": 0, "1": 1}
IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
RESERVED = {"d"}


class ContextDocError(ValueError):
    pass


DEMO_BASE = [{"name": "x", "parity": "even"}, {"name": "y", "parity": "even"},
             {"name": "th1", "parity": "odd"}, {"name": "th2", "parity": "odd"}]


def demo_doc(kind: str) -> dict:
    return {
        "kind": kind,
        "variables": [dict(v, role="base") for v in DEMO_BASE],
        "odd_parameters": ["lam"],
        "even_parameters": ["t"],
        "caps": {"max_base_degree": 2, "max_operator_order": 3, "arity_cap": 4},
    }


def _parity(value, where: str) -> int:
    try:
        return PARITY_NAMES[value]
    except (KeyError, TypeError):
        raise ContextDocError(f"{where}: parity must be 'even' or 'odd', got {value!r}") from None


def normalize(doc: dict) -> dict:
    """Canonical form: base variables only, parameters split by parity."""
    if not isinstance(doc, dict):
        raise ContextDocError("context document must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ContextDocError(f"kind must be one of {', '.join(KINDS)}, got {kind!r}")
    base, odd_params, even_params = [], list(doc.get("odd_parameters", [])), list(doc.get("even_parameters", []))
    conj = []
    for i, v in enumerate(doc.get("variables", [])):
        where = f"variables[{i}]"
        if not isinstance(v, dict) or "name" not in v:
            raise ContextDocError(f"{where}: needs a name")
        role = v.get("role", "base")
        par = _parity(v.get("parity", "even"), where)
        if role == "base":
            base.append((v["name"], par))
        elif role in ("auxiliary-odd-parameter", "odd_parameter", "param"):
            if par != 1 and role != "param":
                raise ContextDocError(f"{where}: auxiliary parameters are odd")
            (odd_params if par else even_params).append(v["name"])
        elif role in ("momentum", "antimomentum"):
            conj.append((v["name"], par, role, v.get("base"), where))
        else:
            raise ContextDocError(f"{where}: unknown role {role!r}")
    if not base:
        raise ContextDocError("at least one base variable is required")
    names = [n for n, _ in base] + odd_params + even_params
    for n in names:
        if not isinstance(n, str) or not IDENT.match(n) or n in RESERVED:
            raise ContextDocError(f"invalid variable name {n!r}")
    if len(set(names)) != len(names):
        raise ContextDocError("variable names must be unique")
    parity_of = dict(base)
    want_role = "antimomentum" if kind == "multivec" else "momentum"
    prefix = "xs_" if kind == "multivec" else "p_"
    for name, par, role, b, where in conj:
        b = b or (name[len(prefix):] if name.startswith(prefix) else None)
        if role != want_role or b not in parity_of or name != prefix + b:
            raise ContextDocError(f"{where}: {role} {name!r} does not match a {kind} context")
        expected = 1 - parity_of[b] if kind == "multivec" else parity_of[b]
        if par != expected:
            raise ContextDocError(f"{where}: {name!r} must have parity {'odd' if expected else 'even'}")
    generated = {prefix + n for n, _ in base}
    if generated & set(names):
        raise ContextDocError("a declared name collides with a generated momentum")
    caps_in = dict(doc.get("caps", {}))
    caps = {}
    known = {f.name for f in fields(Caps)}
    for key, value in caps_in.items():
        k = key.replace("-", "_")
        if k not in known:
            raise ContextDocError(f"unknown cap {key!r}")
        caps[k] = value
    merged = {f.name: caps.get(f.name, getattr(Caps(), f.name)) for f in fields(Caps)}
    for k, v in merged.items():
        if k == "param_rate":
            continue
        if not isinstance(v, int) or v < 0:
            raise ContextDocError(f"cap {k} must be a nonnegative integer")
    return {
        "kind": kind,
        "variables": [{"name": n, "parity": "odd" if p else "even", "role": "base"} for n, p in base],
        "odd_parameters": odd_params,
        "even_parameters": even_params,
        "caps": {k: merged[k] for k in ("max_base_degree", "max_operator_order", "arity_cap", "max_terms")},
    }


def build_context(doc: dict) -> LieContext:
    doc = normalize(doc)
    base = [(v["name"], _parity(v["parity"], v["name"])) for v in doc["variables"]]
    params = [(n, 1) for n in doc["odd_parameters"]] + [(n, 0) for n in doc["even_parameters"]]
    sig = make_signature(doc["kind"], base, params)
    return LieContext(doc["kind"], sig, Caps(**doc["caps"]))


def dump(doc: dict) -> str:
    return json.dumps(normalize(doc), indent=2) + "\n"


def load(source: str) -> tuple[dict, LieContext]:
    """``source`` is a file path or ``demo-<kind>``."""
    if source.startswith("demo-") and source[5:] in KINDS:
        doc = demo_doc(source[5:])
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ContextDocError(f"cannot read context file {source!r}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ContextDocError(f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno}") from None
    doc = normalize(doc)
    return doc, build_context(doc)
