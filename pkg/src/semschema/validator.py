"""Event validation: compare an event against a resolved schema.

Returns every mismatch, not just the first.  Missing required properties
are reported first (in required-list order), then the event is walked in
document order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import RegistryError
from .jsonmodel import JsonPath, dumps
from .pattern import compile_pattern
from .registry import CUSTOM_PROPERTY, PropertyDef, Registry, ResolvedSchema, parse_id

MISSING_REQUIRED = "missing-required"
WRONG_TYPE = "wrong-type"
PATTERN_FAILED = "pattern-failed"
UNKNOWN_PROPERTY = "unknown-property"
ENUM_VIOLATION = "enum-violation"
CUSTOM_NONSTRING = "custom-nonstring"
BAD_SCHEMA_DECLARATION = "bad-schema-declaration"


@dataclass(frozen=True)
class Mismatch:
    path: JsonPath
    kind: str
    expected: str
    found: object = None

    def to_json(self) -> dict:
        return {"path": str(self.path), "kind": self.kind, "expected": self.expected, "found": _excerpt(self.found)}

    def __str__(self) -> str:
        return f"{self.path}: {self.kind}: expected {self.expected}, found {_excerpt(self.found)}"


def _excerpt(value) -> object:
    text = dumps(value)
    if len(text) > 120:
        return text[:117] + "..."
    return value


@dataclass(frozen=True)
class ValidationTarget:
    mode: str  # self | explicit | latest
    title: str | None = None
    version: int | None = None

    @staticmethod
    def self_declared() -> "ValidationTarget":
        return ValidationTarget("self")

    @staticmethod
    def explicit(title: str, version: int) -> "ValidationTarget":
        return ValidationTarget("explicit", title, version)

    @staticmethod
    def latest(title: str) -> "ValidationTarget":
        return ValidationTarget("latest", title)


def validate(registry: Registry, event, target: ValidationTarget | None = None) -> list[Mismatch]:
    """Validate one event; an empty result means it complies."""
    if target is None:
        target = ValidationTarget.self_declared()
    root = JsonPath(())
    if not isinstance(event, dict):
        return [Mismatch(root, WRONG_TYPE, "an event object", event)]
    if target.mode == "self":
        declared = event.get("schema")
        if not isinstance(declared, str):
            return [Mismatch(root.child("schema"), BAD_SCHEMA_DECLARATION, "a schema id string", declared)]
        try:
            _, title, version = parse_id(declared)
            resolved = registry.resolve(title, version)
        except RegistryError:
            return [Mismatch(root.child("schema"), BAD_SCHEMA_DECLARATION, "the id of a registered schema", declared)]
    elif target.mode == "explicit":
        resolved = registry.resolve(target.title, target.version)
    else:
        resolved = registry.resolve(target.title)
    out: list[Mismatch] = []
    allow_custom = resolved.doc.kind == "event"
    _check_object(registry, event, resolved.properties, resolved.required, root, allow_custom, out)
    return out


def _check_object(registry, value: dict, properties, required, path, allow_custom, out) -> None:
    for name in required:
        if name not in value:
            out.append(Mismatch(path.child(name), MISSING_REQUIRED, f"required property {name!r}"))
    for key, item in value.items():
        here = path.child(key)
        if allow_custom and key == CUSTOM_PROPERTY:
            if isinstance(item, dict):
                _check_custom(item, here, out)
            else:
                out.append(Mismatch(here, CUSTOM_NONSTRING, "an object holding string leaves", item))
        elif key not in properties:
            out.append(Mismatch(here, UNKNOWN_PROPERTY, "a declared property", item))
        else:
            _check_value(registry, item, properties[key], here, out)


def _check_value(registry, value, prop: PropertyDef, path, out) -> None:
    kind = prop.kind
    if kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            out.append(Mismatch(path, WRONG_TYPE, "a number", value))
        return
    if kind == "string":
        if not isinstance(value, str):
            out.append(Mismatch(path, WRONG_TYPE, "a string", value))
        elif prop.pattern is not None and not compile_pattern(prop.pattern).search(value):
            out.append(Mismatch(path, PATTERN_FAILED, f"a string matching {prop.pattern}", value))
        return
    if kind == "enum":
        if not isinstance(value, str):
            out.append(Mismatch(path, WRONG_TYPE, "a string", value))
        elif value not in prop.values:
            out.append(Mismatch(path, ENUM_VIOLATION, prop.describe(), value))
        return
    if kind == "array":
        if not isinstance(value, list):
            out.append(Mismatch(path, WRONG_TYPE, "an array", value))
            return
        for i, element in enumerate(value):
            _check_value(registry, element, prop.element, path.child(i), out)
        return
    if kind == "compound":
        if not isinstance(value, dict):
            out.append(Mismatch(path, WRONG_TYPE, prop.describe(), value))
            return
        _check_object(registry, value, prop.child_map(), (), path, False, out)
        return
    # reference: validate against the latest version of the named schema
    if not isinstance(value, dict):
        out.append(Mismatch(path, WRONG_TYPE, prop.describe(), value))
        return
    resolved: ResolvedSchema = registry.resolve_ref(prop.ref_title)
    _check_object(registry, value, resolved.properties, resolved.required, path, False, out)


def _check_custom(value, path, out) -> None:
    """The custom subtree is free-form except every leaf must be a string."""
    if isinstance(value, dict):
        for key, item in value.items():
            _check_custom(item, path.child(key), out)
        return
    if not isinstance(value, str):
        out.append(Mismatch(path, CUSTOM_NONSTRING, "a string leaf (or nested object of strings)", value))
