"""Versioned schema store: inheritance, references, lifecycle, release tags.

Schemas live one JSON file per version under ``<repo>/<kind>/<slug>/<n>.json``
where kind is ``event`` or ``object``.  A schema file carries:

    id          URL embedding kind, title slug and linear version
    title       human name; words separated by spaces, no hyphens
    description optional freeform text
    allOf       optional id of the parent schema (same kind)
    properties  name -> property definition
    required    optional list of mandatory property names

Property definitions use one of six shapes:

    {"type": "number"}
    {"type": "string", "pattern": "..."?}
    {"enum": ["a", "b", ...]}
    {"type": "array", "items": <definition>}
    {"type": "object", "properties": {...}}
    {"$ref": "<schema title>"}

plus an optional "description" on any of them.  References name an
object-kind schema by title and always resolve to its latest version.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import jsonmodel
from .errors import PatternError, RegistryError, UnknownSchemaError
from .pattern import compile_pattern

HOST = "https://schema.example.com"

BASE_EVENT_TITLE = "Base Event"
BASE_OBJECT_TITLE = "Base Object"

# the envelope subtree tenants may fill freely; never declared in schemas
CUSTOM_PROPERTY = "custom"

KINDS = ("event", "object")

_TITLE_RE = re.compile(r"[A-Za-z0-9]+( [A-Za-z0-9]+)*")


def title_to_slug(title: str) -> str:
    return title.replace(" ", "-")


def slug_to_title(slug: str) -> str:
    return slug.replace("-", " ")


def make_id(kind: str, title: str, version: int) -> str:
    return f"{HOST}/schemas/{kind}/{title_to_slug(title)}/{version}"


def parse_id(schema_id: str) -> tuple[str, str, int]:
    """Split an id URL into (kind, title, linear_version)."""
    prefix = f"{HOST}/schemas/"
    if not isinstance(schema_id, str) or not schema_id.startswith(prefix):
        raise RegistryError(f"not a schema id: {schema_id!r}")
    parts = schema_id[len(prefix) :].split("/")
    if len(parts) != 3 or parts[0] not in KINDS or not parts[2].isdigit():
        raise RegistryError(f"malformed schema id: {schema_id!r}")
    return parts[0], slug_to_title(parts[1]), int(parts[2])


@dataclass(frozen=True)
class PropertyDef:
    kind: str  # number | string | enum | array | ref | compound
    description: str | None = None
    pattern: str | None = None
    values: tuple[str, ...] = ()
    element: "PropertyDef | None" = None
    ref_title: str | None = None
    children: "tuple[tuple[str, PropertyDef], ...]" = ()

    def child_map(self) -> dict[str, "PropertyDef"]:
        return dict(self.children)

    def same_definition(self, other: "PropertyDef") -> bool:
        """Structural equality ignoring descriptions at every level."""
        if self.kind != other.kind:
            return False
        if self.kind == "string":
            return self.pattern == other.pattern
        if self.kind == "enum":
            return self.values == other.values
        if self.kind == "array":
            return self.element.same_definition(other.element)
        if self.kind == "ref":
            return self.ref_title == other.ref_title
        if self.kind == "compound":
            if [k for k, _ in self.children] != [k for k, _ in other.children]:
                return False
            mine, theirs = self.child_map(), other.child_map()
            return all(mine[k].same_definition(theirs[k]) for k in mine)
        return True

    def to_json(self) -> dict:
        out: dict = {}
        if self.kind == "number":
            out["type"] = "number"
        elif self.kind == "string":
            out["type"] = "string"
            if self.pattern is not None:
                out["pattern"] = self.pattern
        elif self.kind == "enum":
            out["enum"] = list(self.values)
        elif self.kind == "array":
            out["type"] = "array"
            out["items"] = self.element.to_json()
        elif self.kind == "compound":
            out["type"] = "object"
            out["properties"] = {name: d.to_json() for name, d in self.children}
        else:
            out["$ref"] = self.ref_title
        if self.description is not None:
            out["description"] = self.description
        return out

    def describe(self) -> str:
        """One-line rendering used in mismatch and diff messages."""
        if self.kind == "string" and self.pattern is not None:
            return f"string matching {self.pattern}"
        if self.kind == "enum":
            return "one of " + ", ".join(self.values)
        if self.kind == "array":
            return f"array of {self.element.describe()}"
        if self.kind == "ref":
            return f"reference to {self.ref_title}"
        if self.kind == "compound":
            return "object with keys " + ", ".join(k for k, _ in self.children)
        return self.kind


def parse_property(raw, where: str = "property") -> PropertyDef:
    if not isinstance(raw, dict):
        raise RegistryError(f"{where}: property definition must be an object")
    known = {"type", "pattern", "enum", "items", "properties", "$ref", "description"}
    for key in raw:
        if key not in known:
            raise RegistryError(f"{where}: unknown field {key!r} in property definition")
    description = raw.get("description")
    if description is not None and not isinstance(description, str):
        raise RegistryError(f"{where}: description must be a string")
    has_type = "type" in raw
    if "$ref" in raw:
        if has_type or "enum" in raw:
            raise RegistryError(f"{where}: $ref cannot be combined with type or enum")
        title = raw["$ref"]
        if not isinstance(title, str) or not _TITLE_RE.fullmatch(title):
            raise RegistryError(f"{where}: $ref must name a schema title")
        return PropertyDef("ref", description, ref_title=title)
    if "enum" in raw:
        if has_type:
            raise RegistryError(f"{where}: enum carries no type field")
        values = raw["enum"]
        if not isinstance(values, list) or not values or not all(isinstance(v, str) for v in values):
            raise RegistryError(f"{where}: enum needs a non-empty list of strings")
        if len(set(values)) != len(values):
            raise RegistryError(f"{where}: enum values repeat")
        return PropertyDef("enum", description, values=tuple(values))
    if not has_type:
        raise RegistryError(f"{where}: property definition needs type, enum or $ref")
    kind = raw["type"]
    if kind == "number":
        if "pattern" in raw:
            raise RegistryError(f"{where}: pattern applies to string properties only")
        return PropertyDef("number", description)
    if kind == "string":
        pattern = raw.get("pattern")
        if pattern is not None:
            if not isinstance(pattern, str):
                raise RegistryError(f"{where}: pattern must be a string")
            try:
                compile_pattern(pattern)
            except PatternError as exc:
                raise RegistryError(f"{where}: bad pattern: {exc}") from None
        return PropertyDef("string", description, pattern=pattern)
    if kind == "array":
        if "items" not in raw:
            raise RegistryError(f"{where}: array needs an items definition")
        return PropertyDef("array", description, element=parse_property(raw["items"], where + ".items"))
    if kind == "object":
        children = raw.get("properties")
        if not isinstance(children, dict) or not children:
            raise RegistryError(f"{where}: compound needs a non-empty properties mapping")
        parsed = tuple((name, parse_property(d, f"{where}.{name}")) for name, d in children.items())
        for name, _ in parsed:
            if name == CUSTOM_PROPERTY:
                raise RegistryError(f"{where}: {CUSTOM_PROPERTY!r} is reserved and cannot be declared")
        return PropertyDef("compound", description, children=parsed)
    raise RegistryError(f"{where}: unsupported type {kind!r}")


@dataclass(frozen=True)
class SchemaDoc:
    id: str
    title: str
    kind: str
    linear_version: int
    properties: tuple[tuple[str, PropertyDef], ...]
    parent: str | None
    required: tuple[str, ...]
    description: str | None = None

    def property_map(self) -> dict[str, PropertyDef]:
        return dict(self.properties)

    def is_tombstone(self) -> bool:
        return not self.properties and self.parent is None

    def body(self) -> dict:
        out: dict = {"id": self.id, "title": self.title}
        if self.description is not None:
            out["description"] = self.description
        if self.parent is not None:
            out["allOf"] = self.parent
        out["properties"] = {name: d.to_json() for name, d in self.properties}
        if self.required:
            out["required"] = list(self.required)
        return out


@dataclass(frozen=True)
class ResolvedSchema:
    doc: SchemaDoc
    properties: dict[str, PropertyDef]
    required: tuple[str, ...]
    overrides: tuple[str, ...]  # names redefined along the inheritance chain


@dataclass(frozen=True)
class ReleaseTag:
    major: int
    minor: int
    patch: int
    snapshot: tuple[tuple[str, int], ...]
    timestamp: str

    @property
    def version_string(self) -> str:
        return f"{self.major}.{self.minor}.{self.patch}"

    def to_json(self) -> dict:
        return {
            "version": self.version_string,
            "timestamp": self.timestamp,
            "snapshot": {title: version for title, version in self.snapshot},
        }


def _parse_doc(raw, kind: str, where: str) -> SchemaDoc:
    if not isinstance(raw, dict):
        raise RegistryError(f"{where}: schema file must hold a JSON object")
    known = {"id", "title", "description", "allOf", "properties", "required"}
    for key in raw:
        if key not in known:
            raise RegistryError(f"{where}: unknown schema field {key!r}")
    title = raw.get("title")
    if not isinstance(title, str) or not _TITLE_RE.fullmatch(title):
        raise RegistryError(f"{where}: title must be words of letters and digits (no hyphens)")
    schema_id = raw.get("id")
    if not isinstance(schema_id, str):
        raise RegistryError(f"{where}: id is required")
    id_kind, id_title, id_version = parse_id(schema_id)
    if id_kind != kind or id_title != title:
        raise RegistryError(f"{where}: id {schema_id!r} does not encode kind {kind!r} and title {title!r}")
    description = raw.get("description")
    if description is not None and not isinstance(description, str):
        raise RegistryError(f"{where}: description must be a string")
    parent = raw.get("allOf")
    if parent is not None:
        parse_id(parent)
    props_raw = raw.get("properties")
    if not isinstance(props_raw, dict):
        raise RegistryError(f"{where}: properties mapping is required (may be empty)")
    properties = []
    for name, prop_raw in props_raw.items():
        if name == CUSTOM_PROPERTY:
            raise RegistryError(
                f"{where}: {CUSTOM_PROPERTY!r} is implicit on every event and cannot be declared"
            )
        properties.append((name, parse_property(prop_raw, f"{where}.{name}")))
    required_raw = raw.get("required", [])
    if not isinstance(required_raw, list) or not all(isinstance(n, str) for n in required_raw):
        raise RegistryError(f"{where}: required must be a list of property names")
    if len(set(required_raw)) != len(required_raw):
        raise RegistryError(f"{where}: required repeats a name")
    return SchemaDoc(
        id=schema_id,
        title=title,
        kind=kind,
        linear_version=id_version,
        properties=tuple(properties),
        parent=parent,
        required=tuple(required_raw),
        description=description,
    )


class Registry:
    """All schema versions of all titles, plus ordered release tags.

    Reads are safe from any number of threads; registrations, tombstones
    and tagging assume a single writer.
    """

    def __init__(self):
        self._schemas: dict[str, dict[int, SchemaDoc]] = {}
        self._kinds: dict[str, str] = {}
        self.releases: list[ReleaseTag] = []

    def clone(self) -> "Registry":
        """Independent copy; the immutable SchemaDocs themselves are shared."""
        out = Registry()
        out._schemas = {title: dict(versions) for title, versions in self._schemas.items()}
        out._kinds = dict(self._kinds)
        out.releases = list(self.releases)
        return out

    # -- queries --------------------------------------------------------

    def titles(self) -> list[str]:
        return sorted(self._schemas)

    def kind_of(self, title: str) -> str:
        self._require_title(title)
        return self._kinds[title]

    def versions(self, title: str) -> list[int]:
        self._require_title(title)
        return sorted(self._schemas[title])

    def latest_version(self, title: str) -> int:
        return self.versions(title)[-1]

    def get(self, title: str, version: int | None = None) -> SchemaDoc:
        self._require_title(title)
        if version is None:
            version = self.latest_version(title)
        doc = self._schemas[title].get(version)
        if doc is None:
            raise UnknownSchemaError(f"no version {version} of {title!r} (latest is {self.latest_version(title)})")
        return doc

    def get_by_id(self, schema_id: str) -> SchemaDoc:
        _, title, version = parse_id(schema_id)
        return self.get(title, version)

    def _require_title(self, title: str) -> None:
        if title not in self._schemas:
            raise UnknownSchemaError(f"unknown schema title {title!r}")

    # -- resolution ------------------------------------------------------

    def resolve(self, title: str, version: int | None = None) -> ResolvedSchema:
        """Flatten the inheritance chain: parent properties overlaid by own."""
        doc = self.get(title, version)
        chain = [doc]
        seen = {(doc.title, doc.linear_version)}
        current = doc
        while current.parent is not None:
            _, parent_title, parent_version = parse_id(current.parent)
            current = self.get(parent_title, parent_version)
            key = (current.title, current.linear_version)
            if key in seen:
                raise RegistryError(f"inheritance cycle through {current.id}")
            seen.add(key)
            chain.append(current)
        properties: dict[str, PropertyDef] = {}
        required: list[str] = []
        overrides: list[str] = []
        for ancestor in reversed(chain):
            for name, prop in ancestor.properties:
                if name in properties:
                    overrides.append(name)
                properties[name] = prop
            for name in ancestor.required:
                if name not in required:
                    required.append(name)
        for name in required:
            if name not in properties:
                raise RegistryError(f"{doc.id}: required property {name!r} is not declared")
        return ResolvedSchema(doc, properties, tuple(required), tuple(overrides))

    def resolve_ref(self, ref_title: str) -> ResolvedSchema:
        """References always point at the latest version of the named schema."""
        if self._kinds.get(ref_title) != "object":
            raise RegistryError(f"$ref target {ref_title!r} is not an object schema")
        return self.resolve(ref_title)

    # -- consistency checks ----------------------------------------------

    def _check_doc(self, doc: SchemaDoc) -> None:
        if doc.parent is not None:
            parent_kind, parent_title, parent_version = parse_id(doc.parent)
            if parent_kind != doc.kind or self._kinds.get(parent_title) not in (None, doc.kind):
                raise RegistryError(f"{doc.id}: parent must be another {doc.kind} schema")
            parent = self.get(parent_title, parent_version)  # raises if missing
            if parent.is_tombstone():
                raise RegistryError(f"{doc.id}: parent {doc.parent} is tombstoned")
        for path, ref in _iter_refs(doc):
            if self._kinds.get(ref) is None:
                raise RegistryError(f"{doc.id}: {path}: reference to unknown schema {ref!r}")
            if self._kinds[ref] != "object":
                raise RegistryError(f"{doc.id}: {path}: references must target object schemas")
        self.resolve(doc.title, doc.linear_version)  # required-list and cycle checks
        self._check_ref_acyclic(doc.title)

    def _check_ref_acyclic(self, start: str) -> None:
        # edges at title granularity, across all stored versions
        visiting: set[str] = set()
        done: set[str] = set()

        def visit(title: str) -> None:
            if title in done:
                return
            if title in visiting:
                raise RegistryError(f"reference cycle through {title!r}")
            visiting.add(title)
            for doc in self._schemas.get(title, {}).values():
                for _, ref in _iter_refs(doc):
                    if ref in self._schemas:
                        visit(ref)
            visiting.discard(title)
            done.add(title)

        visit(start)

    # -- mutations -------------------------------------------------------

    def register_version(self, title: str, body: dict, kind: str | None = None) -> int:
        """Store the next linear version of a title; 0 when the title is new."""
        existing = self._schemas.get(title)
        if existing is None:
            if kind is None:
                raise RegistryError(f"new title {title!r} needs a kind (event or object)")
            if kind not in KINDS:
                raise RegistryError(f"unknown kind {kind!r}")
            version = 0
        else:
            if kind is not None and kind != self._kinds[title]:
                raise RegistryError(f"{title!r} is an {self._kinds[title]} schema, not {kind}")
            kind = self._kinds[title]
            version = max(existing) + 1
        expected_id = make_id(kind, title, version)
        body = dict(body)
        body.setdefault("id", expected_id)
        body.setdefault("title", title)
        doc = _parse_doc(body, kind, where=title)
        if doc.id != expected_id:
            raise RegistryError(f"{title!r}: id must be {expected_id}, got {doc.id}")
        if doc.title != title:
            raise RegistryError(f"body title {doc.title!r} does not match {title!r}")
        if existing:
            previous = existing[version - 1]
            if _same_body(previous, doc):
                raise RegistryError(f"{title!r}: no change against version {version - 1}")
        self._store(doc)
        try:
            self._check_doc(doc)
        except Exception:
            del self._schemas[title][version]
            if not self._schemas[title]:
                del self._schemas[title]
                del self._kinds[title]
            raise
        return version

    def tombstone(self, title: str) -> int:
        latest = self.get(title)
        if latest.is_tombstone():
            raise RegistryError(f"{title!r} is already tombstoned")
        return self.register_version(title, {"properties": {}})

    def tag_release(
        self, breaking_since_last: bool = False, major_override: bool = False, now: datetime | None = None
    ) -> ReleaseTag:
        if not self._schemas:
            raise RegistryError("cannot tag an empty registry")
        major, minor, patch = (0, 0, 0)
        if self.releases:
            last = self.releases[-1]
            major, minor, patch = last.major, last.minor, last.patch
        if major_override:
            major, minor, patch = major + 1, 0, 0
        elif breaking_since_last:
            minor, patch = minor + 1, 0
        else:
            patch += 1
        stamp = (now or datetime.now(timezone.utc)).isoformat()
        snapshot = tuple((title, max(versions)) for title, versions in sorted(self._schemas.items()))
        tag = ReleaseTag(major, minor, patch, snapshot, stamp)
        self.releases.append(tag)
        return tag

    def _store(self, doc: SchemaDoc) -> None:
        versions = self._schemas.setdefault(doc.title, {})
        if doc.linear_version in versions:
            raise RegistryError(f"{doc.id} registered twice")
        if doc.linear_version != (max(versions) + 1 if versions else 0):
            raise RegistryError(f"{doc.title!r}: versions must be contiguous, got {doc.linear_version}")
        versions[doc.linear_version] = doc
        self._kinds[doc.title] = doc.kind


def _iter_refs(doc: SchemaDoc):
    def walk(name: str, prop: PropertyDef):
        if prop.kind == "ref":
            yield name, prop.ref_title
        elif prop.kind == "array":
            yield from walk(name + ".items", prop.element)
        elif prop.kind == "compound":
            for child_name, child in prop.children:
                yield from walk(f"{name}.{child_name}", child)

    for name, prop in doc.properties:
        yield from walk(name, prop)


def _same_body(a: SchemaDoc, b: SchemaDoc) -> bool:
    """Full structural equality, descriptions included (used to reject no-ops)."""
    return (
        a.parent == b.parent
        and a.required == b.required
        and a.description == b.description
        and jsonmodel.json_equal(
            {name: d.to_json() for name, d in a.properties},
            {name: d.to_json() for name, d in b.properties},
        )
    )


# -- directory loading and writing --------------------------------------


def load_repo(directory: str | Path) -> Registry:
    """Load every schema version and the release history from a directory."""
    root = Path(directory)
    if not root.is_dir():
        raise RegistryError(f"not a directory: {root}")
    registry = Registry()
    docs: list[tuple[Path, SchemaDoc]] = []
    for kind in KINDS:
        kind_dir = root / kind
        if not kind_dir.is_dir():
            continue
        for slug_dir in sorted(p for p in kind_dir.iterdir() if p.is_dir()):
            title = slug_to_title(slug_dir.name)
            for file in sorted(slug_dir.glob("*.json"), key=_version_key):
                if not file.stem.isdigit():
                    raise RegistryError(f"{file}: file name must be <version>.json")
                try:
                    raw = jsonmodel.parse_json(file.read_text(encoding="utf-8"))
                    doc = _parse_doc(raw, kind, where=str(file))
                except RegistryError:
                    raise
                except Exception as exc:
                    raise RegistryError(f"{file}: {exc}") from None
                if doc.title != title:
                    raise RegistryError(f"{file}: title {doc.title!r} does not match directory {slug_dir.name!r}")
                if doc.linear_version != int(file.stem):
                    raise RegistryError(f"{file}: id version {doc.linear_version} does not match file name")
                docs.append((file, doc))
    for file, doc in docs:
        try:
            registry._store(doc)
        except RegistryError as exc:
            raise RegistryError(f"{file}: {exc}") from None
    for file, doc in docs:
        try:
            registry._check_doc(doc)
        except RegistryError as exc:
            raise RegistryError(f"{file}: {exc}") from None
    releases_file = root / "releases.json"
    if releases_file.exists():
        registry.releases = _parse_releases(releases_file)
        for tag in registry.releases:
            for title, version in tag.snapshot:
                if title not in registry._schemas or version not in registry._schemas[title]:
                    raise RegistryError(
                        f"{releases_file}: tag {tag.version_string} references missing {title!r} version {version}"
                    )
    return registry


def _version_key(path: Path):
    return int(path.stem) if path.stem.isdigit() else -1


def _parse_releases(file: Path) -> list[ReleaseTag]:
    raw = jsonmodel.parse_json(file.read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise RegistryError(f"{file}: expected a list of release tags")
    releases: list[ReleaseTag] = []
    for entry in raw:
        try:
            major, minor, patch = (int(part) for part in entry["version"].split("."))
            snapshot = tuple(sorted(entry["snapshot"].items()))
            releases.append(ReleaseTag(major, minor, patch, snapshot, entry["timestamp"]))
        except (KeyError, ValueError, AttributeError, TypeError):
            raise RegistryError(f"{file}: malformed release entry: {jsonmodel.dumps(entry)}") from None
    for earlier, later in zip(releases, releases[1:]):
        if (earlier.major, earlier.minor, earlier.patch) >= (later.major, later.minor, later.patch):
            raise RegistryError(f"{file}: release versions must strictly increase")
    return releases


def write_version(directory: str | Path, doc: SchemaDoc) -> Path:
    root = Path(directory)
    target = root / doc.kind / title_to_slug(doc.title) / f"{doc.linear_version}.json"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(jsonmodel.dumps(doc.body(), indent=2) + "\n", encoding="utf-8")
    return target


def write_releases(directory: str | Path, releases: list[ReleaseTag]) -> Path:
    target = Path(directory) / "releases.json"
    target.write_text(jsonmodel.dumps([tag.to_json() for tag in releases], indent=2) + "\n", encoding="utf-8")
    return target
