"""Schema evolution: version diffs, forward transform chains, impact tests.

A diff between two versions of one title is expressed as four operation
kinds: Add, Modify, Remove, and Rename (a Remove plus an Add with the
identical definition).  Anything other than adding an optional property
is a breaking change and needs a forward transform registered for that
step; non-breaking steps get an automatic identity transform.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from . import jslt
from .errors import (
    ChainValidationError,
    EvolutionError,
    MissingTransformError,
    UnsatisfiableError,
)
from .generator import GenConfig, generate_valid
from .jsonmodel import JsonPath, parse_json
from .registry import PropertyDef, Registry, slug_to_title
from .validator import ValidationTarget, validate

ADD = "Add"
MODIFY = "Modify"
REMOVE = "Remove"
RENAME = "Rename"

MUST_STAY_VALID = "must-stay-valid"
MUST_STAY_INVALID = "must-stay-invalid"


@dataclass(frozen=True)
class ChangeOp:
    kind: str
    path: tuple[str, ...]
    before: str | None = None
    after: str | None = None
    old_name: str | None = None  # Rename only
    new_name: str | None = None
    required_after: bool = False  # Add of a required property is breaking
    before_def: PropertyDef | None = None
    after_def: PropertyDef | None = None

    def to_json(self) -> dict:
        out: dict = {"op": self.kind, "path": ".".join(self.path)}
        if self.kind == RENAME:
            out["from"] = self.old_name
            out["to"] = self.new_name
        if self.before is not None:
            out["before"] = self.before
        if self.after is not None:
            out["after"] = self.after
        if self.kind == ADD:
            out["required"] = self.required_after
        return out


def _describe(prop: PropertyDef, required: bool | None = None) -> str:
    text = prop.describe()
    if required is True:
        return "required " + text
    if required is False:
        return "optional " + text
    return text


def diff(registry: Registry, title: str, version_a: int, version_b: int) -> list[ChangeOp]:
    """Change operations turning version_a's resolved shape into version_b's."""
    if version_a > version_b:
        raise EvolutionError(f"diff runs forward only: {version_a} > {version_b}")
    old = registry.resolve(title, version_a)
    new = registry.resolve(title, version_b)
    return _diff_level(
        old.properties, new.properties, set(old.required), set(new.required), path=()
    )


def _diff_level(old_props, new_props, old_required, new_required, path) -> list[ChangeOp]:
    top = not path  # requiredness exists only at the top level
    removed: list[tuple[str, PropertyDef]] = []
    ops: list[ChangeOp] = []
    for name, old_def in old_props.items():
        if name not in new_props:
            removed.append((name, old_def))
            continue
        new_def = new_props[name]
        was_required, is_required = name in old_required, name in new_required
        if old_def.kind == "compound" and new_def.kind == "compound":
            ops.extend(
                _diff_level(old_def.child_map(), new_def.child_map(), set(), set(), path + (name,))
            )
            if was_required == is_required:
                continue
        elif old_def.same_definition(new_def) and was_required == is_required:
            continue
        ops.append(
            ChangeOp(
                MODIFY, path + (name,),
                before=_describe(old_def, was_required if top else None),
                after=_describe(new_def, is_required if top else None),
                before_def=old_def, after_def=new_def,
            )
        )
    added = [(name, new_props[name]) for name in new_props if name not in old_props]
    claimed: set[str] = set()
    for old_name, old_def in removed:
        match = None
        for new_name, new_def in added:
            if new_name in claimed:
                continue
            if old_def.same_definition(new_def) and (old_name in old_required) == (new_name in new_required):
                match = new_name
                break
        if match is not None:
            claimed.add(match)
            ops.append(
                ChangeOp(RENAME, path + (old_name,), old_name=old_name, new_name=match,
                         before=_describe(old_def, (old_name in old_required) if top else None),
                         before_def=old_def, after_def=new_props[match])
            )
        else:
            ops.append(
                ChangeOp(REMOVE, path + (old_name,),
                         before=_describe(old_def, (old_name in old_required) if top else None),
                         before_def=old_def)
            )
    for new_name, new_def in added:
        if new_name in claimed:
            continue
        required = new_name in new_required
        ops.append(
            ChangeOp(ADD, path + (new_name,), after=_describe(new_def, required if top else None),
                     required_after=required, after_def=new_def)
        )
    return ops


def is_breaking(ops: list[ChangeOp]) -> bool:
    """Everything except adding optional properties breaks consumers."""
    return any(op.kind != ADD or op.required_after for op in ops)


# -- forward transforms --------------------------------------------------

_IDENTITY_SOURCE = "."


@dataclass(frozen=True)
class TransformStep:
    title: str
    from_version: int
    to_version: int
    program: jslt.Program

    def __post_init__(self):
        if self.to_version != self.from_version + 1:
            raise EvolutionError(
                f"transforms cover adjacent versions only: {self.from_version} -> {self.to_version}"
            )


_STEP_FILE_RE = re.compile(r"(\d+)-to-(\d+)\.jslt")


class TransformSet:
    """The registered forward transforms for one registry."""

    def __init__(self, registry: Registry):
        self.registry = registry
        self._steps: dict[tuple[str, int], TransformStep] = {}

    def register(self, step: TransformStep) -> None:
        versions = self.registry.versions(step.title)
        if step.from_version not in versions or step.to_version not in versions:
            raise EvolutionError(
                f"{step.title!r} has no version pair {step.from_version}/{step.to_version}"
            )
        self._steps[(step.title, step.from_version)] = step

    @classmethod
    def load(cls, registry: Registry, directory: str | Path) -> "TransformSet":
        """Scan <directory>/<title-slug>/<from>-to-<to>.jslt files."""
        out = cls(registry)
        root = Path(directory)
        if not root.is_dir():
            return out
        for slug_dir in sorted(p for p in root.iterdir() if p.is_dir()):
            title = slug_to_title(slug_dir.name)
            for file in sorted(slug_dir.glob("*.jslt")):
                m = _STEP_FILE_RE.fullmatch(file.name)
                if m is None:
                    raise EvolutionError(f"{file}: transform files are named <from>-to-<to>.jslt")
                try:
                    program = jslt.compile(file.read_text(encoding="utf-8"))
                except Exception as exc:
                    raise EvolutionError(f"{file}: {exc}") from None
                out.register(TransformStep(title, int(m.group(1)), int(m.group(2)), program))
        return out

    def compose_chain(self, title: str, from_version: int) -> list[TransformStep]:
        """The steps carrying events at from_version to the latest version.

        Breaking steps must have a registered transform; other steps fall
        back to the identity program.
        """
        latest = self.registry.latest_version(title)
        if from_version not in self.registry.versions(title):
            raise EvolutionError(f"{title!r} has no version {from_version}")
        chain = []
        for v in range(from_version, latest):
            step = self._steps.get((title, v))
            if step is None:
                if is_breaking(diff(self.registry, title, v, v + 1)):
                    raise MissingTransformError(
                        f"{title!r} {v} -> {v + 1} is a breaking step with no registered transform"
                    )
                step = TransformStep(title, v, v + 1, jslt.compile(_IDENTITY_SOURCE))
            chain.append(step)
        return chain

    def apply_chain(self, event, title: str, from_version: int, check_steps: bool = True):
        """Run the event through every step up to latest.

        After each step the event's `schema` property is rewritten to the
        step's target id, provided the target schema declares one.  With
        check_steps, every intermediate result is validated against its
        version and failures raise ChainValidationError.
        """
        for index, step in enumerate(self.compose_chain(title, from_version)):
            event = step.program.evaluate(event)
            target = self.registry.resolve(title, step.to_version)
            if isinstance(event, dict) and "schema" in target.properties:
                event = {**event, "schema": target.doc.id}
            if check_steps:
                mismatches = validate(self.registry, event, ValidationTarget.explicit(title, step.to_version))
                if mismatches:
                    raise ChainValidationError(
                        f"{title!r} step {step.from_version}->{step.to_version} produced an invalid event",
                        step_index=index,
                        mismatches=mismatches,
                    )
        return event

    def verify(self, title: str, seeds: int = 50) -> int:
        """Dynamic transform check: generate at each alive version, chain, validate.

        Returns the number of events pushed through; raises on the first
        failure.
        """
        count = 0
        latest = self.registry.latest_version(title)
        for version in self.registry.versions(title):
            if version == latest or self.registry.get(title, version).is_tombstone():
                continue
            for seed in range(seeds):
                event = generate_valid(self.registry, title, version, GenConfig(seed=seed))
                self.apply_chain(event, title, version)
                count += 1
        return count


# -- change impact testing ----------------------------------------------


@dataclass(frozen=True)
class ConsumerSample:
    consumer: str
    title: str
    fragment: tuple  # pairs of (dotted path or JsonPath, value)
    polarity: str = MUST_STAY_VALID

    def __post_init__(self):
        if self.polarity not in (MUST_STAY_VALID, MUST_STAY_INVALID):
            raise EvolutionError(f"unknown sample polarity {self.polarity!r}")


@dataclass(frozen=True)
class ImpactResult:
    consumer: str
    polarity: str
    passed: bool
    detail: str
    mismatches: tuple = ()

    def to_json(self) -> dict:
        out = {"consumer": self.consumer, "polarity": self.polarity,
               "result": "PASS" if self.passed else "FAIL", "detail": self.detail}
        if self.mismatches:
            out["mismatches"] = [m.to_json() for m in self.mismatches]
        return out


@dataclass(frozen=True)
class ImpactReport:
    title: str
    proposed_version: int
    results: tuple[ImpactResult, ...]

    @property
    def blocked(self) -> bool:
        return any(not r.passed for r in self.results)

    def failing_consumers(self) -> list[str]:
        return [r.consumer for r in self.results if not r.passed]


def change_impact_test(
    registry: Registry,
    title: str,
    proposal_body: dict,
    samples: list[ConsumerSample],
    cfg: GenConfig | None = None,
    kind: str | None = None,
) -> ImpactReport:
    """Decide whether a proposed next version of `title` can ship.

    Each consumer's sample fragment is embedded into an otherwise random
    valid event under the proposed schema.  A must-stay-valid sample that
    can no longer be embedded fails (and would block the change); a
    must-stay-invalid sample that becomes embeddable means the proposal
    is too loose, which also fails.
    """
    cfg = cfg or GenConfig()
    scratch = registry.clone()
    proposed_version = scratch.register_version(title, proposal_body, kind=kind)
    results = []
    for sample in samples:
        if sample.title != title:
            raise EvolutionError(
                f"sample from {sample.consumer!r} targets {sample.title!r}, not {title!r}"
            )
        sample_cfg = GenConfig(
            seed=cfg.seed,
            max_array_length=cfg.max_array_length,
            max_string_length=cfg.max_string_length,
            fragment=tuple(sample.fragment),
        )
        try:
            generate_valid(scratch, title, proposed_version, sample_cfg)
            embeddable, mismatches = True, ()
        except UnsatisfiableError as exc:
            embeddable, mismatches = False, tuple(exc.mismatches)
        if sample.polarity == MUST_STAY_VALID:
            passed = embeddable
            detail = ("sample still fits valid events" if passed
                      else "sample no longer fits any valid event")
        else:
            passed = not embeddable
            detail = ("sample is still rejected" if passed
                      else "too loose: an expected-failure sample became valid")
        results.append(ImpactResult(sample.consumer, sample.polarity, passed, detail, mismatches))
    return ImpactReport(title, proposed_version, tuple(results))


def load_samples(directory: str | Path) -> list[ConsumerSample]:
    """One JSON file per consumer sample:

    {"consumer": "...", "schema": "<title>", "polarity": "...",
     "fragment": {"<dotted path>": <value>, ...}}

    consumer defaults to the file stem, polarity to must-stay-valid.
    """
    samples = []
    root = Path(directory)
    for file in sorted(root.glob("*.json")):
        raw = parse_json(file.read_text(encoding="utf-8"))
        if not isinstance(raw, dict) or not isinstance(raw.get("fragment"), dict):
            raise EvolutionError(f"{file}: expected an object with a fragment mapping")
        unknown = set(raw) - {"consumer", "schema", "polarity", "fragment"}
        if unknown:
            raise EvolutionError(f"{file}: unknown fields {sorted(unknown)}")
        samples.append(
            ConsumerSample(
                consumer=raw.get("consumer", file.stem),
                title=raw.get("schema", ""),
                fragment=tuple((JsonPath.parse(path), value) for path, value in raw["fragment"].items()),
                polarity=raw.get("polarity", MUST_STAY_VALID),
            )
        )
    return samples
