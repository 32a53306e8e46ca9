"""Unified command line tool.

Subcommands: schema (load/show/tombstone/tag), validate, generate,
diff, transform, impact-test, jslt, dqt, serve.  Primary output goes to
stdout as NDJSON; diagnostics go to stderr as NDJSON.  Exit code 0 means
success, 1 means the command ran but found failures (invalid events,
blocked proposal), 2 means bad usage or broken inputs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import dqt, jslt, jsonmodel
from .errors import JsltError, RegistryError, SemSchemaError
from .evolution import TransformSet, change_impact_test, diff, is_breaking, load_samples
from .generator import GenConfig, generate_valid
from .registry import load_repo, parse_id, write_releases, write_version
from .validator import ValidationTarget, validate


def _out(value) -> None:
    sys.stdout.write(jsonmodel.dumps(value) + "\n")


def _diag(value) -> None:
    sys.stderr.write(jsonmodel.dumps(value) + "\n")


def _parse_schema_ref(ref: str) -> tuple[str, int | None]:
    """"Title" -> (Title, None); "Title@3" -> (Title, 3)."""
    title, sep, version = ref.partition("@")
    if not sep:
        return title, None
    if not version.isdigit():
        raise SemSchemaError(f"bad version in schema reference {ref!r}")
    return title, int(version)


def _open_events(path: str):
    if path == "-":
        return sys.stdin
    return open(path, encoding="utf-8")


# -- schema ---------------------------------------------------------------


def cmd_schema_load(args) -> int:
    registry = load_repo(args.directory)
    for title in sorted(registry.titles()):
        _out(
            {
                "title": title,
                "kind": registry.kind_of(title),
                "versions": registry.versions(title),
                "latest": registry.latest_version(title),
                "tombstoned": registry.get(title).is_tombstone(),
            }
        )
    if registry.releases:
        _out({"release": registry.releases[-1].version_string})
    return 0


def cmd_schema_show(args) -> int:
    registry = load_repo(args.repo)
    title, version = _parse_schema_ref(args.schema)
    if args.resolved:
        resolved = registry.resolve(title, version)
        sys.stdout.write(
            jsonmodel.dumps(
                {
                    "id": resolved.doc.id,
                    "title": title,
                    "kind": registry.kind_of(title),
                    "required": list(resolved.required),
                    "overrides": list(resolved.overrides),
                    "properties": {name: p.to_json() for name, p in resolved.properties.items()},
                },
                indent=2,
            )
            + "\n"
        )
    else:
        doc = registry.get(title, version)
        sys.stdout.write(jsonmodel.dumps(doc.body(), indent=2) + "\n")
    return 0


def cmd_schema_tombstone(args) -> int:
    registry = load_repo(args.repo)
    version = registry.tombstone(args.title)
    path = write_version(args.repo, registry.get(args.title, version))
    _out({"title": args.title, "version": version, "file": str(path)})
    return 0


def cmd_schema_tag(args) -> int:
    registry = load_repo(args.repo)
    tag = registry.tag_release(breaking_since_last=args.breaking, major_override=args.major)
    path = write_releases(args.repo, registry.releases)
    _out({"release": tag.version_string, "file": str(path)})
    return 0


# -- events ---------------------------------------------------------------


def _latest_target(registry, event) -> ValidationTarget:
    """Force the latest version of the event's own declared schema.

    Events whose declaration is missing or unknown fall back to
    self-declared mode, which reports the problem as a mismatch instead
    of crashing the run.
    """
    declared = event.get("schema") if isinstance(event, dict) else None
    if isinstance(declared, str):
        try:
            _, title, _ = parse_id(declared)
        except RegistryError:
            return ValidationTarget.self_declared()
        if title in registry.titles():
            return ValidationTarget.latest(title)
    return ValidationTarget.self_declared()


def cmd_validate(args) -> int:
    registry = load_repo(args.repo)
    fixed_target = None
    if args.schema:
        title, version = _parse_schema_ref(args.schema)
        if version is None:
            fixed_target = ValidationTarget.latest(title)
        else:
            fixed_target = ValidationTarget.explicit(title, version)
        registry.get(title, version)  # fail fast on unknown schema
    failures = 0
    with _open_events(args.events) as stream:
        for lineno, event, error in jsonmodel.iter_ndjson(stream):
            if error is not None:
                failures += 1
                _diag({"line": lineno, "error": str(error)})
                continue
            if fixed_target is not None:
                target = fixed_target
            elif args.latest:
                target = _latest_target(registry, event)
            else:
                target = ValidationTarget.self_declared()
            mismatches = validate(registry, event, target)
            if mismatches:
                failures += 1
                for mismatch in mismatches:
                    _diag({"line": lineno, **mismatch.to_json()})
    return 1 if failures else 0


def cmd_generate(args) -> int:
    registry = load_repo(args.repo)
    title, version = _parse_schema_ref(args.schema)
    for offset in range(args.count):
        cfg = GenConfig(seed=args.seed + offset)
        _out(generate_valid(registry, title, version, cfg))
    return 0


def cmd_diff(args) -> int:
    registry = load_repo(args.repo)
    ops = diff(registry, args.title, args.version_a, args.version_b)
    for op in ops:
        _out(op.to_json())
    _out({"breaking": is_breaking(ops)})
    return 0


def cmd_transform(args) -> int:
    registry = load_repo(args.repo)
    transforms = TransformSet.load(registry, Path(args.repo) / "transforms")
    failures = 0
    with _open_events(args.events) as stream:
        for lineno, event, error in jsonmodel.iter_ndjson(stream):
            if error is not None:
                failures += 1
                _diag({"line": lineno, "error": str(error)})
                continue
            declared = event.get("schema") if isinstance(event, dict) else None
            if not isinstance(declared, str):
                failures += 1
                _diag({"line": lineno, "error": "event carries no schema declaration"})
                continue
            try:
                _, title, version = parse_id(declared)
                transformed = transforms.apply_chain(event, title, version)
            except SemSchemaError as exc:
                failures += 1
                _diag({"line": lineno, "error": str(exc)})
                continue
            _out(transformed)
    return 1 if failures else 0


def cmd_impact_test(args) -> int:
    registry = load_repo(args.repo)
    proposal = jsonmodel.parse_json(Path(args.proposal).read_text(encoding="utf-8"))
    if not isinstance(proposal, dict) or not isinstance(proposal.get("title"), str):
        raise SemSchemaError("proposal file must be a schema document with a title")
    title = proposal["title"]
    kind = registry.kind_of(title) if title in registry.titles() else "event"
    samples = [s for s in load_samples(args.samples) if s.title == title]
    if not samples:
        raise SemSchemaError(f"no samples for {title!r} in {args.samples}")
    report = change_impact_test(
        registry, title, proposal, samples, cfg=GenConfig(seed=args.seed), kind=kind
    )
    for result in report.results:
        _out(result.to_json())
    _out({"title": report.title, "proposed_version": report.proposed_version, "blocked": report.blocked})
    return 1 if report.blocked else 0


def cmd_jslt_run(args) -> int:
    program = jslt.compile(Path(args.program).read_text(encoding="utf-8"))
    failures = 0
    with _open_events(args.input) as stream:
        for lineno, value, error in jsonmodel.iter_ndjson(stream):
            if error is not None:
                failures += 1
                _diag({"line": lineno, "error": str(error)})
                continue
            try:
                _out(program.evaluate(value))
            except JsltError as exc:
                failures += 1
                _diag({"line": lineno, "error": str(exc)})
    return 1 if failures else 0


def cmd_dqt_run(args) -> int:
    modules = dqt.load_modules(args.modules)
    sampler = dqt.SamplerConfig(rate=args.rate, strategy=args.strategy, seed=args.seed)
    registry = load_repo(args.repo) if args.repo else None
    if args.sink == "stdout":
        sink = dqt.NdjsonSink(sys.stdout)
        close = None
    else:
        handle = open(args.sink, "w", encoding="utf-8")
        sink = dqt.NdjsonSink(handle)
        close = handle
    try:
        with _open_events(args.events) as stream:
            summary = dqt.run_stream(
                modules,
                dqt.events_from_ndjson(stream),
                sampler=sampler,
                sink=sink,
                registry=registry,
                window=args.window,
            )
    finally:
        if close is not None:
            close.close()
    _diag(summary.to_json())
    return 0


def cmd_serve(args) -> int:
    from .server import ServerConfig, serve

    cfg = ServerConfig(
        directory=args.repo, host=args.host, port=args.port, read_only=not args.writable
    )
    serve(cfg)
    return 0


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semschema", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    schema = sub.add_parser("schema", help="inspect and update a schema repository")
    schema_sub = schema.add_subparsers(dest="schema_command", required=True)

    load = schema_sub.add_parser("load", help="load a repository and list its schemas")
    load.add_argument("directory")
    load.set_defaults(handler=cmd_schema_load)

    show = schema_sub.add_parser("show", help="print one schema version")
    show.add_argument("schema", metavar="title[@version]")
    show.add_argument("--repo", required=True)
    show.add_argument("--resolved", action="store_true", help="print the inherited view")
    show.set_defaults(handler=cmd_schema_show)

    tombstone = schema_sub.add_parser("tombstone", help="retire a schema")
    tombstone.add_argument("title")
    tombstone.add_argument("--repo", required=True)
    tombstone.set_defaults(handler=cmd_schema_tombstone)

    tag = schema_sub.add_parser("tag", help="cut a release tag")
    tag.add_argument("--repo", required=True)
    tag.add_argument("--breaking", action="store_true", help="breaking change since last tag")
    tag.add_argument("--major", action="store_true", help="major platform revision")
    tag.set_defaults(handler=cmd_schema_tag)

    val = sub.add_parser("validate", help="validate NDJSON events")
    val.add_argument("events", metavar="events.ndjson")
    val.add_argument("--repo", required=True)
    target = val.add_mutually_exclusive_group()
    target.add_argument("--schema", metavar="title[@version]", help="validate against this schema")
    target.add_argument("--latest", action="store_true", help="force each event's schema to latest")
    target.add_argument("--self", action="store_true", dest="self_mode",
                        help="use each event's declared schema (default)")
    val.set_defaults(handler=cmd_validate)

    gen = sub.add_parser("generate", help="generate random valid events")
    gen.add_argument("--repo", required=True)
    gen.add_argument("--schema", metavar="title[@version]", required=True)
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(handler=cmd_generate)

    dif = sub.add_parser("diff", help="list change operations between two versions")
    dif.add_argument("title")
    dif.add_argument("version_a", type=int)
    dif.add_argument("version_b", type=int)
    dif.add_argument("--repo", required=True)
    dif.set_defaults(handler=cmd_diff)

    tra = sub.add_parser("transform", help="bring NDJSON events to the latest schema version")
    tra.add_argument("events", metavar="events.ndjson")
    tra.add_argument("--repo", required=True)
    tra.add_argument("--to-latest", action="store_true", help="accepted for clarity; the default")
    tra.set_defaults(handler=cmd_transform)

    imp = sub.add_parser("impact-test", help="test a schema proposal against consumer samples")
    imp.add_argument("--repo", required=True)
    imp.add_argument("--proposal", required=True, help="proposed schema document (JSON)")
    imp.add_argument("--samples", required=True, help="directory of consumer sample files")
    imp.add_argument("--seed", type=int, default=0)
    imp.set_defaults(handler=cmd_impact_test)

    jsl = sub.add_parser("jslt", help="run transformation programs")
    jslt_sub = jsl.add_subparsers(dest="jslt_command", required=True)
    run = jslt_sub.add_parser("run", help="apply a program to NDJSON input")
    run.add_argument("program", metavar="program-file")
    run.add_argument("--input", default="-", help="NDJSON file or - for stdin")
    run.set_defaults(handler=cmd_jslt_run)

    dq = sub.add_parser("dqt", help="streaming data-quality checks")
    dqt_sub = dq.add_subparsers(dest="dqt_command", required=True)
    dqrun = dqt_sub.add_parser("run", help="run check modules over an event stream")
    dqrun.add_argument("--modules", required=True, help="directory of check module files")
    dqrun.add_argument("--rate", type=float, default=0.01)
    dqrun.add_argument("--strategy", choices=("hash", "random"), default="hash")
    dqrun.add_argument("--seed", type=int, default=0)
    dqrun.add_argument("--events", default="-", help="NDJSON file or - for stdin")
    dqrun.add_argument("--sink", default="stdout", help="metric output file or stdout")
    dqrun.add_argument("--repo", help="also validate sampled events against this repository")
    dqrun.add_argument("--window", help="window label stamped on metric lines")
    dqrun.set_defaults(handler=cmd_dqt_run)

    srv = sub.add_parser("serve", help="serve the schema repository over HTTP")
    srv.add_argument("--repo", required=True)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8080)
    srv.add_argument("--writable", action="store_true", help="allow POST /reload")
    srv.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except SemSchemaError as exc:
        _diag({"error": str(exc)})
        return 2
    except OSError as exc:
        _diag({"error": str(exc)})
        return 2
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    raise SystemExit(main())
