"""Regenerate the bundled example schema repository and check modules.

Everything under src/semschema/fixtures/ is produced by this script, by
driving the public registry API. Rerun it after changing the matrix
below; it verifies the result (load round-trip, transform chains,
generator/validator agreement, breaking-version share) before leaving
files behind.
"""

from __future__ import annotations

import shutil
import sys
from datetime import datetime, timezone
from pathlib import Path

from semschema import jsonmodel
from semschema.evolution import ADD, TransformSet, diff, is_breaking
from semschema.generator import GenConfig, generate_valid
from semschema.registry import Registry, load_repo, make_id, title_to_slug, write_releases, write_version
from semschema.validator import ValidationTarget, validate

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "semschema" / "fixtures"
REPO = FIXTURES / "repo"
CHECKS = FIXTURES / "checks"


def ref(title: str) -> dict:
    return {"$ref": title}


def string(pattern: str | None = None, description: str | None = None) -> dict:
    out: dict = {"type": "string"}
    if pattern:
        out["pattern"] = pattern
    if description:
        out["description"] = description
    return out


def number(description: str | None = None) -> dict:
    out: dict = {"type": "number"}
    if description:
        out["description"] = description
    return out


def enum(*values: str) -> dict:
    return {"enum": list(values)}


def compound(children: dict) -> dict:
    return {"type": "object", "properties": children}


EVENT = "event"
OBJECT = "object"

BASE_EVENT_0 = {
    "description": "Envelope shared by every tracking event.",
    "properties": {
        "schema": string(
            r"^https://schema\.example\.com/schemas/[^/]+/[^/]+/[0-9]+$",
            "Id of the schema this event claims to comply to",
        ),
        "@id": string(r"^[0-9a-f]{8}-[0-9a-f]{4}-4[0-9a-f]{3}-[89ab][0-9a-f]{3}-[0-9a-f]{12}$"),
        "@type": string(description="Name of the activity, e.g. View or Send"),
        "actor": compound(
            {
                "@type": enum("Person", "Cookie", "System"),
                "spt:userId": string(r"^sdrn:[^:]+:user:[0-9]+$", "Logged-in user identity"),
            }
        ),
        "object": ref("Base Object"),
        "intent": string(),
        "target": ref("Base Object"),
        "published": string(
            r"^[0-9]{4}-[0-9]{2}-[0-9]{2}T[0-9]{2}:[0-9]{2}:[0-9]{2}(Z|[+-][0-9]{2}:[0-9]{2})$",
            "Client-side time of the action",
        ),
    },
    "required": ["schema", "@id", "@type", "actor", "published"],
}

BASE_EVENT_1 = {
    "description": "Envelope shared by every tracking event.",
    "properties": {
        **BASE_EVENT_0["properties"],
        "provider": ref("Provider"),
        "tracker": ref("Tracker"),
    },
    "required": BASE_EVENT_0["required"],
}

BASE_EVENT_2 = {
    "description": "Envelope shared by every tracking event.",
    "properties": {
        **BASE_EVENT_1["properties"],
        "published": string(
            r"^[0-9]{4}-[0-9]{2}-[0-9]{2}T[0-9]{2}:[0-9]{2}:[0-9]{2}(\.[0-9]+)?(Z|[+-][0-9]{2}:?[0-9]{2})$",
            "Client-side time of the action; fractional seconds allowed",
        ),
    },
    "required": BASE_EVENT_1["required"],
}


def parent(title: str, version: int, kind: str = EVENT) -> str:
    return make_id(kind, title, version)


# (title, kind, body) in registration order; refs and parents must already exist.
SCHEMAS: list[tuple[str, str, dict]] = [
    ("Base Object", OBJECT, {
        "description": "Anything an actor can act on.",
        "properties": {"@id": string(), "@type": string()},
    }),
    ("Provider", OBJECT, {
        "allOf": parent("Base Object", 0, OBJECT),
        "properties": {
            "@id": string(r"^sdrn:[^:]+:provider:[^:]+$", "Tenant identity"),
            "name": string(),
        },
        "required": ["@id"],
    }),
    ("Tracker", OBJECT, {
        "properties": {
            "type": enum("ios", "android", "web"),
            "version": string(r"^[0-9]+\.[0-9]+$"),
        },
        "required": ["type"],
    }),
    ("ClassifiedAd", OBJECT, {
        "allOf": parent("Base Object", 0, OBJECT),
        "properties": {
            "category": string(description="Listing category, free form"),
            "price": compound({
                "amount": number("Asking price in minor units"),
                "currency": string(r"^[A-Z]{3}$"),
            }),
        },
    }),
    ("Message", OBJECT, {
        "allOf": parent("Base Object", 0, OBJECT),
        "properties": {"threadId": string()},
    }),
    ("SearchQuery", OBJECT, {
        "properties": {"queryString": string(), "numResults": number()},
    }),
    ("Vehicle", OBJECT, {
        "properties": {"make": string(), "model": string(), "year": number()},
    }),
    ("Base Event", EVENT, BASE_EVENT_0),
    ("View Item", EVENT, {
        "description": "An actor looked at a classified ad.",
        "allOf": parent("Base Event", 0),
        "properties": {"object": ref("ClassifiedAd"), "origin": string()},
        "required": ["object"],
    }),
    ("Send Message", EVENT, {
        "allOf": parent("Base Event", 0),
        "properties": {
            "object": ref("Message"),
            "messageKind": enum("text", "image", "offer"),
        },
        "required": ["object"],
    }),
    ("Post Item", EVENT, {
        "allOf": parent("Base Event", 0),
        "properties": {"object": ref("ClassifiedAd"), "source": string()},
        "required": ["object"],
    }),
    ("Save Item", EVENT, {
        "allOf": parent("Base Event", 0),
        "properties": {"object": ref("ClassifiedAd")},
        "required": ["object"],
    }),
    ("Search Listing", EVENT, {
        "allOf": parent("Base Event", 0),
        "properties": {"object": ref("SearchQuery"), "filterCount": number()},
        "required": ["object"],
    }),
    ("Share Item", EVENT, {
        "allOf": parent("Base Event", 0),
        "properties": {
            "object": ref("ClassifiedAd"),
            "channel": enum("email", "sms", "social"),
        },
        "required": ["object"],
    }),
    # second versions
    ("Base Object", OBJECT, {
        "description": "Anything an actor can act on.",
        "properties": {"@id": string(), "@type": string(), "url": string()},
    }),
    ("Provider", OBJECT, {
        "allOf": parent("Base Object", 0, OBJECT),
        "properties": {
            "@id": string(r"^sdrn:[^:]+:provider:[^:]+$", "Tenant identity"),
            "displayName": string(),
        },
        "required": ["@id"],
    }),
    ("Tracker", OBJECT, {
        "properties": {
            "type": enum("ios", "android", "web"),
            "version": string(r"^[0-9]+(\.[0-9]+)*$"),
        },
        "required": ["type"],
    }),
    ("ClassifiedAd", OBJECT, {
        "allOf": parent("Base Object", 0, OBJECT),
        "properties": {
            "category": string(description="Listing category, free form"),
            "price": compound({
                "amount": number("Asking price in minor units"),
                "currency": string(r"^[A-Za-z]{3}$"),
            }),
        },
    }),
    ("Message", OBJECT, {
        "allOf": parent("Base Object", 0, OBJECT),
        "properties": {"threadId": string()},
        "required": ["threadId"],
    }),
    ("SearchQuery", OBJECT, {
        "properties": {"queryString": string(), "resultCount": number()},
    }),
    ("Vehicle", OBJECT, {
        "properties": {"make": string(), "model": string()},
    }),
    ("Base Event", EVENT, BASE_EVENT_1),
    ("View Item", EVENT, {
        "description": "An actor looked at a classified ad.",
        "allOf": parent("Base Event", 0),
        "properties": {"object": ref("ClassifiedAd"), "referrer": string()},
        "required": ["object"],
    }),
    ("Send Message", EVENT, {
        "allOf": parent("Base Event", 1),
        "properties": {
            "object": ref("Message"),
            "messageKind": enum("text", "image", "offer"),
        },
        "required": ["object"],
    }),
    ("Post Item", EVENT, {
        "allOf": parent("Base Event", 0),
        "properties": {"object": ref("ClassifiedAd"), "source": enum("web", "app")},
        "required": ["object"],
    }),
    ("Save Item", EVENT, {
        "allOf": parent("Base Event", 0),
        "properties": {"object": ref("ClassifiedAd"), "folder": string()},
        "required": ["object"],
    }),
    ("Search Listing", EVENT, {
        "allOf": parent("Base Event", 0),
        "properties": {"object": ref("SearchQuery"), "filtersApplied": number()},
        "required": ["object"],
    }),
    ("Share Item", EVENT, {
        "allOf": parent("Base Event", 0),
        "properties": {
            "object": ref("ClassifiedAd"),
            "channel": enum("email", "sms", "social"),
            "shortUrl": string(r"^https://s\.example\.com/[A-Za-z0-9]+$"),
        },
        "required": ["object"],
    }),
    # third versions
    ("Base Object", OBJECT, {
        "description": "Anything an actor can act on.",
        "properties": {
            "@id": string(),
            "@type": string(),
            "url": string(r"^https?://", "Canonical web location"),
        },
    }),
    ("Provider", OBJECT, {
        "allOf": parent("Base Object", 0, OBJECT),
        "properties": {
            "@id": string(r"^sdrn:[^:]+:provider:[^:]+$", "Tenant identity"),
            "displayName": string(),
            "country": string(r"^[A-Z]{2}$", "ISO 3166-1 alpha-2"),
        },
        "required": ["@id"],
    }),
    ("Tracker", OBJECT, {
        "properties": {
            "type": enum("ios", "android", "web", "server"),
            "version": string(r"^[0-9]+(\.[0-9]+)*$"),
        },
        "required": ["type"],
    }),
    ("ClassifiedAd", OBJECT, {
        "allOf": parent("Base Object", 0, OBJECT),
        "properties": {
            "vertical": string(description="Listing vertical, free form"),
            "price": compound({
                "amount": number("Asking price in minor units"),
                "currency": string(r"^[A-Za-z]{3}$"),
            }),
        },
    }),
    ("Message", OBJECT, {
        "allOf": parent("Base Object", 0, OBJECT),
        "properties": {"threadId": string(), "subject": string()},
        "required": ["threadId"],
    }),
    ("SearchQuery", OBJECT, {
        "properties": {"resultCount": number()},
    }),
    ("Vehicle", OBJECT, {
        "properties": {"make": string(), "modelName": string()},
    }),
    ("Base Event", EVENT, BASE_EVENT_2),
    ("View Item", EVENT, {
        "description": "An actor looked at a classified ad.",
        "allOf": parent("Base Event", 0),
        "properties": {
            "object": ref("ClassifiedAd"),
            "referrer": string(),
            "position": number("Index in the listing the ad was clicked from"),
        },
        "required": ["object"],
    }),
    ("Send Message", EVENT, {
        "allOf": parent("Base Event", 1),
        "properties": {"object": ref("Message")},
        "required": ["object"],
    }),
    ("Post Item", EVENT, {
        "allOf": parent("Base Event", 0),
        "properties": {
            "object": ref("ClassifiedAd"),
            "source": enum("web", "app"),
            "category": string(),
        },
        "required": ["object"],
    }),
    ("Save Item", EVENT, {
        "allOf": parent("Base Event", 0),
        "properties": {
            "object": ref("ClassifiedAd"),
            "folder": string(),
            "saveType": enum("favorite", "watchlist"),
        },
        "required": ["object", "saveType"],
    }),
    ("Search Listing", EVENT, {
        "allOf": parent("Base Event", 0),
        "properties": {"object": ref("SearchQuery")},
        "required": ["object"],
    }),
    ("Share Item", EVENT, {"properties": {}}),
]

# forward transforms, one file per breaking step
TRANSFORMS: dict[tuple[str, int], str] = {
    ("Base Event", 1): ".\n",
    ("View Item", 0): '{"referrer": .origin, * - origin : .}\n',
    ("Send Message", 1): "{* - messageKind : .}\n",
    ("Post Item", 0): (
        '{"source": if (.source == "web" or .source == "app") .source\n'
        '          else if (.source) "web"\n'
        "          else null,\n"
        " * - source : .}\n"
    ),
    ("Save Item", 1): '{"saveType": "favorite", * : .}\n',
    ("Search Listing", 0): '{"filtersApplied": .filterCount, * - filterCount : .}\n',
    ("Search Listing", 1): "{* - filtersApplied : .}\n",
    ("Share Item", 1): "{}\n",
    ("Base Object", 1): (
        '{"url": if (.url) (if (test(.url, "^https?://")) .url else "https://" + .url)\n'
        "         else null,\n"
        " * - url : .}\n"
    ),
    ("ClassifiedAd", 0): ".\n",
    ("ClassifiedAd", 1): '{"vertical": .category, * - category : .}\n',
    ("Message", 0): '{"threadId": if (.threadId) .threadId else "thread:unknown", * : .}\n',
    ("SearchQuery", 0): '{"resultCount": .numResults, * - numResults : .}\n',
    ("SearchQuery", 1): "{* - queryString : .}\n",
    ("Vehicle", 0): "{* - year : .}\n",
    ("Vehicle", 1): '{"modelName": .model, * - model : .}\n',
    ("Provider", 0): '{"displayName": .name, * - name : .}\n',
    ("Tracker", 0): ".\n",
    ("Tracker", 1): ".\n",
}

CHECK_MODULES: dict[str, dict] = {
    "insights": {
        "user_id_format": {
            "description": "Actor user id must use the sdrn user form",
            "solutionUrl": "https://wiki.example.com/data-quality/user-id-format",
            "filter": '.actor."spt:userId"',
            "check": 'test(.actor."spt:userId", "^sdrn:[^:]+:user:")',
        },
    },
    "marketplace": {
        "price_range": {
            "description": "Ad prices are never negative",
            "solutionUrl": "https://wiki.example.com/data-quality/price-range",
            "filter": ".object.price.amount",
            "check": ".object.price.amount >= 0",
        },
        "published_parses": {
            "description": "published must be a parseable RFC 3339 instant",
            "solutionUrl": "https://wiki.example.com/data-quality/published-format",
            "filter": ".published",
            "check": "parse-time(.published, \"yyyy-MM-dd'T'HH:mm:ssX\", null) != null",
        },
    },
}


def tag_after(registry: Registry, stage: int, **flags) -> None:
    stamp = datetime(2026, 3, 10 + stage, 12, 0, 0, tzinfo=timezone.utc)
    registry.tag_release(now=stamp, **flags)


def build() -> Registry:
    registry = Registry()
    titles_done: set[str] = set()
    count = 0
    for title, kind, body in SCHEMAS:
        registry.register_version(title, dict(body), kind=kind if title not in titles_done else None)
        titles_done.add(title)
        count += 1
        if count == 14:
            tag_after(registry, 0, major_override=True)  # 1.0.0 once every v0 exists
        elif count == 28:
            tag_after(registry, 1, breaking_since_last=True)  # 1.1.0 after the v1 wave
        elif count == 42:
            tag_after(registry, 2, breaking_since_last=True)  # 1.2.0 after the v2 wave
    return registry


def write(registry: Registry) -> None:
    if REPO.exists():
        shutil.rmtree(REPO)
    if CHECKS.exists():
        shutil.rmtree(CHECKS)
    for title in registry.titles():
        for version in registry.versions(title):
            write_version(REPO, registry.get(title, version))
    write_releases(REPO, registry.releases)
    for (title, from_version), source in TRANSFORMS.items():
        target = REPO / "transforms" / title_to_slug(title) / f"{from_version}-to-{from_version + 1}.jslt"
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(source, encoding="utf-8")
    CHECKS.mkdir(parents=True)
    for stem, module in CHECK_MODULES.items():
        (CHECKS / f"{stem}.json").write_text(
            jsonmodel.dumps(module, indent=2) + "\n", encoding="utf-8"
        )


def verify() -> None:
    registry = load_repo(REPO)
    titles = registry.titles()
    assert len(titles) == 14, titles
    transforms = TransformSet.load(registry, REPO / "transforms")

    bumps = 0
    with_non_add = 0
    for title in sorted(titles):
        versions = registry.versions(title)
        assert versions == [0, 1, 2], (title, versions)
        for from_version in (0, 1):
            ops = diff(registry, title, from_version, from_version + 1)
            bumps += 1
            if any(op.kind != ADD for op in ops):
                with_non_add += 1
            if is_breaking(ops):
                assert (title, from_version) in TRANSFORMS, (title, from_version)
            else:
                assert (title, from_version) not in TRANSFORMS, (title, from_version)
        converted = transforms.verify(title, seeds=5)
        alive_history = [
            v for v in versions[:-1] if not registry.get(title, v).is_tombstone()
        ]
        assert converted == 5 * len(alive_history), (title, converted)
    share = with_non_add / bumps
    assert abs(share - 0.64) < 0.01, (with_non_add, bumps, share)

    for title in sorted(titles):
        for version in registry.versions(title):
            if registry.get(title, version).is_tombstone():
                continue
            event = generate_valid(registry, title, version, GenConfig(seed=11))
            mismatches = validate(registry, event, ValidationTarget.explicit(title, version))
            assert not mismatches, (title, version, [str(m) for m in mismatches])

    print(f"{len(titles)} titles, {bumps} bumps, {with_non_add} with non-add ops ({share:.1%})")
    print(f"{len(list(REPO.rglob('*.json')))} json files, "
          f"{len(list(REPO.rglob('*.jslt')))} transform files")


if __name__ == "__main__":
    write(build())
    verify()
    print("fixtures rebuilt", file=sys.stderr)
