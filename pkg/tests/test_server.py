import json
import shutil
import threading
import urllib.error
import urllib.request

import pytest

from semschema.generator import GenConfig, generate_valid
from semschema.registry import load_repo, make_id, write_version
from semschema.server import ServerConfig, make_server, parse_target
from semschema.validator import ValidationTarget


@pytest.fixture(scope="module")
def server(repo_dir):
    httpd = make_server(ServerConfig(str(repo_dir), port=0))
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield httpd
    httpd.shutdown()
    httpd.server_close()


@pytest.fixture()
def writable_server(repo_dir, tmp_path):
    scratch = tmp_path / "repo"
    shutil.copytree(repo_dir, scratch)
    httpd = make_server(ServerConfig(str(scratch), port=0, read_only=False))
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield httpd, scratch
    httpd.shutdown()
    httpd.server_close()


def request(httpd, method, path, body=None):
    port = httpd.server_address[1]
    data = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(
        f"http://127.0.0.1:{port}{path}", data=data, method=method,
        headers={"Content-Type": "application/json"},
    )
    try:
        with urllib.request.urlopen(req, timeout=5) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read()


def request_json(httpd, method, path, body=None):
    status, payload = request(httpd, method, path, body)
    return status, json.loads(payload)


class TestParseTarget:
    def test_modes(self):
        assert parse_target(None) == ValidationTarget.self_declared()
        assert parse_target("View Item") == ValidationTarget.latest("View Item")
        assert parse_target("View Item@1") == ValidationTarget.explicit("View Item", 1)

    def test_rejects_junk(self):
        for raw in ("", 7, "View Item@x", "View Item@"):
            with pytest.raises(ValueError):
                parse_target(raw)


class TestGet:
    def test_health(self, server):
        status, body = request_json(server, "GET", "/health")
        assert status == 200
        assert body == {"status": "ok", "titles": 14}

    def test_schema_bytes_identical_to_disk(self, server, repo_dir):
        status, payload = request(server, "GET", "/schemas/event/View-Item/1")
        assert status == 200
        assert payload == (repo_dir / "event" / "View-Item" / "1.json").read_bytes()

    def test_latest_alias(self, server, repo_dir):
        status, payload = request(server, "GET", "/schemas/object/Provider/latest")
        assert status == 200
        assert payload == (repo_dir / "object" / "Provider" / "2.json").read_bytes()

    def test_served_document_declares_its_own_url_path(self, server):
        _, payload = request(server, "GET", "/schemas/event/Base-Event/0")
        doc = json.loads(payload)
        assert doc["id"].endswith("/schemas/event/Base-Event/0")

    def test_unknown_paths_404(self, server):
        for path in (
            "/schemas/event/No-Such/0",
            "/schemas/event/View-Item/9",
            "/schemas/widget/View-Item/0",
            "/schemas/object/View-Item/0",  # right title, wrong kind
            "/nope",
        ):
            status, body = request_json(server, "GET", path)
            assert status == 404, path
            assert "error" in body


class TestValidate:
    def test_valid_event(self, server, registry):
        event = generate_valid(registry, "View Item", 2, GenConfig(seed=4))
        status, body = request_json(server, "POST", "/validate", {"event": event})
        assert (status, body) == (200, {"valid": True, "mismatches": []})

    def test_mismatches_reported(self, server, registry):
        event = generate_valid(registry, "View Item", 2, GenConfig(seed=4))
        event["stray"] = 1
        status, body = request_json(server, "POST", "/validate", {"event": event})
        assert status == 200 and body["valid"] is False
        assert body["mismatches"][0]["path"] == ".stray"

    def test_explicit_target(self, server, registry):
        event = generate_valid(registry, "View Item", 2, GenConfig(seed=4))
        status, body = request_json(
            server, "POST", "/validate", {"event": event, "target": "View Item@2"}
        )
        assert status == 200 and body["valid"] is True

    def test_unknown_target_404(self, server):
        status, body = request_json(
            server, "POST", "/validate", {"event": {}, "target": "No Such"}
        )
        assert status == 404

    def test_malformed_body_400(self, server):
        status, _ = request_json(server, "POST", "/validate", {"target": "View Item"})
        assert status == 400
        port = server.server_address[1]
        req = urllib.request.Request(
            f"http://127.0.0.1:{port}/validate", data=b"{not json", method="POST"
        )
        try:
            with urllib.request.urlopen(req, timeout=5) as resp:
                status = resp.status
        except urllib.error.HTTPError as exc:
            status = exc.code
        assert status == 400


class TestTransform:
    def test_old_event_comes_back_at_latest(self, server, registry):
        event = generate_valid(registry, "View Item", 0, GenConfig(seed=6))
        status, body = request_json(server, "POST", "/transform", event)
        assert status == 200
        assert body["schema"] == make_id("event", "View Item", 2)
        assert "origin" not in body

    def test_event_already_at_latest_passes_through(self, server, registry):
        event = generate_valid(registry, "Post Item", 2, GenConfig(seed=6))
        status, body = request_json(server, "POST", "/transform", event)
        assert status == 200 and body == event

    def test_missing_declaration_400(self, server):
        status, body = request_json(server, "POST", "/transform", {"x": 1})
        assert status == 400 and "schema" in body["error"]

    def test_unknown_title_404(self, server):
        event = {"schema": make_id("event", "No Such", 0)}
        status, _ = request_json(server, "POST", "/transform", event)
        assert status == 404


class TestReload:
    def test_read_only_409(self, server):
        status, body = request_json(server, "POST", "/reload", {})
        assert status == 409 and "read-only" in body["error"]

    def test_reload_picks_up_new_version(self, writable_server):
        httpd, scratch = writable_server
        status, _ = request_json(httpd, "GET", "/schemas/object/Vehicle/3")
        assert status == 404
        registry = load_repo(scratch)
        body = registry.get("Vehicle", 2).body()
        del body["id"]
        body["properties"]["color"] = {"type": "string"}
        registry.register_version("Vehicle", body)
        write_version(scratch, registry.get("Vehicle", 3))

        # not visible until the snapshot is swapped
        status, _ = request_json(httpd, "GET", "/schemas/object/Vehicle/3")
        assert status == 404
        status, reloaded = request_json(httpd, "POST", "/reload", {})
        assert (status, reloaded["reloaded"]) == (200, True)
        status, payload = request(httpd, "GET", "/schemas/object/Vehicle/3")
        assert status == 200
        assert json.loads(payload)["id"] == make_id("object", "Vehicle", 3)
