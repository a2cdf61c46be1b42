#!/usr/bin/env python3
"""
Test script to verify the command-line surface and the manifest sinks
"""

import asyncio
import dataclasses
import io
import json
import os
import tempfile
from pathlib import Path

WORKSPACE = Path(tempfile.mkdtemp(prefix="sporadic_test_"))
os.environ["SPORADIC_DATABASE_URL"] = f"sqlite+aiosqlite:///{WORKSPACE / 'runs.db'}"
os.environ["SPORADIC_MANIFEST_DIRECTORY"] = str(WORKSPACE / "manifests")

from main import run_cli  # noqa: E402
from src.actions import ManifestDispatcher, ManifestFileLogger, ManifestSink  # noqa: E402
from src.catalog import catalog_checksum, catalog_get  # noqa: E402
from src.config import Settings, get_settings, load_config, save_config  # noqa: E402
from src.database import Database  # noqa: E402
from src.verifier import KNOWN_DIAGONALS, CatalogVerifier, CheckState  # noqa: E402


def cli(*argv):
    out = io.StringIO()
    code = run_cli(list(argv), out=out)
    return code, out.getvalue().strip()


def cli_json(*argv):
    code, text = cli(*argv)
    return code, json.loads(text)


def test_terms():
    print("\n1. Testing terms command...")

    code, payload = cli_json("terms", "D", "3", "--rep", "all")
    assert code == 0
    assert payload["terms"] == ["1", "3", "19", "147"]
    assert payload["agreement"] is True
    assert payload["representations"]["ct:D"] == payload["terms"]
    print(f"✓ D agrees across {len(payload['representations'])} representations")

    code, payload = cli_json("terms", "A", "0")
    assert code == 0 and payload["terms"] == ["1"]

    _, ct = cli_json("terms", "eta", "5", "--rep", "ct")
    _, rec = cli_json("terms", "eta", "5")
    assert ct["terms"] == rec["terms"]
    print(f"✓ eta constant terms: {ct['terms']}")

    code, payload = cli_json("terms", "nope", "3")
    assert code == 2 and payload["type"] == "UnknownSequenceError"
    print("✓ Unknown sequence exits with 2")

    code, text = cli("terms", "A", "3", "--format", "csv")
    lines = text.splitlines()
    assert code == 0 and lines[0] == "n,recurrence" and lines[-1] == "3,56"
    print("✓ CSV rendering")

    code, text = cli("--pretty", "terms", "B", "4", "--rep", "all")
    assert code == 0 and "agreement: True" in text

    return True


def test_verify():
    print("\n2. Testing verify command...")

    code, first = cli("verify", "--depth-2var", "0", "--depth-3var", "0", "--diagonal-depth", "0")
    assert code == 0, first
    payload = json.loads(first)
    assert payload["passed"] and payload["first_failure"] is None
    print(f"✓ {len(payload['checks'])} checks passed")

    _, second = cli("--seed", "7", "verify", "--depth-2var", "0", "--depth-3var", "0", "--diagonal-depth", "0")
    assert first == second
    print("✓ Output is independent of submission order")

    code, payload = cli_json("verify")
    assert code == 0 and payload["passed"], payload["first_failure"]
    assert payload["depths"] == {"2var": 12, "3var": 10, "prop12": 8, "diagonal": 5}
    diagonals = [c for c in payload["checks"] if c["kind"] == "diagonal"]
    assert len(diagonals) == len(KNOWN_DIAGONALS)
    assert all(c["state"] == "passed" for c in diagonals)
    print(f"✓ Default verify passes {len(payload['checks'])} checks, {len(diagonals)} of them diagonals")

    d = catalog_get("D")
    broken = dataclasses.replace(d, recurrence=catalog_get("A").recurrence)
    seen = []
    verifier = CatalogVerifier(depth_2var=4, depth_3var=2, entries=[broken], prop12_depth=0, diagonal_depth=0)
    dropped = []

    def on_dropped(event):
        dropped.append(event)

    verifier.add_event_handler(seen.append)
    verifier.add_event_handler(on_dropped)
    verifier.remove_event_handler(on_dropped)
    assert len(verifier.event_handlers) == 1
    summary = asyncio.run(verifier.run())
    assert not summary.passed
    assert summary.first_failure.subject == "D"
    assert summary.first_failure.state is CheckState.FAILED
    assert len(seen) == len(summary.events)
    assert dropped == []
    assert verifier.get_status()["failures"] >= 1
    print(f"✓ Injected fault reported: {summary.first_failure.kind} {summary.first_failure.subject}")

    return True


def test_congruence():
    print("\n3. Testing congruence command...")

    code, payload = cli_json("congruence", "gauss", "B", "--r", "2", "--p", "3,5,7", "--kmax", "2", "--nmax", "2")
    assert code == 0 and payload["passed"] and payload["expected"] is True
    print("✓ B order-2 Gauss congruences pass")

    code, payload = cli_json("congruence", "gauss", "power2", "--r", "2", "--p", "3,5", "--kmax", "1", "--nmax", "2")
    assert code == 0 and not payload["passed"] and payload["expected"] is None
    assert payload["reports"][0]["counterexample"]["p"] == 3
    print("✓ 2^n fails without a failing exit code")

    code, payload = cli_json("congruence", "gauss", "B", "--r", "2", "--p", "2")
    assert code == 2 and payload["type"] == "DefinitionError"
    print("✓ p = 2 at order 2 rejected")

    code, payload = cli_json("congruence", "lucas", "gamma", "--p", "2", "--nmax", "100")
    assert code == 0 and payload["passed"]

    code, payload = cli_json("congruence", "lemmas", "--p", "3,5", "--nmax", "12")
    assert code == 0 and len(payload["reports"]) == 2

    code, payload = cli_json("congruence", "shifted_gauss", "A", "--n-vec", "0,0", "--p", "3",
                             "--kmax", "1", "--r", "1", "--n", "1")
    assert code == 0 and payload["expected"] is None and payload["passed"]
    assert payload["reports"][0]["exploratory"] is True
    print("✓ Shifted Gauss report is exploratory")

    code, payload = cli_json("congruence", "shifted_gauss", "A", "--n-vec", "0,0,0", "--p", "3")
    assert code == 2 and payload["type"] == "CongruenceError"

    code, payload = cli_json("congruence", "shifted_gauss", "x+y+x^-1*y^-1", "--n-vec", "0,0", "--p", "3",
                             "--kmax", "1", "--r", "1")
    assert code == 0 and payload["sequence"] == "x+y+x^-1*y^-1" and payload["source"] == "ct"

    return True


def test_polytope_and_catalog():
    print("\n4. Testing polytope and catalog commands...")

    code, payload = cli_json("polytope", "check", "eta")
    assert code == 0 and payload["passed"]
    verdicts = payload["checks"][0]["detail"]["verdicts"]
    assert all(v["verdict"] == "fail" for v in verdicts.values())
    print("✓ eta fails origin-only as expected")

    code, payload = cli_json("polytope", "check", "x+y+x^-1*y^-1", "--dim", "2")
    assert code == 0 and payload["verdict"]["verdict"] == "pass"

    code, payload = cli_json("catalog", "list")
    assert code == 0 and len(payload["sequences"]) == 18
    code, payload = cli_json("catalog", "export")
    assert payload["checksum"] == catalog_checksum()
    print(f"✓ Catalog export checksum {payload['checksum'][:12]}...")

    return True


def test_manifests():
    print("\n5. Testing run manifests...")

    code, payload = cli_json("manifests", "--stats", "--limit", "5")
    assert code == 0
    stats = payload["statistics"]
    assert stats["total_runs"] >= 10
    assert stats["failed_runs"] >= 2
    assert stats["command_counts"]["terms"] >= 1
    assert len(payload["manifests"]) == 5
    print(f"✓ {stats['total_runs']} runs recorded, {stats['failed_runs']} not passing")

    _, failures = cli_json("manifests", "--failures-only", "--command", "terms")
    assert failures["manifests"] and all(m["exit_code"] != 0 for m in failures["manifests"])

    logs = list((WORKSPACE / "manifests").glob("runs_*.jsonl"))
    assert logs
    entries = [json.loads(line) for line in logs[0].read_text().splitlines()]
    assert all({"command", "config", "versions", "outcome", "exit_code"} <= set(e) for e in entries)
    print(f"✓ {len(entries)} manifests in {logs[0].name}")

    return True


def test_term_cap_override():
    print("\n6. Testing global overrides...")

    try:
        code, payload = cli_json("--term-cap", "5", "terms", "D", "5", "--rep", "ct")
        assert code == 2 and payload["type"] == "TermCapExceeded"
        print("✓ Term cap surfaces as an error exit")
    finally:
        os.environ.pop("SPORADIC_TERM_CAP", None)
        get_settings.cache_clear()

    code, payload = cli_json("terms", "D", "4", "--rep", "ct")
    assert code == 0 and payload["terms"][-1] == "1251"
    print("✓ Cap restored after the run")

    return True


def test_config():
    print("\n7. Testing configuration...")

    env_file = WORKSPACE / "sporadic.env"
    env_file.write_text("SPORADIC_DEPTH_2VAR=7\nSPORADIC_SEARCH_WORKERS=3\n")
    settings = load_config(str(env_file))
    assert settings.depth_2var == 7 and settings.search_workers == 3
    assert load_config(str(WORKSPACE / "missing.env")).depth_2var == Settings().depth_2var
    print("✓ Env-style config file loaded")

    os.environ["SPORADIC_DEPTH_3VAR"] = "5"
    try:
        assert Settings().depth_3var == 5
    finally:
        os.environ.pop("SPORADIC_DEPTH_3VAR")
    print("✓ Environment overrides")

    saved = WORKSPACE / "config.json"
    save_config(settings, str(saved))
    assert json.loads(saved.read_text())["depth_2var"] == 7

    return True


def _manifest(command: str, exit_code: int) -> dict:
    return {
        "command": command,
        "config": {"settings": {}, "arguments": {"command": command}},
        "versions": {"artifact": "test", "catalog_checksum": "0" * 64},
        "outcome": {"passed": exit_code == 0},
        "exit_code": exit_code,
    }


async def _database_round():
    db = Database(f"sqlite+aiosqlite:///{WORKSPACE / 'direct.db'}")
    try:
        await db.init_db()
        first = await db.log_manifest(_manifest("verify", 0))
        second = await db.log_manifest(_manifest("congruence", 1))
        assert second > first

        failures = await db.get_manifests(failures_only=True)
        assert [m["command"] for m in failures] == ["congruence"]
        assert failures[0]["outcome"] == {"passed": False}

        stats = await db.get_statistics()
        assert stats == {"total_runs": 2, "passed_runs": 1, "failed_runs": 1,
                         "command_counts": {"congruence": 1, "verify": 1}}
        assert await db.cleanup_old_manifests(30) == 0
    finally:
        await db.close()


class ExplodingSink(ManifestSink):
    def __init__(self):
        super().__init__("exploding")

    async def _execute(self, manifest):
        raise RuntimeError("disk on fire")


async def _dispatch_round():
    log_dir = WORKSPACE / "dispatch"
    dispatcher = ManifestDispatcher()
    dispatcher.add_sink(ExplodingSink())
    dispatcher.add_sink(ManifestFileLogger(str(log_dir)))

    written = await dispatcher.dispatch(_manifest("terms", 0))
    assert written == ["manifest_file"]
    assert len(list(log_dir.glob("*.jsonl"))) == 1

    dispatcher.disable_sink("manifest_file")
    assert await dispatcher.dispatch(_manifest("terms", 0)) == []
    status = dispatcher.get_status()
    assert status["manifest_file"]["enabled"] is False
    assert status["exploding"]["last_written"] is not None

    dispatcher.remove_sink("exploding")
    assert list(dispatcher.sinks) == ["manifest_file"]


def test_database_and_sinks():
    print("\n8. Testing database and manifest sinks...")

    asyncio.run(_database_round())
    print("✓ Database records, filters and statistics")

    asyncio.run(_dispatch_round())
    print("✓ A failing sink does not stop the others")

    return True


def main():
    print("=" * 50)
    print("SPORADIC CLI TEST")
    print("=" * 50)

    try:
        test_terms()
        test_verify()
        test_congruence()
        test_polytope_and_catalog()
        test_manifests()
        test_term_cap_override()
        test_config()
        test_database_and_sinks()

        print("\n" + "=" * 50)
        print("✅ ALL TESTS COMPLETED SUCCESSFULLY!")
        print("=" * 50)

    except Exception as e:
        print(f"\n❌ Test failed: {e}")
        import traceback
        traceback.print_exc()
        return 1

    return 0


if __name__ == "__main__":
    exit(main())
