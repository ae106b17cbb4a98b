"""Command line behavior: argument handling, output, exit codes."""

import json

import pytest

from sia import cli
from sia.fixture import build_demo_store, write_demo_manifest
from sia.store import Store


@pytest.fixture(scope="module")
def demo_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "demo"
    build_demo_store(path).close()
    return path


def run(*argv):
    return cli.main([str(a) for a in argv])


class TestDataDirSelection:
    def test_missing_data_dir_is_usage_error(self, monkeypatch, capsys):
        monkeypatch.delenv("SIA_DATA_DIR", raising=False)
        assert run("reindex") == 2
        assert "no data directory" in capsys.readouterr().err

    def test_env_fallback(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("SIA_DATA_DIR", str(tmp_path / "envstore"))
        assert run("init") == 0
        assert "initialized empty store" in capsys.readouterr().out
        assert (tmp_path / "envstore" / "records").is_dir()

    def test_flag_wins_over_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SIA_DATA_DIR", str(tmp_path / "ignored"))
        assert run("init", "--data", tmp_path / "flagged") == 0
        assert (tmp_path / "flagged" / "records").is_dir()
        assert not (tmp_path / "ignored").exists()


class TestInitAndDemo:
    def test_init_twice_is_storage_error(self, tmp_path, capsys):
        target = tmp_path / "store"
        assert run("init", "--data", target) == 0
        assert run("init", "--data", target) == 3
        assert "storage error" in capsys.readouterr().err

    def test_demo_reports_inventory(self, tmp_path, capsys):
        assert run("demo", "--data", tmp_path / "demo") == 0
        out = capsys.readouterr().out
        assert "18 records" in out
        assert "curator (expert)" in out and "guest (visitor)" in out


class TestIngest:
    def test_manifest_roundtrip(self, tmp_path, capsys):
        manifest = write_demo_manifest(tmp_path / "bundle")
        assert run("init", "--data", tmp_path / "store") == 0
        assert run("ingest", "--data", tmp_path / "store", "--manifest", manifest) == 0
        out = capsys.readouterr().out
        assert "ingested 18 records" in out
        assert "  yard-north-wall-photo" in out

    def test_manifest_flag_required(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run("ingest", "--data", tmp_path)
        assert exc.value.code == 2


class TestSearch:
    def test_table_output(self, demo_dir, capsys):
        assert run("search", "--data", demo_dir, "--kind", "photo", "--place", "yard") == 0
        captured = capsys.readouterr()
        lines = captured.out.strip().splitlines()
        assert [line.split("\t")[0] for line in lines] == [
            "yard-north-wall-photo",
            "yard-from-the-keep",
        ]
        assert "2 of 2 matches (all)" in captured.err

    def test_json_output(self, demo_dir, capsys):
        assert run("search", "--data", demo_dir, "--format", "json", "--kind", "text") == 0
        page = json.loads(capsys.readouterr().out)
        assert page["total"] == 1
        assert page["items"][0]["id"] == "field-notes-on-the-great-hall-excavation"

    def test_epoch_flags(self, demo_dir, capsys):
        assert run("search", "--data", demo_dir, "--period-to", "1120", "--format", "json") == 0
        page = json.loads(capsys.readouterr().out)
        periods = {p for item in page["items"] for p in item["periods"]}
        assert "p1100" in periods and "p1250" not in periods

    def test_unknown_place_is_domain_error(self, demo_dir, capsys):
        assert run("search", "--data", demo_dir, "--place", "atlantis") == 1
        assert "error (unknown-place)" in capsys.readouterr().err

    def test_pagination_flags(self, demo_dir, capsys):
        assert run("search", "--data", demo_dir, "--page-size", "5", "--page", "2") == 0
        captured = capsys.readouterr()
        assert len(captured.out.strip().splitlines()) == 5
        assert "5 of 18 matches (page 2)" in captured.err


class TestValidate:
    def test_clean_store(self, demo_dir, capsys):
        assert run("validate", "--data", demo_dir) == 0
        assert "all 18 records valid" in capsys.readouterr().out

    def test_clean_store_json(self, demo_dir, capsys):
        assert run("validate", "--data", demo_dir, "--format", "json") == 0
        assert json.loads(capsys.readouterr().out) == {}

    def test_damaged_store(self, tmp_path, capsys):
        target = tmp_path / "demo"
        build_demo_store(target).close()
        victim = target / "records" / "chapel-window-detail.xml"
        victim.write_bytes(b"not xml at all")
        assert run("validate", "--data", target) == 1
        captured = capsys.readouterr()
        assert "chapel-window-detail" in captured.out
        assert "1 of 18 records invalid" in captured.err


class TestReindex:
    def test_reports_count(self, demo_dir, capsys):
        assert run("reindex", "--data", demo_dir) == 0
        assert "index rebuilt: 18 records" in capsys.readouterr().out

    def test_locked_store_is_storage_error(self, demo_dir, capsys):
        with Store.open(demo_dir, writer=True):
            assert run("reindex", "--data", demo_dir) == 3
        assert "storage error" in capsys.readouterr().err

    def test_missing_store_is_storage_error(self, tmp_path):
        assert run("reindex", "--data", tmp_path / "nowhere") == 3


class TestCompose:
    def test_model_to_file(self, demo_dir, tmp_path, capsys):
        out = tmp_path / "scene.x3d"
        code = run(
            "compose-model", "--data", demo_dir,
            "--places", "yard,chapel,great-hall", "--periods", "p1100,p1150",
            "--out", out,
        )
        assert code == 0
        data = out.read_bytes()
        assert data.startswith(b'<?xml version="1.0" encoding="UTF-8"?>\n<X3D')
        assert data.count(b"<Group DEF=") == 6
        assert capsys.readouterr().err == ""

    def test_model_warnings_on_stderr(self, demo_dir, tmp_path, capsys):
        out = tmp_path / "scene.x3d"
        code = run(
            "compose-model", "--data", demo_dir,
            "--places", "yard", "--periods", "p1100,p1250", "--out", out,
        )
        assert code == 0
        assert "warning: no 3D model covers" in capsys.readouterr().err

    def test_model_to_stdout(self, demo_dir, capsysbinary):
        code = run("compose-model", "--data", demo_dir, "--places", "yard", "--periods", "p1100")
        assert code == 0
        assert capsysbinary.readouterr().out.startswith(b'<?xml version="1.0"')

    def test_plan_to_file(self, demo_dir, tmp_path):
        out = tmp_path / "plan.svg"
        code = run(
            "compose-plan", "--data", demo_dir,
            "--places", "chapel", "--periods", "p1150", "--out", out,
        )
        assert code == 0
        assert b"layer-p1150-chapel-chapel-outline-plan-around-1150" in out.read_bytes()

    def test_empty_composition_is_domain_error(self, demo_dir, capsys):
        code = run("compose-model", "--data", demo_dir, "--places", "yard", "--periods", "p1250")
        assert code == 1
        assert "error (empty-composition)" in capsys.readouterr().err

    def test_montage(self, demo_dir, tmp_path):
        out = tmp_path / "montage.svg"
        code = run(
            "compose-montage", "--data", demo_dir,
            "--records", "yard-north-wall-photo:0.8,chapel-window-detail", "--out", out,
        )
        assert code == 0
        data = out.read_bytes()
        assert b"montage-1-yard-north-wall-photo" in data
        assert b"montage-2-chapel-window-detail" in data
        assert b'opacity="0.8"' in data and b'opacity="0.5"' in data

    def test_montage_bad_opacity_is_usage_error(self, demo_dir, capsys):
        code = run("compose-montage", "--data", demo_dir, "--records", "yard-north-wall-photo:x")
        assert code == 2
        assert "expected id or id:opacity" in capsys.readouterr().err


class TestExportAndVocab:
    def test_export_matches_stored_bytes(self, demo_dir, tmp_path):
        out = tmp_path / "record.xml"
        assert run("export", "--data", demo_dir, "--id", "chapel-cross-section-scan", "--out", out) == 0
        stored = (demo_dir / "records" / "chapel-cross-section-scan.xml").read_bytes()
        assert out.read_bytes() == stored

    def test_export_unknown_id(self, demo_dir, capsys):
        assert run("export", "--data", demo_dir, "--id", "ghost") == 1
        assert "error (not-found)" in capsys.readouterr().err

    def test_vocab_list(self, demo_dir, capsys):
        assert run("vocab", "list", "--data", demo_dir) == 0
        out = capsys.readouterr().out
        assert "subject: masonry" in out
        assert "condition: good, fair, poor" in out

    def test_vocab_add_then_list_facet(self, tmp_path, capsys):
        target = tmp_path / "demo"
        build_demo_store(target).close()
        assert run("vocab", "add", "--data", target, "--facet", "subject", "--term", "mortar") == 0
        capsys.readouterr()
        assert run("vocab", "list", "--data", target, "--facet", "subject") == 0
        out = capsys.readouterr().out
        assert "mortar" in out and "condition" not in out
