"""Command-line behavior: exit codes, file contracts, spec round trips."""

from __future__ import annotations

import json

import pytest

from latentscope.anchors import AnchorStore
from latentscope.cli import main
from latentscope.latent import AnchorSet, sample_latents


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Point config discovery at an empty directory for every CLI test."""
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path / "xdg"))
    return tmp_path / "xdg" / "latentscope" / "config.json"


@pytest.fixture
def store_path(micro_model, tmp_path):
    members = sample_latents(micro_model.input_space, 8, 6, seed=31)
    store = AnchorStore(tmp_path / "store.json")
    store.put(AnchorSet(name="seta", members=tuple(members[0:3])))
    store.put(AnchorSet(name="setb", members=tuple(members[3:6])))
    return tmp_path / "store.json"


class TestUsage:
    def test_no_command_is_usage_error(self):
        with pytest.raises(SystemExit) as e:
            main([])
        assert e.value.code == 2

    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as e:
            main(["sample", "--model", "m", "--out", "o", "--wat"])
        assert e.value.code == 2

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as e:
            main(["--version"])
        assert e.value.code == 0
        assert "latentscope" in capsys.readouterr().out


class TestModelSubcommands:
    def test_init_validate_info(self, tmp_path, capsys):
        out = tmp_path / "g.lgw1"
        assert main(["model", "init", "--out", str(out), "--scale", "0.0625"]) == 0
        assert out.is_file()
        capsys.readouterr()

        assert main(["model", "validate", str(out)]) == 0
        assert capsys.readouterr().out.startswith("ok:")

        assert main(["model", "info", str(out)]) == 0
        info = json.loads(capsys.readouterr().out)
        assert info["input_dim"] == 100
        assert tuple(info["output_shape"]) == (3, 64, 64)

    def test_validate_missing_file(self, tmp_path, capsys):
        assert main(["model", "validate", str(tmp_path / "none.lgw1")]) == 4
        err = capsys.readouterr().err
        assert "error[io]" in err
        assert "\x1b" not in err  # not a tty, so no color codes

    def test_init_bad_scale(self, tmp_path, capsys):
        code = main(["model", "init", "--out", str(tmp_path / "g"), "--scale", "0"])
        assert code == 3
        assert "error[invalid-argument]" in capsys.readouterr().err


class TestExperimentSubcommands:
    def test_circle_count_contract(self, micro_model_path, tmp_path, capsys):
        out = tmp_path / "d"
        argv = [
            "circle",
            "--model", str(micro_model_path),
            "--seed", "7",
            "--n", "16",
            "--out", str(out),
        ]
        assert main(argv) == 0
        names = sorted(p.name for p in out.iterdir())
        assert len(names) == 18  # 16 tiles + grid + manifest
        assert "circular_grid.png" in names
        assert "circular_manifest.json" in names
        printed = capsys.readouterr().out.strip()
        assert printed.endswith("circular_manifest.json")

    def test_arith_file_contract(self, micro_model_path, store_path, tmp_path):
        out = tmp_path / "d"
        argv = [
            "arith",
            "--model", str(micro_model_path),
            "--out", str(out),
            "--store", str(store_path),
            "--expr", "+seta -setb +setb",
        ]
        assert main(argv) == 0
        names = {p.name for p in out.iterdir()}
        assert "arithmetic_grid.png" in names
        assert "arithmetic_result.lat" in names

    def test_emit_spec_run_round_trip(self, micro_model_path, tmp_path, capsys):
        direct = tmp_path / "direct"
        replay = tmp_path / "replay"
        base = [
            "interpolate",
            "--model", str(micro_model_path),
            "--n", "4",
            "--seeds", "1", "2",
        ]
        assert main(base + ["--out", str(direct)]) == 0
        capsys.readouterr()

        assert main(base + ["--out", str(replay), "--emit-spec"]) == 0
        spec_text = capsys.readouterr().out
        spec_file = tmp_path / "spec.json"
        spec_file.write_text(spec_text)
        assert main(["run", str(spec_file)]) == 0

        hashes = []
        for d in (direct, replay):
            manifest = json.loads((d / "interpolate_manifest.json").read_text())
            hashes.append([f["sha256"] for f in manifest["files"]])
        assert hashes[0] == hashes[1]

    def test_endpoint_flags_exclusive(self, micro_model_path, tmp_path):
        with pytest.raises(SystemExit) as e:
            main([
                "slerp",
                "--model", str(micro_model_path),
                "--out", str(tmp_path / "o"),
                "--seeds", "1", "2",
                "--endpoints", "a.lat", "b.lat",
            ])
        assert e.value.code == 2

    def test_odd_extrapolation_is_validation_error(self, micro_model_path, tmp_path, capsys):
        code = main([
            "extrapolate",
            "--model", str(micro_model_path),
            "--out", str(tmp_path / "o"),
            "--n", "15",
        ])
        assert code == 3
        assert "error[validation]" in capsys.readouterr().err

    def test_missing_model_is_io_error(self, tmp_path, capsys):
        code = main([
            "sample",
            "--model", str(tmp_path / "ghost.lgw1"),
            "--out", str(tmp_path / "o"),
        ])
        assert code == 4
        assert "error[io]" in capsys.readouterr().err

    def test_unknown_anchor_set_fails(self, micro_model_path, store_path, tmp_path, capsys):
        code = main([
            "arith",
            "--model", str(micro_model_path),
            "--out", str(tmp_path / "o"),
            "--store", str(store_path),
            "--expr", "+seta -ghost",
        ])
        assert code == 3
        assert "error[not-found]" in capsys.readouterr().err


class TestRunAndRerunCheck:
    def test_run_missing_spec(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "none.json")]) == 4
        assert "error[format]" in capsys.readouterr().err

    def test_run_malformed_spec(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        assert main(["run", str(bad)]) == 4

    def test_rerun_check_pass_and_fail(self, micro_model_path, tmp_path, capsys):
        out = tmp_path / "d"
        assert main([
            "sample", "--model", str(micro_model_path), "--out", str(out), "--n", "3",
        ]) == 0
        capsys.readouterr()

        manifest = out / "samples_manifest.json"
        assert main(["rerun-check", str(manifest)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["reproducible"] is True

        (out / "samples_01.png").write_bytes(b"tampered")
        assert main(["rerun-check", str(manifest)]) == 3
        report = json.loads(capsys.readouterr().out)
        assert report["changed_on_disk"] == ["samples_01.png"]


class TestConfig:
    def test_config_jobs_lands_in_spec(self, isolated_config, micro_model_path, tmp_path, capsys):
        isolated_config.parent.mkdir(parents=True)
        isolated_config.write_text(json.dumps({"jobs": 3}))
        assert main([
            "sample",
            "--model", str(micro_model_path),
            "--out", str(tmp_path / "o"),
            "--emit-spec",
        ]) == 0
        assert json.loads(capsys.readouterr().out)["jobs"] == 3

    def test_flag_beats_config(self, isolated_config, micro_model_path, tmp_path, capsys):
        isolated_config.parent.mkdir(parents=True)
        isolated_config.write_text(json.dumps({"jobs": 3}))
        assert main([
            "sample",
            "--model", str(micro_model_path),
            "--out", str(tmp_path / "o"),
            "--jobs", "2",
            "--emit-spec",
        ]) == 0
        assert json.loads(capsys.readouterr().out)["jobs"] == 2

    def test_malformed_config_is_format_error(self, isolated_config, micro_model_path, tmp_path, capsys):
        isolated_config.parent.mkdir(parents=True)
        isolated_config.write_text("not json")
        code = main([
            "sample",
            "--model", str(micro_model_path),
            "--out", str(tmp_path / "o"),
            "--emit-spec",
        ])
        assert code == 4
        assert "error[format]" in capsys.readouterr().err

    def test_unknown_config_keys_ignored(self, isolated_config, micro_model_path, tmp_path, capsys):
        isolated_config.parent.mkdir(parents=True)
        isolated_config.write_text(json.dumps({"jobs": 2, "theme": "dark"}))
        assert main([
            "sample",
            "--model", str(micro_model_path),
            "--out", str(tmp_path / "o"),
            "--emit-spec",
        ]) == 0
        assert json.loads(capsys.readouterr().out)["jobs"] == 2
