import json

import pytest

from atlasrender.cli import bench_entry, main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBenchCommand:
    def test_success_prints_summary(self, capsys, tmp_path):
        out = tmp_path / "report.json"
        code, stdout, _ = run(
            capsys, "bench", "--stage", "instanced", "--scenes", "2",
            "--width", "16", "--height", "16", "--frames", "2",
            "--out", str(out), "--format", "json",
        )
        assert code == 0
        summary = json.loads(stdout)
        assert set(summary) == {"fps", "wall_seconds", "final_frame_checksum"}
        report = json.loads(out.read_text())
        assert report["config"]["stage"] == "instanced"

    def test_csv_output(self, capsys, tmp_path):
        out = tmp_path / "report.csv"
        code, _, _ = run(
            capsys, "bench", "--stage", "naive", "--scenes", "1",
            "--width", "16", "--height", "16", "--frames", "1",
            "--out", str(out), "--format", "csv",
        )
        assert code == 0
        assert out.read_text().startswith("stage,")

    def test_usage_error_exit_2(self, capsys):
        code, _, stderr = run(capsys, "bench", "--stage", "bogus", "--scenes", "1")
        assert code == 2
        assert "stage" in stderr

    def test_bad_format_exit_2(self, capsys):
        code, _, stderr = run(
            capsys, "bench", "--stage", "naive", "--scenes", "1", "--format", "yaml"
        )
        assert code == 2
        assert "format" in stderr

    def test_missing_gpu_exit_3(self, capsys):
        from atlasrender.gpubackend import gpu_available

        if gpu_available():
            pytest.skip("hardware backend present")
        code, _, stderr = run(
            capsys, "bench", "--stage", "instanced", "--scenes", "1",
            "--frames", "1", "--backend", "gpu",
        )
        assert code == 3
        assert "unavailable" in stderr

    def test_bare_bench_script(self, capsys):
        code = bench_entry(
            ["--stage", "tiled", "--scenes", "1", "--width", "16",
             "--height", "16", "--frames", "1"]
        )
        assert code == 0
        assert "fps" in capsys.readouterr().out


class TestRollout:
    def test_json_shape_and_determinism(self, capsys):
        args = ("rollout", "--scenes", "2", "--steps", "3", "--seed", "5",
                "--width", "16", "--height", "16")
        code, out1, _ = run(capsys, *args)
        assert code == 0
        doc = json.loads(out1)
        assert doc["seed"] == 5 and doc["scenes"] == 2
        assert len(doc["actions"]) == 3 and len(doc["actions"][0]) == 2
        assert len(doc["checksums"]) == 4  # reset plus one per step
        _, out2, _ = run(capsys, *args)
        assert out1 == out2


class TestDump:
    def test_writes_ppm_files(self, capsys, tmp_path):
        code, stdout, _ = run(
            capsys, "dump", "--scenes", "3", "--width", "16", "--height", "16",
            "--out-dir", str(tmp_path),
        )
        assert code == 0
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["frame_0.ppm", "frame_1.ppm", "frame_2.ppm"]
        assert (tmp_path / "frame_0.ppm").read_bytes().startswith(b"P6\n16 16\n255\n")
        assert "3 frames" in stdout
