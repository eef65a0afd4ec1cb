import pytest

import simkit.cli as cli
from simkit.layout_bench import LayoutBenchReport
from simkit.registry import ConfigMap


def run_cli(*argv):
    return cli.main(list(argv))


def test_list_demos(capsys):
    assert run_cli("run", "--list-demos") == 0
    out = capsys.readouterr().out.split()
    assert out == ["dam-break", "hydrostatic", "rotation"]


def test_unknown_demo_exit_2_lists_available(capsys):
    assert run_cli("run", "--demo", "nope") == 2
    err = capsys.readouterr().err
    assert "dam-break" in err


def test_missing_demo_and_restore_is_usage_error(tmp_path):
    assert run_cli("run", "--out", str(tmp_path)) == 2


def test_happy_path_frames_manifest_report(tmp_path, capsys):
    out = tmp_path / "t"
    assert run_cli("run", "--demo", "dam-break", "--frames", "10",
                   "--out", str(out), "--seed", "1") == 0
    frames = sorted(p.name for p in out.glob("frame_*.ppm"))
    assert len(frames) == 10
    assert frames[0] == "frame_000001.ppm"
    assert frames[-1] == "frame_000010.ppm"
    assert (out / "manifest.cfg").exists()
    dumps = sorted(out.glob("particles_*.tcpart"))
    assert len(dumps) == 10
    stdout = capsys.readouterr().out
    assert "p2g" in stdout and "pressure_project" in stdout  # profile report


def test_no_profile_suppresses_report(tmp_path, capsys):
    out = tmp_path / "t"
    assert run_cli("run", "--demo", "hydrostatic", "--frames", "1",
                   "--out", str(out), "--no-profile") == 0
    assert "p2g" not in capsys.readouterr().out


def test_override_precedence_per_key(tmp_path):
    cfg_file = tmp_path / "c.cfg"
    cfg_file.write_text("dt = 0.001\nseed = 5\nnx = 16\nny = 16\n")
    out = tmp_path / "t"
    assert run_cli("run", "--demo", "dam-break", "--frames", "1",
                   "--out", str(out), "--config", str(cfg_file),
                   "--set", "dt=0.002", "--set", "render.width=32",
                   "--set", "render.height=32") == 0
    manifest = ConfigMap.from_text((out / "manifest.cfg").read_text())
    assert manifest.get_float("dt") == 0.002     # --set beats file
    assert manifest.get_int("seed") == 5         # file beats demo default
    assert manifest.get_int("nx") == 16
    assert manifest.get_str("run.demo") == "dam-break"


ALL_SIM_KEYS = [
    ("nx", "24", "40"), ("ny", "24", "40"), ("dx", "0.05", "0.025"),
    ("dt", "0.001", "0.002"), ("gravity_x", "0.1", "0.2"),
    ("gravity_y", "-9.0", "-5.0"), ("scheme", "flip", "apic"),
    ("flip_blend", "0.9", "0.8"), ("cfl_max", "2.0", "3.0"),
    ("solver_tol", "1e-9", "1e-7"), ("max_cg_iters", "150", "175"),
    ("seed", "5", "6"), ("particles_per_cell", "2", "3"),
    ("render.width", "64", "48"), ("render.height", "64", "48"),
]


@pytest.mark.parametrize("key,file_value,set_value", ALL_SIM_KEYS)
def test_override_precedence_every_key(tmp_path, key, file_value, set_value):
    cfg_file = tmp_path / "c.cfg"
    cfg_file.write_text(f"{key} = {file_value}\n")
    out_default = tmp_path / "d"
    assert run_cli("run", "--demo", "dam-break", "--frames", "0",
                   "--frame-every", "0", "--out", str(out_default)) == 0
    defaults = ConfigMap.from_text((out_default / "manifest.cfg").read_text())

    out_file = tmp_path / "f"
    assert run_cli("run", "--demo", "dam-break", "--frames", "0",
                   "--frame-every", "0", "--out", str(out_file),
                   "--config", str(cfg_file)) == 0
    with_file = ConfigMap.from_text((out_file / "manifest.cfg").read_text())

    out_set = tmp_path / "s"
    assert run_cli("run", "--demo", "dam-break", "--frames", "0",
                   "--frame-every", "0", "--out", str(out_set),
                   "--config", str(cfg_file), "--set", f"{key}={set_value}") == 0
    with_set = ConfigMap.from_text((out_set / "manifest.cfg").read_text())

    from simkit.registry import parse_scalar
    assert with_file.raw(key) == parse_scalar(file_value)   # file beats default
    assert with_set.raw(key) == parse_scalar(set_value)     # --set beats file
    if key in defaults.keys():
        assert defaults.raw(key) != parse_scalar(file_value)


def test_seed_flag_beats_everything(tmp_path):
    cfg_file = tmp_path / "c.cfg"
    cfg_file.write_text("seed = 5\n")
    out = tmp_path / "t"
    assert run_cli("run", "--demo", "hydrostatic", "--frames", "0",
                   "--out", str(out), "--config", str(cfg_file),
                   "--set", "seed=6", "--seed", "7") == 0
    manifest = ConfigMap.from_text((out / "manifest.cfg").read_text())
    assert manifest.get_int("seed") == 7


def test_manifest_rerun_bitwise_identical(tmp_path):
    out1 = tmp_path / "a"
    assert run_cli("run", "--demo", "dam-break", "--frames", "3",
                   "--out", str(out1), "--snapshot-every", "2",
                   "--set", "render.width=48", "--set", "render.height=48") == 0
    out2 = tmp_path / "b"
    assert run_cli("run", "--manifest", str(out1 / "manifest.cfg"),
                   "--out", str(out2)) == 0
    names1 = sorted(p.name for p in out1.iterdir() if p.name != "manifest.cfg")
    names2 = sorted(p.name for p in out2.iterdir() if p.name != "manifest.cfg")
    assert names1 == names2 and len(names1) > 0
    for name in names1:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_restore_continues_bitwise(tmp_path):
    full = tmp_path / "full"
    assert run_cli("run", "--demo", "dam-break", "--frames", "20",
                   "--out", str(full), "--seed", "3") == 0

    half = tmp_path / "half"
    assert run_cli("run", "--demo", "dam-break", "--frames", "10",
                   "--out", str(half), "--seed", "3",
                   "--snapshot-every", "10") == 0
    resumed = tmp_path / "resumed"
    assert run_cli("run", "--restore", str(half / "snap_000010.tcsnap"),
                   "--frames", "10", "--out", str(resumed)) == 0

    a = (full / "particles_000020.tcpart").read_bytes()
    b = (resumed / "particles_000020.tcpart").read_bytes()
    assert a == b
    fa = (full / "frame_000020.ppm").read_bytes()
    fb = (resumed / "frame_000020.ppm").read_bytes()
    assert fa == fb


def test_zero_frames_renders_current_state(tmp_path):
    out = tmp_path / "t"
    assert run_cli("run", "--demo", "rotation", "--frames", "0",
                   "--out", str(out), "--snapshot-every", "1") == 0
    assert (out / "frame_000000.ppm").exists()
    assert (out / "particles_000000.tcpart").exists()
    assert (out / "snap_000000.tcsnap").exists()


def test_frame_every_spacing(tmp_path):
    out = tmp_path / "t"
    assert run_cli("run", "--demo", "hydrostatic", "--frames", "2",
                   "--frame-every", "3", "--out", str(out)) == 0
    names = sorted(p.name for p in out.glob("frame_*.ppm"))
    assert names == ["frame_000003.ppm", "frame_000006.ppm"]


def test_runtime_error_exit_1_names_scope(tmp_path, capsys):
    out = tmp_path / "t"
    code = run_cli("run", "--demo", "dam-break", "--frames", "200",
                   "--out", str(out), "--set", "dt=0.05",
                   "--set", "cfl_max=0.2")
    assert code == 1
    err = capsys.readouterr().err
    assert "CFL" in err
    assert "in scope step" in err


def test_invalid_config_value_exit_2(tmp_path, capsys):
    out = tmp_path / "t"
    code = run_cli("run", "--demo", "dam-break", "--frames", "1",
                   "--out", str(out), "--set", "flip_blend=2.0")
    assert code == 2
    assert "flip_blend" in capsys.readouterr().err


def test_bad_set_syntax_exit_2(tmp_path):
    assert run_cli("run", "--demo", "dam-break", "--out", str(tmp_path),
                   "--set", "oops") == 2


def test_bench_reports_and_exit_codes(capsys):
    assert run_cli("bench", "--n", "1024", "--passes", "1", "--seed", "42") == 0
    out = capsys.readouterr().out
    for key in ("n_ops=", "aligned_throughput=", "packed_throughput=",
                "speedup_ratio=", "checksum_aligned=", "checksum_packed="):
        assert key in out


def test_bench_deterministic_checksums(capsys):
    run_cli("bench", "--n", "1024", "--passes", "1", "--seed", "42")
    first = capsys.readouterr().out
    run_cli("bench", "--n", "1024", "--passes", "1", "--seed", "42")
    second = capsys.readouterr().out

    def checksums(text):
        return [l for l in text.splitlines() if l.startswith("checksum")]

    assert checksums(first) == checksums(second)


def test_bench_checksum_mismatch_exit_1(monkeypatch):
    def fault_injected(n, passes, seed, foil="packed"):
        return LayoutBenchReport(n_ops=1, aligned_throughput=1.0,
                                 packed_throughput=1.0, speedup_ratio=1.0,
                                 checksum_aligned=1.0, checksum_packed=2.0)

    monkeypatch.setattr(cli, "run_layout_benchmark", fault_injected)
    assert cli.main(["bench"]) == 1
