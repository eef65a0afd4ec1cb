import numpy as np
import pytest

from simkit.fluid.particles import ParticleSet
from simkit.fluid.sim import SimConfig, SimState
from simkit.media import (BACKGROUND, Image, MediaError, PARTICLE_COLOR,
                          encode_video, render_particles, write_ppm)


def read_ppm_reference(path):
    """Independent minimal P6 reader used as an oracle."""
    with open(path, "rb") as f:
        data = f.read()
    assert data[:3] == b"P6\n"
    rest = data[3:]
    dims, rest = rest.split(b"\n", 1)
    w, h = (int(t) for t in dims.split())
    maxval, raw = rest.split(b"\n", 1)
    assert maxval == b"255"
    assert len(raw) == w * h * 3
    return w, h, np.frombuffer(raw, dtype=np.uint8).reshape(h, w, 3)


def make_state(positions):
    cfg = SimConfig(nx=8, ny=8, dx=0.125)
    state = SimState(cfg, ParticleSet(np.asarray(positions, dtype=float).reshape(-1, 2)))
    from simkit.fluid.grid import mark_fluid_cells
    mark_fluid_cells(state.particles, state.grid)
    return state


def test_ppm_golden_1x1_red(tmp_path):
    img = Image(1, 1)
    img.pixels[0, 0] = (255, 0, 0)
    path = tmp_path / "red.ppm"
    write_ppm(img, path)
    data = path.read_bytes()
    assert data == b"P6\n1 1\n255\n\xff\x00\x00"
    assert len(data) == 14


def test_ppm_2x2_payload_size(tmp_path):
    img = Image(2, 2)
    path = tmp_path / "img.ppm"
    write_ppm(img, path)
    data = path.read_bytes()
    header = b"P6\n2 2\n255\n"
    assert data.startswith(header)
    assert len(data) - len(header) == 12


def test_ppm_roundtrip_with_reference_reader(tmp_path):
    state = make_state([[0.5, 0.5]])
    img = render_particles(state, 64, 48)
    path = tmp_path / "frame.ppm"
    write_ppm(img, path)
    w, h, pixels = read_ppm_reference(path)
    assert (w, h) == (64, 48)
    assert np.array_equal(pixels, img.pixels)


def test_render_empty_state_is_background_and_border():
    state = make_state(np.empty((0, 2)))
    img = render_particles(state, 64, 64)
    assert not (img.pixels == PARTICLE_COLOR).all(axis=2).any()
    assert (img.pixels[32, 32] == BACKGROUND).all()  # interior
    assert not (img.pixels[0, 0] == BACKGROUND).all()  # solid border is gray


def test_render_centered_particle_hits_center():
    state = make_state([[0.5, 0.5]])
    img = render_particles(state, 65, 65)
    center = img.pixels[30:35, 30:35]
    assert (center == PARTICLE_COLOR).all(axis=2).any()


def test_render_corner_particles_never_write_out_of_bounds():
    eps = 1e-9
    corners = [[eps, eps], [1.0 - eps, eps], [eps, 1.0 - eps],
               [1.0 - eps, 1.0 - eps], [0.5, eps], [eps, 0.5]]
    state = make_state(corners)
    img = render_particles(state, 32, 32)
    assert img.pixels.shape == (32, 32, 3)


def test_render_random_positions_buffer_intact():
    rng = np.random.default_rng(11)
    pos = rng.random((500, 2))
    state = make_state(pos)
    for w, h in ((16, 16), (33, 17), (256, 128)):
        img = render_particles(state, w, h)
        assert img.pixels.shape == (h, w, 3)
        assert len(img.to_bytes()) == w * h * 3


def test_render_rejects_empty_image():
    state = make_state([[0.5, 0.5]])
    with pytest.raises(MediaError):
        render_particles(state, 0, 10)


def test_encode_video_records_command(tmp_path):
    frames = []
    for i in range(1, 11):
        p = tmp_path / (f"frame_{i:06d}.ppm")
        p.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
        frames.append(p)
    calls = []
    result = encode_video(frames, tmp_path / "out.mp4", fps=30,
                          runner=lambda argv: calls.append(argv))
    assert result.encoded
    assert len(calls) == 1
    argv = calls[0]
    assert "30" in argv
    assert any(a.endswith("frame_%06d.ppm") for a in argv)
    assert str(tmp_path / "out.mp4") in argv


def test_encode_video_zero_frames_is_error(tmp_path):
    with pytest.raises(MediaError):
        encode_video([], tmp_path / "out.mp4", fps=30)


def test_encode_video_absent_encoder_degrades(tmp_path):
    p = tmp_path / "frame_000001.ppm"
    p.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")

    def missing(argv):
        raise FileNotFoundError(argv[0])

    result = encode_video([p], tmp_path / "out.mp4", fps=24, runner=missing)
    assert not result.encoded
    assert "unavailable" in result.reason
    assert p.exists()  # frames retained


def test_encode_video_rejects_non_sequence_names(tmp_path):
    p = tmp_path / "notaframe.ppm"
    p.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    with pytest.raises(MediaError):
        encode_video([p], tmp_path / "out.mp4", fps=30, runner=lambda a: None)
