"""Frame rendering and bit-exact PPM output, plus optional video assembly
through an external encoder.

The encoder is invoked through an injectable runner so tests can record the
command instead of requiring ffmpeg; a missing encoder degrades to a notice,
never an error.
"""

import math
import os
import re
import shutil
import subprocess
from dataclasses import dataclass, field

import numpy as np

BACKGROUND = (18, 18, 26)
SOLID_GRAY = (96, 96, 96)
PARTICLE_COLOR = (90, 170, 255)

DEFAULT_ENCODER_TEMPLATE = ("ffmpeg -y -framerate {fps} -i {pattern} "
                            "-pix_fmt yuv420p {out}")


class MediaError(Exception):
    pass


@dataclass
class Image:
    width: int
    height: int
    pixels: np.ndarray = field(default=None)  # (height, width, 3) uint8

    def __post_init__(self):
        if self.pixels is None:
            self.pixels = np.zeros((self.height, self.width, 3), dtype=np.uint8)
        if self.pixels.shape != (self.height, self.width, 3):
            raise MediaError(f"pixel buffer shape {self.pixels.shape} does not "
                             f"match {self.height}x{self.width}x3")

    def fill(self, color):
        self.pixels[:, :] = color

    def to_bytes(self):
        return self.pixels.tobytes()


def render_particles(state, width: int, height: int) -> Image:
    """Rasterize a simulation state: dark background, solid cells gray,
    particles splatted as filled discs of radius max(1, width // 256)."""
    if width < 1 or height < 1:
        raise MediaError(f"image size must be positive, got {width}x{height}")
    img = Image(width, height)
    img.fill(BACKGROUND)

    cfg = state.config
    domain_w = cfg.nx * cfg.dx
    domain_h = cfg.ny * cfg.dx

    from .fluid.grid import SOLID
    solid_i, solid_j = np.nonzero(state.grid.label == SOLID)
    for i, j in zip(solid_i.tolist(), solid_j.tolist()):
        x0 = int(math.floor(i * cfg.dx / domain_w * width))
        x1 = int(math.floor((i + 1) * cfg.dx / domain_w * width))
        y0 = int(math.floor((1.0 - (j + 1) * cfg.dx / domain_h) * height))
        y1 = int(math.floor((1.0 - j * cfg.dx / domain_h) * height))
        img.pixels[max(y0, 0):min(y1, height), max(x0, 0):min(x1, width)] = SOLID_GRAY

    radius = max(1, width // 256)
    pos = state.particles.position
    px = np.floor(pos[:, 0] / domain_w * width).astype(np.int64)
    py = np.floor((1.0 - pos[:, 1] / domain_h) * height).astype(np.int64)
    h, w = height, width
    for cx, cy in zip(px.tolist(), py.tolist()):
        x_lo = max(cx - radius, 0)
        x_hi = min(cx + radius + 1, w)
        y_lo = max(cy - radius, 0)
        y_hi = min(cy + radius + 1, h)
        if x_lo >= x_hi or y_lo >= y_hi:
            continue
        for yy in range(y_lo, y_hi):
            dy = yy - cy
            for xx in range(x_lo, x_hi):
                dx = xx - cx
                if dx * dx + dy * dy <= radius * radius:
                    img.pixels[yy, xx] = PARTICLE_COLOR
    return img


def write_ppm(image: Image, path) -> None:
    """Binary PPM: "P6\\n<w> <h>\\n255\\n" + raw RGB rows."""
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    tmp = os.fspath(path) + ".tmp"
    with open(tmp, "wb") as f:
        f.write(header)
        f.write(image.to_bytes())
    os.replace(tmp, path)


def run_command(argv):
    """Default encoder runner; raises FileNotFoundError if absent."""
    subprocess.run(argv, check=True, capture_output=True)


@dataclass
class EncodeResult:
    encoded: bool
    reason: str = ""
    command: list = None


def encode_video(frame_paths, out_path, fps: int,
                 template: str = DEFAULT_ENCODER_TEMPLATE,
                 runner=run_command) -> EncodeResult:
    """Assemble numbered frames into a video via the external encoder.

    An absent encoder is a degradation, not an error: frames stay on disk
    and the result carries the reason.  Zero frames is an error.
    """
    frame_paths = [os.fspath(p) for p in frame_paths]
    if not frame_paths:
        raise MediaError("no frames to encode")
    pattern = _sequence_pattern(frame_paths)
    argv = template.format(fps=fps, pattern=pattern, out=os.fspath(out_path)).split()
    if runner is run_command and shutil.which(argv[0]) is None:
        return EncodeResult(False, f"encoder unavailable: {argv[0]} not on PATH",
                            argv)
    try:
        runner(argv)
    except FileNotFoundError:
        return EncodeResult(False, f"encoder unavailable: {argv[0]}", argv)
    return EncodeResult(True, command=argv)


def _sequence_pattern(frame_paths):
    """Derive a printf-style %06d pattern covering the given frame files."""
    rx = re.compile(r"^(.*?)(\d{6})(\.\w+)$")
    m = rx.match(frame_paths[0])
    if not m:
        raise MediaError(f"frame name {frame_paths[0]!r} is not a "
                         f"<prefix>NNNNNN<ext> sequence")
    prefix, _, ext = m.groups()
    for p in frame_paths:
        mp = rx.match(p)
        if not mp or mp.group(1) != prefix or mp.group(3) != ext:
            raise MediaError(f"frame {p!r} does not belong to sequence "
                             f"{prefix}%06d{ext}")
    return f"{prefix}%06d{ext}"
