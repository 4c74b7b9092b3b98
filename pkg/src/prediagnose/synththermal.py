"""Deterministic synthetic thermal dataset: vessel band plus optional clot hotspot."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import FormatError, GrayImage, Rng
from .imageproc import read_pgm, write_pgm

BACKGROUND = 0.2


@dataclass
class ThermalConfig:
    width: int = 128
    height: int = 128
    vessel_width: int = 12
    base_temp: float = 0.45
    axial_gradient: float = 0.0008
    clot_amplitude: float = 0.25
    clot_sigma: float = 6.0
    noise_sigma: float = 0.03
    clot_margin: int = 16

    def __post_init__(self):
        if min(self.width, self.height, self.vessel_width, self.clot_margin) <= 0:
            raise ValueError("dimensions, vessel_width and clot_margin must be positive")
        if self.base_temp <= 0 or self.clot_sigma <= 0 or self.noise_sigma < 0:
            raise ValueError("base_temp and clot_sigma must be positive, noise_sigma >= 0")
        if self.clot_sigma >= min(self.width, self.height) / 4:
            raise ValueError("clot_sigma too large for the image")
        if 2 * self.clot_margin >= min(self.width, self.height):
            raise ValueError("clot_margin leaves no room for hotspot centers")


def render_scene(cfg: ThermalConfig, vessel_col: int, clot_center: tuple[int, int] | None) -> np.ndarray:
    """Noise-free scene: background, vessel band with axial gradient, optional hotspot.

    The vessel has a transverse half-cosine profile: full vessel temperature at
    the band center, blending into the background at the band edges.
    """
    rows = np.arange(cfg.height, dtype=np.float64)[:, None]
    cols = np.arange(cfg.width, dtype=np.float64)[None, :]
    dx = cols - vessel_col
    profile = np.where(
        np.abs(dx) <= cfg.vessel_width / 2.0,
        np.cos(np.pi * dx / cfg.vessel_width),
        0.0,
    )
    vessel_temp = cfg.base_temp + cfg.axial_gradient * rows
    field = BACKGROUND + (vessel_temp - BACKGROUND) * profile
    if clot_center is not None:
        cx, cy = clot_center
        field = field + cfg.clot_amplitude * np.exp(
            -((cols - cx) ** 2 + (rows - cy) ** 2) / (2.0 * cfg.clot_sigma**2)
        )
    return field


def _draw_scene_params(cfg: ThermalConfig, rng: Rng) -> tuple[int, tuple[int, int]]:
    # Hotspot row is drawn for both labels so the noise stream stays aligned
    # between a positive and a negative sample generated from the same seed.
    lo_x, hi_x = cfg.clot_margin, cfg.width - 1 - cfg.clot_margin
    lo_y, hi_y = cfg.clot_margin, cfg.height - 1 - cfg.clot_margin
    col = lo_x + rng.randint(hi_x - lo_x + 1)
    cy = lo_y + rng.randint(hi_y - lo_y + 1)
    return col, (col, cy)


def generate_sample(cfg: ThermalConfig, label: int, rng: Rng) -> GrayImage:
    """One synthetic thermal frame; label=1 adds the clot hotspot."""
    col, center = _draw_scene_params(cfg, rng)
    field = render_scene(cfg, col, center if label == 1 else None)
    if cfg.noise_sigma > 0:
        field = field + cfg.noise_sigma * rng.gaussian_array(cfg.width * cfg.height).reshape(
            cfg.height, cfg.width
        )
    return GrayImage(np.clip(field, 0.0, 1.0))


def generate_frame_sequence(cfg: ThermalConfig, label: int, n_frames: int, rng: Rng) -> list[GrayImage]:
    """Static-camera sequence: one scene, independent per-frame noise."""
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    col, center = _draw_scene_params(cfg, rng)
    field = render_scene(cfg, col, center if label == 1 else None)
    frames = []
    for _ in range(n_frames):
        noisy = field
        if cfg.noise_sigma > 0:
            noisy = field + cfg.noise_sigma * rng.gaussian_array(cfg.width * cfg.height).reshape(
                cfg.height, cfg.width
            )
        frames.append(GrayImage(np.clip(noisy, 0.0, 1.0)))
    return frames


def generate_dataset(
    cfg: ThermalConfig, n: int, positive_fraction: float, rng: Rng
) -> list[tuple[GrayImage, int]]:
    """Exactly round(n*positive_fraction) positives, order shuffled by rng."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 <= positive_fraction <= 1.0):
        raise ValueError("positive_fraction must be in [0, 1]")
    n_pos = int(np.floor(n * positive_fraction + 0.5))
    labels = [1] * n_pos + [0] * (n - n_pos)
    rng.shuffle(labels)
    return [(generate_sample(cfg, lab, rng), lab) for lab in labels]


# ---------------------------------------------------------------------------
# Directory layout: PGM files plus manifest.csv (filename,label,seed)


def write_thermal_dataset(out_dir, cfg: ThermalConfig, n: int, positive_fraction: float, seed: int,
                          frames: int = 0) -> None:
    """Write PGMs and a manifest.  frames > 0 writes per-sample sequence subdirs.

    The manifest seed column records the generator state just before each
    sample so any row can be regenerated independently.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if n < 1:
        raise ValueError("n must be >= 1")
    n_pos = int(np.floor(n * positive_fraction + 0.5))
    labels = [1] * n_pos + [0] * (n - n_pos)
    rng = Rng(seed)
    rng.shuffle(labels)
    rows = []
    for i, lab in enumerate(labels):
        state = rng.state
        if frames > 0:
            seq_dir = out / f"seq{i:04d}"
            seq_dir.mkdir(exist_ok=True)
            for j, frame in enumerate(generate_frame_sequence(cfg, lab, frames, rng)):
                name = f"seq{i:04d}/frame{j:02d}.pgm"
                (out / name).write_bytes(write_pgm(frame))
                rows.append((name, lab, state))
        else:
            name = f"sample{i:04d}.pgm"
            (out / name).write_bytes(write_pgm(generate_sample(cfg, lab, rng)))
            rows.append((name, lab, state))
    with open(out / "manifest.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["filename", "label", "seed"])
        writer.writerows(rows)


def load_manifest(data_dir) -> list[tuple[str, int]]:
    """Read manifest.csv; returns (filename, label) rows."""
    path = Path(data_dir) / "manifest.csv"
    if not path.exists():
        raise FormatError(f"missing manifest.csv in {data_dir}")
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "filename" not in reader.fieldnames or "label" not in reader.fieldnames:
            raise FormatError("manifest.csv must have filename and label columns")
        for rec in reader:
            try:
                rows.append((rec["filename"], int(rec["label"])))
            except (TypeError, ValueError) as exc:
                raise FormatError(f"bad manifest row {rec!r}") from exc
    if not rows:
        raise FormatError("empty manifest")
    return rows


def load_thermal_dataset(data_dir) -> list[tuple[GrayImage, int]]:
    base = Path(data_dir)
    samples = []
    for name, label in load_manifest(base):
        samples.append((read_pgm((base / name).read_bytes()), label))
    return samples
