"""Image preprocessing, augmentation, Canny edges, and HOG descriptors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import FormatError, GrayImage


@dataclass
class EdgeMap:
    """Binary {0,1} edge mask with the same dimensions as its source image."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def as_image(self) -> GrayImage:
        return GrayImage(self.pixels.copy())


@dataclass
class HogConfig:
    """Dalal-Triggs style HOG parameters (unsigned gradients by default)."""

    cell_size: int = 8
    block_size: int = 2
    bins: int = 9
    signed: bool = False

    def __post_init__(self):
        if self.cell_size < 2:
            raise ValueError("cell_size must be >= 2")
        if self.bins < 2:
            raise ValueError("bins must be >= 2")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")


def normalize_image(img: GrayImage) -> GrayImage:
    """Map an 8-bit-range [0,255] image into [0,1]."""
    return GrayImage(img.pixels / 255.0)


def resize_bilinear(img: GrayImage, out_w: int, out_h: int) -> GrayImage:
    """Resize with the half-pixel-center convention, clamped at borders."""
    if out_w < 1 or out_h < 1:
        raise ValueError("output dimensions must be >= 1")
    src = img.pixels
    h, w = src.shape
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0.0, w - 1.0)
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(int)
    y0 = np.floor(ys).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    top = src[np.ix_(y0, x0)] * (1 - fx) + src[np.ix_(y0, x1)] * fx
    bot = src[np.ix_(y1, x0)] * (1 - fx) + src[np.ix_(y1, x1)] * fx
    out = top * (1 - fy)[:, None] + bot * fy[:, None]
    return GrayImage(out)


def flip_h(img: GrayImage) -> GrayImage:
    return GrayImage(img.pixels[:, ::-1].copy())


def flip_v(img: GrayImage) -> GrayImage:
    return GrayImage(img.pixels[::-1, :].copy())


def rotate(img: GrayImage, degrees: float) -> GrayImage:
    """Rotate counter-clockwise about the image center.

    Multiples of 90 degrees are exact index permutations; anything else is
    inverse-mapped with bilinear sampling, out-of-bounds filled with 0.
    """
    deg = degrees % 360.0
    if deg % 90.0 == 0.0:
        return GrayImage(np.rot90(img.pixels, k=int(deg // 90)).copy())
    src = img.pixels
    h, w = src.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    theta = np.deg2rad(deg)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    yy, xx = np.meshgrid(np.arange(h) - cy, np.arange(w) - cx, indexing="ij")
    # Inverse map: rotate destination coordinates by -theta.
    sx = cos_t * xx + sin_t * yy + cx
    sy = -sin_t * xx + cos_t * yy + cy
    valid = (sx >= 0) & (sx <= w - 1) & (sy >= 0) & (sy <= h - 1)
    sx = np.clip(sx, 0, w - 1)
    sy = np.clip(sy, 0, h - 1)
    x0 = np.floor(sx).astype(int)
    y0 = np.floor(sy).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = sx - x0
    fy = sy - y0
    out = (
        src[y0, x0] * (1 - fx) * (1 - fy)
        + src[y0, x1] * fx * (1 - fy)
        + src[y1, x0] * (1 - fx) * fy
        + src[y1, x1] * fx * fy
    )
    out[~valid] = 0.0
    return GrayImage(out)


def brightness(img: GrayImage, factor: float) -> GrayImage:
    """Multiply intensities by factor and clip to [0,1]."""
    if factor <= 0:
        raise ValueError("brightness factor must be positive")
    return GrayImage(np.clip(img.pixels * factor, 0.0, 1.0))


def zoom(img: GrayImage, factor: float) -> GrayImage:
    """Center-crop a 1/factor window and resize back to the original size."""
    if factor < 1.0:
        raise ValueError("zoom factor must be >= 1")
    h, w = img.pixels.shape
    crop_w = max(1, int(round(w / factor)))
    crop_h = max(1, int(round(h / factor)))
    x0 = (w - crop_w) // 2
    y0 = (h - crop_h) // 2
    crop = GrayImage(img.pixels[y0 : y0 + crop_h, x0 : x0 + crop_w].copy())
    return resize_bilinear(crop, w, h)


def augment(img: GrayImage, spec: str) -> GrayImage:
    """Apply one augmentation spec: flip_h | flip_v | rotate=D | brightness=F | zoom=F."""
    name, _, arg = spec.partition("=")
    name = name.strip()
    if name == "flip_h":
        return flip_h(img)
    if name == "flip_v":
        return flip_v(img)
    if name == "rotate":
        return rotate(img, float(arg))
    if name == "brightness":
        return brightness(img, float(arg))
    if name == "zoom":
        return zoom(img, float(arg))
    raise ValueError(f"unknown augmentation spec: {spec!r}")


def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    radius = int(np.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(img: GrayImage, sigma: float) -> GrayImage:
    """Separable Gaussian blur with edge replication at borders."""
    k = gaussian_kernel_1d(sigma)
    out = ndimage.correlate1d(img.pixels, k, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    return GrayImage(out)


_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.float64)


def sobel_gradients(img: GrayImage) -> tuple[GrayImage, GrayImage]:
    """3x3 Sobel magnitude and angle (degrees in [0,180), borders replicated)."""
    if img.width < 3 or img.height < 3:
        raise ValueError("image must be at least 3x3")
    gx = ndimage.correlate(img.pixels, _SOBEL_X, mode="nearest")
    gy = ndimage.correlate(img.pixels, _SOBEL_Y, mode="nearest")
    mag = np.sqrt(gx * gx + gy * gy)
    ang = np.degrees(np.arctan2(gy, gx)) % 180.0
    return GrayImage(mag), GrayImage(ang)


def _nms(mag: np.ndarray, ang: np.ndarray) -> np.ndarray:
    """Non-maximum suppression with angles quantized to 0/45/90/135 degrees."""
    h, w = mag.shape
    padded = np.pad(mag, 1, mode="edge")
    direction = np.round(ang / 45.0).astype(int) % 4
    # Neighbor offsets along the gradient direction (y, x), image y grows down.
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    keep = np.zeros_like(mag, dtype=bool)
    for d, (dy, dx) in offsets.items():
        n1 = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        n2 = padded[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w]
        # strict toward the forward neighbor so tied plateaus thin to one line
        keep |= (direction == d) & (mag > n1) & (mag >= n2)
    return keep


def canny(img: GrayImage, sigma: float = 1.4, low: float = 0.05, high: float = 0.15) -> EdgeMap:
    """Canny edges: blur, Sobel, NMS, double threshold, 8-connected hysteresis."""
    if not (0 < low < high):
        raise ValueError("thresholds must satisfy 0 < low < high")
    blurred = gaussian_blur(img, sigma)
    mag_img, ang_img = sobel_gradients(blurred)
    mag, ang = mag_img.pixels, ang_img.pixels
    keep = _nms(mag, ang)
    strong = keep & (mag >= high)
    weak = keep & (mag >= low)
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    if n == 0:
        return EdgeMap(np.zeros_like(mag))
    strong_ids = np.unique(labels[strong])
    strong_ids = strong_ids[strong_ids > 0]
    edges = np.isin(labels, strong_ids) & weak
    return EdgeMap(edges.astype(np.float64))


def _cell_histograms(img: GrayImage, cfg: HogConfig) -> np.ndarray:
    """Per-cell orientation histograms with linear interpolation between bins."""
    gx = ndimage.correlate(img.pixels, _SOBEL_X, mode="nearest")
    gy = ndimage.correlate(img.pixels, _SOBEL_Y, mode="nearest")
    mag = np.sqrt(gx * gx + gy * gy)
    span = 360.0 if cfg.signed else 180.0
    ang = np.degrees(np.arctan2(gy, gx)) % span
    bin_width = span / cfg.bins
    pos = ang / bin_width
    lo = np.floor(pos).astype(int)
    frac = pos - lo
    h, w = mag.shape
    cy, cx = h // cfg.cell_size, w // cfg.cell_size
    hist = np.zeros((cy, cx, cfg.bins))
    rows = np.repeat(np.arange(cy), cfg.cell_size)
    cols = np.repeat(np.arange(cx), cfg.cell_size)
    cell_r = rows[:, None] * np.ones(w, dtype=int)[None, :]
    cell_c = np.ones(h, dtype=int)[:, None] * cols[None, :]
    np.add.at(hist, (cell_r, cell_c, lo % cfg.bins), mag * (1 - frac))
    np.add.at(hist, (cell_r, cell_c, (lo + 1) % cfg.bins), mag * frac)
    return hist


def _blocks(img: GrayImage, cfg: HogConfig, eps: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Return (clipped blocks before final renormalization, final blocks)."""
    h, w = img.pixels.shape
    if h % cfg.cell_size or w % cfg.cell_size:
        raise ValueError("image dimensions must be divisible by cell_size")
    hist = _cell_histograms(img, cfg)
    cy, cx, bins = hist.shape
    bs = cfg.block_size
    by, bx = cy - bs + 1, cx - bs + 1
    if by < 1 or bx < 1:
        raise ValueError("image too small for the configured block size")
    clipped = np.zeros((by, bx, bs * bs * bins))
    final = np.zeros_like(clipped)
    for i in range(by):
        for j in range(bx):
            v = hist[i : i + bs, j : j + bs, :].ravel()
            v1 = v / np.sqrt(np.dot(v, v) + eps * eps)
            c = np.minimum(v1, 0.2)
            clipped[i, j] = c
            final[i, j] = c / np.sqrt(np.dot(c, c) + eps * eps)
    return clipped, final


def hog(img: GrayImage, cfg: HogConfig | None = None) -> np.ndarray:
    """HOG descriptor: cell histograms, overlapping blocks, L2-Hys normalization."""
    cfg = cfg or HogConfig()
    _, final = _blocks(img, cfg)
    return final.ravel()


def hog_length(width: int, height: int, cfg: HogConfig) -> int:
    cy, cx = height // cfg.cell_size, width // cfg.cell_size
    by, bx = cy - cfg.block_size + 1, cx - cfg.block_size + 1
    return by * bx * cfg.block_size**2 * cfg.bins


# ---------------------------------------------------------------------------
# PGM / PPM I/O


def _read_pnm_header(data: bytes, magic: bytes) -> tuple[int, int, int]:
    if data[:2] != magic:
        raise FormatError(f"expected {magic.decode()} magic, got {data[:2]!r}")
    # Tokenizer tolerating whitespace and '#' comments.
    tokens = []
    i = 2
    while len(tokens) < 3:
        if i >= len(data):
            raise FormatError("truncated header")
        c = data[i : i + 1]
        if c == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
                j += 1
            tokens.append(data[i:j])
            i = j
    try:
        w, h, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise FormatError(f"non-numeric header token: {exc}") from exc
    if maxval != 255:
        raise FormatError(f"only maxval 255 supported, got {maxval}")
    if w < 1 or h < 1:
        raise FormatError("non-positive image dimensions")
    return w, h, i + 1  # +1 skips the single whitespace after maxval


def read_pgm(data: bytes) -> GrayImage:
    """Parse a binary P5 PGM (8-bit, maxval 255) into a [0,255] image."""
    w, h, offset = _read_pnm_header(data, b"P5")
    raster = data[offset : offset + w * h]
    if len(raster) < w * h:
        raise FormatError("truncated PGM raster")
    return GrayImage(np.frombuffer(raster, dtype=np.uint8).astype(np.float64).reshape(h, w))


def write_pgm(img: GrayImage) -> bytes:
    """Serialize to binary P5.  Inputs in [0,1] are scaled up; [0,255] passed through."""
    px = img.pixels
    if px.max() <= 1.0:
        px = px * 255.0
    quantized = np.clip(np.round(px), 0, 255).astype(np.uint8)
    header = f"P5\n{img.width} {img.height}\n255\n".encode()
    return header + quantized.tobytes()


def read_ppm(data: bytes) -> GrayImage:
    """Parse binary P6 PPM and convert to luminance (0.299R + 0.587G + 0.114B)."""
    w, h, offset = _read_pnm_header(data, b"P6")
    raster = data[offset : offset + 3 * w * h]
    if len(raster) < 3 * w * h:
        raise FormatError("truncated PPM raster")
    rgb = np.frombuffer(raster, dtype=np.uint8).astype(np.float64).reshape(h, w, 3)
    y = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    return GrayImage(y)


def read_image_file(path) -> GrayImage:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] == b"P5":
        return read_pgm(data)
    if data[:2] == b"P6":
        return read_ppm(data)
    raise FormatError(f"unsupported image format in {path}")
