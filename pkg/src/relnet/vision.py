"""Visual cue streams from grayscale frame sequences.

Four per-pixel quantities feed the relation network: intensity ``I``,
spatial gradient ``G`` (Sobel), temporal derivative ``V`` (frame
difference) and optical flow ``F`` (single-scale Lucas-Kanade). They obey
the brightness-constancy identity ``-V = F . G``; projecting the flow on
the gradient direction makes it the scalar relation
``-v = f_par * g_mag``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError, SizeError

EPS_GRAD = 1e-3
EPS_EIG = 1e-4


@dataclass
class Frame:
    """Row-major grayscale image with intensities in ``[0, 1]``."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=float)
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise SizeError(f"frame must be a non-empty 2-D array, got {self.pixels.shape}")
        if np.any(self.pixels < 0) or np.any(self.pixels > 1) or not np.all(np.isfinite(self.pixels)):
            raise ParameterError("frame intensities must lie in [0, 1]")

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]


@dataclass
class FrameSequence:
    frames: list
    truth: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.frames)


def _pixels(frame):
    return frame.pixels if isinstance(frame, Frame) else np.asarray(frame, dtype=float)


def sobel_gradient(frame):
    """3x3 Sobel derivatives scaled so a unit-slope ramp gives 1.

    Border pixels see replicated edge values. Returns ``(gx, gy)``.
    """
    img = _pixels(frame)
    if img.ndim != 2 or min(img.shape) < 3:
        raise SizeError(f"frame of shape {img.shape} is smaller than the 3x3 kernel")
    p = np.pad(img, 1, mode="edge")
    # separable form: [1 2 1]/4 smoothing across, [-1 0 1]/2 difference along;
    # differencing last makes flat regions exactly zero
    sy = 0.25 * (p[:-2, :] + 2.0 * p[1:-1, :] + p[2:, :])
    sx = 0.25 * (p[:, :-2] + 2.0 * p[:, 1:-1] + p[:, 2:])
    gx = 0.5 * (sy[:, 2:] - sy[:, :-2])
    gy = 0.5 * (sx[2:, :] - sx[:-2, :])
    return gx, gy


def temporal_derivative(prev, next):
    a, b = _pixels(prev), _pixels(next)
    if a.shape != b.shape:
        raise SizeError(f"frame shapes differ: {a.shape} vs {b.shape}")
    return b - a


def _box_sum(img, window):
    r = window // 2
    padded = np.pad(img, r, mode="edge")
    c = np.cumsum(np.cumsum(padded, axis=0), axis=1)
    c = np.pad(c, ((1, 0), (1, 0)))
    h, w = img.shape
    s = c[window:window + h, window:window + w] - c[:h, window:window + w] \
        - c[window:window + h, :w] + c[:h, :w]
    return s


def lucas_kanade(prev, next, window=5, eps_eig=EPS_EIG):
    """Single-scale Lucas-Kanade flow.

    Spatial gradients are taken on the mean of the two frames so that they
    are centred in time with the frame difference. Where the windowed
    structure tensor's smaller eigenvalue is below ``eps_eig`` only the
    normal flow along the local gradient is recoverable; those pixels get
    that solution and are flagged. The tensor is summed over the window.

    Returns
    -------
    flow : array (h, w, 2)
        ``(fx, fy)`` in pixels per frame.
    aperture : bool array (h, w)
        True where the normal-flow fallback was used.
    """
    a, b = _pixels(prev), _pixels(next)
    if a.shape != b.shape:
        raise SizeError(f"frame shapes differ: {a.shape} vs {b.shape}")
    if window < 3 or window % 2 == 0:
        raise ParameterError(f"window must be an odd integer >= 3, got {window}")
    gx, gy = sobel_gradient(0.5 * (a + b))
    v = b - a
    sxx = _box_sum(gx * gx, window)
    sxy = _box_sum(gx * gy, window)
    syy = _box_sum(gy * gy, window)
    bx = _box_sum(gx * v, window)
    by = _box_sum(gy * v, window)
    tr = sxx + syy
    det = sxx * syy - sxy * sxy
    lam_min = 0.5 * tr - np.sqrt(np.maximum(0.25 * tr * tr - det, 0.0))
    aperture = lam_min < eps_eig
    safe = np.where(aperture, 1.0, det)
    fx = -(syy * bx - sxy * by) / safe
    fy = -(sxx * by - sxy * bx) / safe
    g2 = gx * gx + gy * gy
    textured = g2 > EPS_GRAD * EPS_GRAD
    normal = np.where(textured, -v / np.where(textured, g2, 1.0), 0.0)
    fx = np.where(aperture, normal * gx, fx)
    fy = np.where(aperture, normal * gy, fy)
    return np.stack([fx, fy], axis=-1), aperture


def _texture_components(wavelength):
    # incommensurate wavelengths in three orientations give a full-rank tensor
    angles = np.deg2rad([0.0, 60.0, 120.0])
    lams = wavelength * np.array([1.0, np.sqrt(2.0), np.sqrt(3.0)])
    phases = np.array([0.0, 1.0, 2.0])
    return angles, lams, phases


def synth_sequence(kind, velocity, frames, size=(64, 64), wavelength=20.0, mix=0.0):
    """Translating patterns with analytic ``I, G, V, F``.

    Parameters
    ----------
    kind : {"translating_sine", "translating_texture"}
    velocity : (vx, vy)
        Pixels per frame.
    frames : int
    size : (width, height)
    wavelength : float
        Base wavelength in pixels, at least 4.
    mix : float
        For ``translating_sine``, weight of ``y`` in the phase; 0 gives a
        pattern varying along ``x`` only.
    """
    w, h = size
    if frames < 1 or w < 3 or h < 3:
        raise SizeError(f"invalid geometry: {frames} frames of {size}")
    if wavelength < 4:
        raise ParameterError(f"wavelength must be at least 4 px, got {wavelength}")
    vx, vy = map(float, velocity)
    y, x = np.mgrid[0:h, 0:w].astype(float)
    imgs, gs, vs = [], [], []
    for t in range(frames):
        xs, ys = x - vx * t, y - vy * t
        if kind == "translating_sine":
            k = 2 * np.pi / wavelength
            phase = k * (xs + ys * mix)
            img = 0.5 + 0.5 * np.sin(phase)
            c = 0.5 * k * np.cos(phase)
            gx, gy = c, c * mix
        elif kind == "translating_texture":
            img = np.full_like(x, 0.5)
            gx = np.zeros_like(x)
            gy = np.zeros_like(x)
            for ang, lam, ph in zip(*_texture_components(wavelength)):
                k = 2 * np.pi / lam
                dx, dy = np.cos(ang), np.sin(ang)
                phase = k * (dx * xs + dy * ys) + ph
                img += np.sin(phase) / 6.0
                c = k * np.cos(phase) / 6.0
                gx += c * dx
                gy += c * dy
        else:
            raise ParameterError(f"unknown sequence kind {kind!r}")
        imgs.append(Frame(np.clip(img, 0.0, 1.0)))
        gs.append(np.stack([gx, gy], axis=-1))
        vs.append(-(vx * gx + vy * gy))
    truth = {
        "I": np.array([f.pixels for f in imgs]),
        "G": np.array(gs),
        "V": np.array(vs),
        "F": np.array([vx, vy]),
    }
    return FrameSequence(imgs, truth)


STREAM_COLUMNS = ("i", "g_mag", "v", "f_par")


def extract_streams(seq, sampling="all_pixels", k=None, seed=0, window=5, eps_grad=EPS_GRAD):
    """Per-pixel ``(i, g_mag, v, f_par)`` rows from consecutive frame pairs.

    ``i`` and the gradient come from the mean of each pair. Pixels whose
    gradient magnitude does not exceed ``eps_grad`` are textureless and
    dropped. With ``sampling="random_k"`` at most ``k`` pixels per pair are
    drawn with a generator seeded by ``seed``. A border of
    ``window // 2 + 1`` pixels is skipped because its neighbourhoods are
    padded rather than observed.
    """
    frames = seq.frames if isinstance(seq, FrameSequence) else list(seq)
    if len(frames) < 2:
        raise SizeError("need at least two frames")
    if sampling not in ("all_pixels", "random_k"):
        raise ParameterError(f"unknown sampling {sampling!r}")
    if sampling == "random_k" and (k is None or k < 1):
        raise ParameterError("random_k sampling needs k >= 1")
    rng = np.random.default_rng(seed)
    cols = {c: [] for c in STREAM_COLUMNS}
    for prev, nxt in zip(frames[:-1], frames[1:]):
        a, b = _pixels(prev), _pixels(nxt)
        mean = 0.5 * (a + b)
        gx, gy = sobel_gradient(mean)
        v = temporal_derivative(a, b)
        flow, _ = lucas_kanade(a, b, window)
        g_mag = np.hypot(gx, gy)
        keep = g_mag > eps_grad
        m = window // 2 + 1
        keep[:m, :] = keep[-m:, :] = False
        keep[:, :m] = keep[:, -m:] = False
        idx = np.flatnonzero(keep.ravel())
        if sampling == "random_k" and idx.size > k:
            idx = np.sort(rng.choice(idx, size=k, replace=False))
        gm = g_mag.ravel()[idx]
        f_par = (flow[..., 0].ravel()[idx] * gx.ravel()[idx]
                 + flow[..., 1].ravel()[idx] * gy.ravel()[idx]) / gm
        cols["i"].append(mean.ravel()[idx])
        cols["g_mag"].append(gm)
        cols["v"].append(v.ravel()[idx])
        cols["f_par"].append(f_par)
    return {c: np.concatenate(vals) for c, vals in cols.items()}


def read_pgm(path):
    """Read a binary (P5) 8-bit PGM into a :class:`Frame`."""
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ParameterError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise ParameterError(f"{path}: only 8-bit PGM (maxval 255) is supported")
    pos += 1  # single whitespace before the raster
    raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return Frame(raster.reshape(height, width) / 255.0)


def write_pgm(path, frame):
    img = np.round(_pixels(frame) * 255.0).astype(np.uint8)
    h, w = img.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + img.tobytes())
