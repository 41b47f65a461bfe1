"""Grids, region masks, exact grid distance transforms and image export.

A region mask is a boolean numpy array whose shape equals ``grid.shape``;
axis ``i`` of the array is coordinate ``i`` of the box.

Distance fields come in two flavours. :func:`unit_field` returns values in
*comparison units*: on an isotropic grid these are integers (l1 and l-inf
offsets, squared offsets for l2), so every comparison made by the dominance
predicate is exact. :func:`distance_field` converts them to real distances.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _dt
from .space import Box, Norm

MAX_DIM = 3


@dataclass(frozen=True, eq=False)
class Grid:
    """Pixel centres ``lo + index * pitch`` spanning a box, endpoints included."""

    lo: tuple
    hi: tuple
    shape: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        shape = tuple(int(n) for n in np.atleast_1d(self.shape))
        if len(shape) == 1 and len(lo) > 1:
            shape = shape * len(lo)
        if not (len(lo) == len(hi) == len(shape)):
            raise ValueError("grid bounds and shape disagree in dimension")
        if not 1 <= len(shape) <= MAX_DIM:
            raise ValueError(f"raster dimension must be 1..{MAX_DIM}")
        if any(n < 2 for n in shape):
            raise ValueError("every grid axis needs at least 2 pixels")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def over(cls, box: Box, n):
        return cls(box.lo, box.hi, n)

    @property
    def box(self):
        return Box(self.lo, self.hi)

    @property
    def m(self):
        return len(self.shape)

    @property
    def pitch(self):
        return np.array([(h - l) / (n - 1) for l, h, n in zip(self.lo, self.hi, self.shape)])

    @property
    def h(self):
        """Discretisation tolerance: largest pitch times sqrt(m)."""
        return float(self.pitch.max() * np.sqrt(self.m))

    @property
    def isotropic(self):
        p = self.pitch
        return bool(np.allclose(p, p[0], rtol=1e-12, atol=0))

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def cell_volume(self):
        return float(np.prod(self.pitch))

    @property
    def unit_weights(self):
        return np.ones(self.m) if self.isotropic else self.pitch

    @property
    def unit_scale(self):
        return float(self.pitch[0]) if self.isotropic else 1.0

    def axis(self, i):
        return self.lo[i] + np.arange(self.shape[i]) * self.pitch[i]

    def points(self):
        """All pixel centres as an (N, m) array in C order."""
        axes = [self.axis(i) for i in range(self.m)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.m)

    def index_to_point(self, idx):
        idx = np.asarray(idx)
        return np.asarray(self.lo) + idx * self.pitch

    def point_to_index(self, x):
        """Nearest pixel index (clipped to the grid)."""
        x = np.asarray(x, dtype=float)
        idx = np.rint((x - np.asarray(self.lo)) / self.pitch).astype(np.int64)
        return np.clip(idx, 0, np.asarray(self.shape) - 1)

    def empty(self):
        return np.zeros(self.shape, dtype=bool)

    def full(self):
        return np.ones(self.shape, dtype=bool)

    def mask_of_points(self, pts):
        """Mask of the pixels nearest to the given points (snapping)."""
        mask = self.empty()
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.size:
            idx = self.point_to_index(pts)
            mask[tuple(idx.T)] = True
        return mask

    def mask_where(self, predicate):
        """Mask of pixel centres satisfying a vectorised predicate on points."""
        return np.asarray(predicate(self.points()), dtype=bool).reshape(self.shape)

    def header(self):
        return (
            f"grid m={self.m} shape={'x'.join(map(str, self.shape))} "
            f"pitch={','.join(f'{p:.9g}' for p in self.pitch)} h={self.h:.9g}"
        )


# ---------------------------------------------------------------------------
# distance transforms


def _check(mask, grid):
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != grid.shape:
        raise ValueError(f"mask shape {mask.shape} does not match grid {grid.shape}")
    return mask


def unit_field_weighted(mask, norm, weights):
    """Separable transform of a bare boolean array with per-axis pixel weights."""
    norm = Norm(norm)
    f = np.where(mask, 0.0, np.inf)
    for axis, w in enumerate(weights):
        moved = np.moveaxis(f, axis, -1)
        rows = np.ascontiguousarray(moved.reshape(-1, moved.shape[-1]))
        if norm is Norm.L2:
            rows = _dt.l2sq_rows(rows, float(w))
        elif axis == 0:
            # sources are still 0/inf here: plain nearest-source distance
            rows = _dt.nearest_rows(rows, float(w))
        elif norm is Norm.L1:
            rows = _dt.l1_rows(rows, float(w))
        else:
            rows = _dt.linf_rows(rows, float(w))
        f = np.moveaxis(rows.reshape(moved.shape), -1, axis)
    return np.ascontiguousarray(f)


def _brute(mask, norm, weights, chunk=4096):
    src = np.argwhere(mask)
    out = np.full(mask.size, np.inf)
    if len(src) == 0:
        return out.reshape(mask.shape)
    allidx = np.indices(mask.shape).reshape(mask.ndim, -1).T
    for start in range(0, len(allidx), chunk):
        block = allidx[start : start + chunk]
        delta = np.abs(block[:, None, :] - src[None, :, :]) * weights
        if norm is Norm.L1:
            d = delta[..., 0]
            for i in range(1, mask.ndim):
                d = d + delta[..., i]
        elif norm is Norm.LINF:
            d = delta.max(axis=2)
        else:
            d = delta[..., 0] * delta[..., 0]
            for i in range(1, mask.ndim):
                d = d + delta[..., i] * delta[..., i]
        out[start : start + chunk] = d.min(axis=1)
    return out.reshape(mask.shape)


def unit_field(mask, grid: Grid, norm=Norm.L2, backend="separable"):
    """Grid-restricted distance to ``mask`` in comparison units (see module doc)."""
    mask = _check(mask, grid)
    norm = Norm(norm)
    if backend == "separable":
        return unit_field_weighted(mask, norm, grid.unit_weights)
    if backend == "brute":
        return _brute(mask, norm, grid.unit_weights)
    raise ValueError(f"unknown backend {backend!r}")


def units_to_distance(units, grid: Grid, norm=Norm.L2):
    units = np.asarray(units, dtype=float)
    if Norm(norm) is Norm.L2:
        return np.sqrt(units) * grid.unit_scale
    return units * grid.unit_scale


def distance_to_units(d, grid: Grid, norm=Norm.L2):
    d = np.asarray(d, dtype=float) / grid.unit_scale
    return d * d if Norm(norm) is Norm.L2 else d


def distance_field(mask, grid: Grid, norm=Norm.L2, backend="separable"):
    """min over set pixels y of ||x - y|| at every pixel centre x (inf if empty)."""
    return units_to_distance(unit_field(mask, grid, norm, backend), grid, norm)


def mask_distance(A, B, grid: Grid, norm=Norm.L2):
    """Grid-restricted d(A, B); +inf if either mask is empty."""
    A = _check(A, grid)
    B = _check(B, grid)
    if not A.any() or not B.any():
        return float("inf")
    return float(distance_field(B, grid, norm)[A].min())


# ---------------------------------------------------------------------------
# mask algebra


def _same_shape(*masks):
    shapes = {np.shape(m) for m in masks}
    if len(shapes) != 1:
        raise ValueError(f"mask shapes differ: {sorted(shapes)}")


def union(*masks):
    _same_shape(*masks)
    return np.logical_or.reduce([np.asarray(m, dtype=bool) for m in masks])


def intersection(*masks):
    _same_shape(*masks)
    return np.logical_and.reduce([np.asarray(m, dtype=bool) for m in masks])


def difference(a, b):
    _same_shape(a, b)
    return np.asarray(a, dtype=bool) & ~np.asarray(b, dtype=bool)


def complement(a):
    return ~np.asarray(a, dtype=bool)


def perimeter(mask):
    """Pixels of ``mask`` with a face neighbour (inside the grid) not in ``mask``."""
    mask = np.asarray(mask, dtype=bool)
    edge = np.zeros_like(mask)
    for axis in range(mask.ndim):
        for shift in (1, -1):
            nb = np.roll(mask, shift, axis=axis)
            # neighbours that wrapped around are not real neighbours
            sl = [slice(None)] * mask.ndim
            sl[axis] = 0 if shift == 1 else -1
            nb[tuple(sl)] = True
            edge |= mask & ~nb
    return edge


def dilate(mask, grid: Grid, radius, norm=Norm.L2, strict=False):
    """Pixels within ``radius`` of ``mask`` (``< radius`` when ``strict``)."""
    units = unit_field(mask, grid, norm)
    lim = distance_to_units(radius, grid, norm)
    return units < lim if strict else units <= lim


# ---------------------------------------------------------------------------
# files

_PALETTE = [
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200),
    (245, 130, 48), (145, 30, 180), (70, 240, 240), (240, 50, 230),
    (210, 245, 60), (250, 190, 212), (0, 128, 128), (220, 190, 255),
    (170, 110, 40), (255, 250, 200), (128, 0, 0), (170, 255, 195),
]


def palette(n):
    """``n`` distinct non-black colours, deterministic."""
    colours = list(_PALETTE[:n])
    i = 0
    while len(colours) < n:
        # golden-ratio hue walk; value kept high so nothing turns black
        hue = (0.618033988749895 * (i + len(_PALETTE))) % 1.0
        r, g, b = _hsv(hue, 0.65, 0.95)
        colours.append((r, g, b))
        i += 1
    return colours


def _hsv(h, s, v):
    i = int(h * 6) % 6
    f = h * 6 - int(h * 6)
    p, q, t = v * (1 - s), v * (1 - f * s), v * (1 - (1 - f) * s)
    r, g, b = [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)][i]
    return int(round(r * 255)), int(round(g * 255)), int(round(b * 255))


def render(masks, shape=None, colours=None):
    """RGB image (rows = decreasing second coordinate); uncovered pixels black.

    A pixel in several masks takes the colour of the lowest index.
    """
    masks = [np.asarray(m, dtype=bool) for m in masks]
    if masks:
        _same_shape(*masks)
        shape = masks[0].shape
    if shape is None or len(shape) != 2:
        raise ValueError("images need two-dimensional masks")
    colours = colours or palette(len(masks))
    img = np.zeros(shape + (3,), dtype=np.uint8)
    for m, c in reversed(list(zip(masks, colours))):
        img[m] = c
    # axis 0 is x (columns), axis 1 is y (rows, top = max y)
    return np.ascontiguousarray(img.transpose(1, 0, 2)[::-1])


def export_image(masks, path, shape=None, colours=None):
    """Write a binary PPM (P6) with one colour per region and black for neutral."""
    img = render(masks, shape=shape, colours=colours)
    h, w = img.shape[:2]
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    return path


def read_ppm(path):
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)


def dump_mask(mask, path):
    """Header line with the dimension and shape, then row-major 0/1 bytes."""
    mask = np.asarray(mask, dtype=bool)
    header = f"{mask.ndim} {' '.join(map(str, mask.shape))}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(mask.astype(np.uint8).tobytes(order="C"))
    return Path(path)


def load_mask(path):
    data = Path(path).read_bytes()
    head, body = data.split(b"\n", 1)
    fields = list(map(int, head.split()))
    m, shape = fields[0], tuple(fields[1:])
    if len(shape) != m:
        raise ValueError("corrupt mask header")
    arr = np.frombuffer(body, dtype=np.uint8)
    if arr.size != int(np.prod(shape)) or arr.max(initial=0) > 1:
        raise ValueError("corrupt mask body")
    return arr.reshape(shape).astype(bool)
