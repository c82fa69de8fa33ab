"""Sub-region layouts and sparse rectangle features.

Each feature is a signed sum of 2-4 rectangles drawn from one sub-region
of the sample window, i.e. one row of a very sparse measurement matrix
whose nonzero entries are +sqrt(rho) or -sqrt(rho).
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import BoundsError, ConfigError, InvalidInputError

POSITIVE_SIGN_PROB = 0.78
MIN_RECTS = 2
MAX_RECTS = 4


@dataclass(frozen=True)
class SubRegionLayout:
    sample_size: tuple
    subregion_size: tuple
    positions: tuple
    occluded_flags: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "sample_size", tuple(int(v) for v in self.sample_size))
        object.__setattr__(self, "subregion_size", tuple(int(v) for v in self.subregion_size))
        object.__setattr__(self, "positions", tuple(tuple(int(v) for v in p) for p in self.positions))
        if self.occluded_flags is None:
            object.__setattr__(self, "occluded_flags", (False,) * len(self.positions))
        W, H = self.sample_size
        w, h = self.subregion_size
        for x, y in self.positions:
            if not (0 <= x <= W - w and 0 <= y <= H - h):
                raise InvalidInputError(f"sub-region at ({x}, {y}) does not fit the sample")

    @property
    def n_regions(self):
        return len(self.positions)


@dataclass(frozen=True)
class FeatureTemplate:
    """Rectangles ``(x, y, w, h)`` are relative to the sub-region origin."""

    reg: int
    rects: tuple
    weights: tuple

    def __post_init__(self):
        if not MIN_RECTS <= len(self.rects) <= MAX_RECTS:
            raise InvalidInputError(f"a template needs 2-4 rectangles, got {len(self.rects)}")
        if len(self.rects) != len(self.weights):
            raise InvalidInputError("one weight per rectangle required")


@dataclass(frozen=True, eq=False)
class FeaturePool:
    templates: tuple
    layout: SubRegionLayout
    rho: float
    # flattened rectangle tables, offsets relative to the sample origin
    _rx: np.ndarray = field(init=False, repr=False)
    _ry: np.ndarray = field(init=False, repr=False)
    _rw: np.ndarray = field(init=False, repr=False)
    _rh: np.ndarray = field(init=False, repr=False)
    _rweight: np.ndarray = field(init=False, repr=False)
    _starts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "templates", tuple(self.templates))
        rx, ry, rw, rh, wt, starts = [], [], [], [], [], []
        for t in self.templates:
            if not 0 <= t.reg < self.layout.n_regions:
                raise InvalidInputError(f"template refers to missing sub-region {t.reg}")
            px, py = self.layout.positions[t.reg]
            starts.append(len(rx))
            for (x, y, w, h), weight in zip(t.rects, t.weights):
                rx.append(px + x)
                ry.append(py + y)
                rw.append(w)
                rh.append(h)
                wt.append(weight)
        set_ = object.__setattr__
        set_(self, "_rx", np.array(rx, dtype=np.int64))
        set_(self, "_ry", np.array(ry, dtype=np.int64))
        set_(self, "_rw", np.array(rw, dtype=np.int64))
        set_(self, "_rh", np.array(rh, dtype=np.int64))
        set_(self, "_rweight", np.array(wt, dtype=np.float64))
        set_(self, "_starts", np.array(starts, dtype=np.int64))

    def __len__(self):
        return len(self.templates)

    @property
    def regions(self):
        """Sub-region index of every template, as an int array."""
        return np.array([t.reg for t in self.templates], dtype=np.int64)

    def _rect_slice(self, indices):
        if indices is None:
            return (self._rx, self._ry, self._rw, self._rh, self._rweight, self._starts)
        ends = np.append(self._starts[1:], len(self._rx))
        parts = [np.arange(self._starts[i], ends[i]) for i in indices]
        sel = np.concatenate(parts)
        counts = np.array([len(p) for p in parts], dtype=np.int64)
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
        return (self._rx[sel], self._ry[sel], self._rw[sel], self._rh[sel],
                self._rweight[sel], starts)


def _check_sizes(sample_size, subregion_size):
    W, H = sample_size
    w, h = subregion_size
    if w < 1 or h < 1 or w > W or h > H:
        raise ConfigError(f"sub-region {w}x{h} does not fit sample {W}x{H}",
                          field="subregion_fraction")


def generate_layout(sample_size, subregion_size, n_s, rng):
    """Place ``n_s`` sub-regions uniformly over the valid anchor range."""
    _check_sizes(sample_size, subregion_size)
    if n_s < 1:
        raise ConfigError("n_s must be >= 1", field="n_s")
    W, H = sample_size
    w, h = subregion_size
    xs = rng.integers(0, W - w + 1, size=n_s)
    ys = rng.integers(0, H - h + 1, size=n_s)
    return SubRegionLayout(sample_size, subregion_size, tuple(zip(xs.tolist(), ys.tolist())))


def rect_size_bounds(extent, minimum, beta_min, beta_max):
    """Integer range of allowed rectangle sizes along one axis.

    ``max(minimum, beta_min * extent) <= size <= beta_max * extent``.
    """
    lo = math.ceil(max(minimum, beta_min * extent) - 1e-9)
    hi = math.floor(beta_max * extent + 1e-9)
    return lo, min(hi, extent)


def sample_signs(rng, size):
    """+1 with probability 0.78, -1 otherwise."""
    return np.where(rng.random(size) < POSITIVE_SIGN_PROB, 1.0, -1.0)


def generate_pool(layout, m, rng, beta_min=0.3, beta_max=0.7, w_min=3, h_min=3):
    if m < 1:
        raise ConfigError("m_features must be >= 1", field="m_features")
    w, h = layout.subregion_size
    wlo, whi = rect_size_bounds(w, w_min, beta_min, beta_max)
    hlo, hhi = rect_size_bounds(h, h_min, beta_min, beta_max)
    if wlo > whi:
        raise ConfigError(f"no rectangle width satisfies [{wlo}, {whi}] in a {w}px sub-region",
                          field="beta_min")
    if hlo > hhi:
        raise ConfigError(f"no rectangle height satisfies [{hlo}, {hhi}] in a {h}px sub-region",
                          field="beta_min")

    W, H = layout.sample_size
    rho = W * H / 4.0
    magnitude = math.sqrt(rho)
    regs = rng.integers(0, layout.n_regions, size=m)
    nrs = rng.integers(MIN_RECTS, MAX_RECTS + 1, size=m)
    total = int(nrs.sum())
    rws = rng.integers(wlo, whi + 1, size=total)
    rhs = rng.integers(hlo, hhi + 1, size=total)
    rxs = rng.integers(0, w - rws + 1)
    rys = rng.integers(0, h - rhs + 1)
    weights = sample_signs(rng, total) * magnitude

    templates = []
    k = 0
    for reg, nr in zip(regs.tolist(), nrs.tolist()):
        rects = tuple((int(rxs[j]), int(rys[j]), int(rws[j]), int(rhs[j])) for j in range(k, k + nr))
        templates.append(FeatureTemplate(reg, rects, tuple(weights[k:k + nr].tolist())))
        k += nr
    return FeaturePool(tuple(templates), layout, rho)


def extract_features(ii, origins, pool, indices=None):
    """Project sample windows onto the feature pool.

    ``origins`` is one ``(x, y)`` anchor or an ``(N, 2)`` array of them.
    Returns a vector of length M (or ``len(indices)``) for a single
    anchor, otherwise an ``(N, M)`` matrix.
    """
    origins = np.asarray(origins, dtype=np.int64)
    single = origins.ndim == 1
    origins = origins.reshape(-1, 2)
    W, H = pool.layout.sample_size
    ox, oy = origins[:, 0], origins[:, 1]
    if len(origins) and (ox.min() < 0 or oy.min() < 0
                         or ox.max() > ii.width - W or oy.max() > ii.height - H):
        raise BoundsError("sample window outside the frame")

    rx, ry, rw, rh, rweight, starts = pool._rect_slice(indices)
    stride = ii.table.shape[1]
    flat = ii.table.ravel()
    x1 = ox[:, None] + rx[None, :]
    y1 = oy[:, None] + ry[None, :]
    top = y1 * stride
    bottom = (y1 + rh[None, :]) * stride
    x2 = x1 + rw[None, :]
    sums = flat[bottom + x2] - flat[top + x2] - flat[bottom + x1] + flat[top + x1]
    if sums.shape[1] == 0:
        values = np.zeros((len(origins), 0))
    else:
        values = np.add.reduceat(sums * rweight[None, :], starts, axis=1)
    return values[0] if single else values


def legacy_matrix_entry(rng, rho, size=None):
    """Draw entries of the symmetric very sparse projection matrix.

    -sqrt(rho) and +sqrt(rho) each with probability 1/(2 rho), 0 otherwise.
    """
    if rho < 1:
        raise InvalidInputError("rho must be >= 1")
    u = rng.random(size)
    mag = math.sqrt(rho)
    out = np.where(u < 0.5 / rho, -mag, np.where(u < 1.0 / rho, mag, 0.0))
    return float(out) if size is None else out


def dumps_pool(pool):
    """Text form of a pool: header, sub-region anchors, one template per line."""
    W, H = pool.layout.sample_size
    w, h = pool.layout.subregion_size
    lines = [
        "feature-pool 1",
        f"sample_size {W} {H}",
        f"subregion_size {w} {h}",
        f"rho {pool.rho!r}",
        f"regions {pool.layout.n_regions}",
    ]
    lines += [f"{x} {y}" for x, y in pool.layout.positions]
    lines.append(f"templates {len(pool)}")
    for t in pool.templates:
        cells = [str(t.reg), str(len(t.rects))]
        for (x, y, rw, rh), weight in zip(t.rects, t.weights):
            cells += [str(x), str(y), str(rw), str(rh), repr(weight)]
        lines.append(" ".join(cells))
    return "\n".join(lines) + "\n"


def loads_pool(text):
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    try:
        if rows[0] != ["feature-pool", "1"]:
            raise InvalidInputError("not a feature-pool file")
        sample = (int(rows[1][1]), int(rows[1][2]))
        sub = (int(rows[2][1]), int(rows[2][2]))
        rho = float(rows[3][1])
        n_reg = int(rows[4][1])
        positions = tuple((int(r[0]), int(r[1])) for r in rows[5:5 + n_reg])
        n_t = int(rows[5 + n_reg][1])
        templates = []
        for r in rows[6 + n_reg:6 + n_reg + n_t]:
            reg, nr = int(r[0]), int(r[1])
            cells = r[2:]
            rects = tuple(tuple(int(v) for v in cells[5 * j:5 * j + 4]) for j in range(nr))
            weights = tuple(float(cells[5 * j + 4]) for j in range(nr))
            templates.append(FeatureTemplate(reg, rects, weights))
    except (IndexError, ValueError) as exc:
        raise InvalidInputError(f"malformed feature-pool text: {exc}") from exc
    if len(templates) != n_t:
        raise InvalidInputError("feature-pool text is truncated")
    return FeaturePool(tuple(templates), SubRegionLayout(sample, sub, positions), rho)
