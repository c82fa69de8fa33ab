import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wmiltrack import BoundingBox, BoundsError, Frame, InvalidInputError, integral_image, rect_sum
from wmiltrack.geometry import LatticeDisk, enumerate_positions, subsample_positions

from conftest import box_sum, random_frame


def lattice_oracle(center, inner, outer, step, sample_size, frame_size):
    """Brute-force scan over a generous window, kept in (y, x) order."""
    w, h = sample_size
    fw, fh = frame_size
    cx, cy = center
    ox, oy = round(cx), round(cy)
    reach = int(outer) + 2 * step + 2
    out = []
    for j in range(-reach, reach + 1):
        for i in range(-reach, reach + 1):
            x, y = ox + i * step, oy + j * step
            d = math.sqrt((x - cx) ** 2 + (y - cy) ** 2)
            if outer == 0:
                ok = i == 0 and j == 0
            else:
                ok = inner <= d < outer
            if ok and 0 <= x <= fw - w and 0 <= y <= fh - h:
                out.append((x, y))
    out.sort(key=lambda p: (p[1], p[0]))
    return out


def test_integral_of_2x2_frame():
    ii = integral_image(Frame(np.array([[1, 2], [3, 4]], dtype=np.uint8)))
    assert ii.table.shape == (3, 3)
    assert ii.table[2, 2] == 10
    assert rect_sum(ii, BoundingBox(1, 0, 1, 2)) == 6
    assert rect_sum(ii, BoundingBox(0, 0, 2, 2)) == 10
    assert (ii.table[0] == 0).all() and (ii.table[:, 0] == 0).all()


def test_rect_sum_matches_direct_summation(rng):
    for _ in range(20):
        frame = random_frame(rng, int(rng.integers(1, 40)), int(rng.integers(1, 40)))
        ii = integral_image(frame)
        for _ in range(50):
            w = int(rng.integers(1, frame.width + 1))
            h = int(rng.integers(1, frame.height + 1))
            x = int(rng.integers(0, frame.width - w + 1))
            y = int(rng.integers(0, frame.height - h + 1))
            assert rect_sum(ii, BoundingBox(x, y, w, h)) == box_sum(frame.pixels, x, y, w, h)


def test_full_frame_sum_is_exact_at_saturation():
    frame = Frame(np.full((480, 640), 255, dtype=np.uint8))
    ii = integral_image(frame)
    assert rect_sum(ii, BoundingBox(0, 0, 640, 480)) == 255 * 640 * 480


def test_rect_outside_frame_raises(rng):
    ii = integral_image(random_frame(rng, 10, 10))
    with pytest.raises(BoundsError):
        rect_sum(ii, BoundingBox(5, 5, 6, 1))
    with pytest.raises(BoundsError):
        rect_sum(ii, BoundingBox(-1, 0, 2, 2))


def test_empty_frame_rejected():
    with pytest.raises(InvalidInputError):
        Frame(np.zeros((0, 5), dtype=np.uint8))
    with pytest.raises(InvalidInputError):
        integral_image(np.zeros((3, 0)))


def test_box_needs_positive_size():
    with pytest.raises(InvalidInputError):
        BoundingBox(0, 0, 0, 4)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32 - 1),
       st.data())
def test_sum_is_additive_over_splits(width, height, seed, data):
    frame = random_frame(np.random.default_rng(seed), width, height)
    ii = integral_image(frame)
    w = data.draw(st.integers(1, width))
    h = data.draw(st.integers(1, height))
    x = data.draw(st.integers(0, width - w))
    y = data.draw(st.integers(0, height - h))
    whole = rect_sum(ii, BoundingBox(x, y, w, h))
    assert whole >= 0
    if w > 1:
        k = data.draw(st.integers(1, w - 1))
        left = rect_sum(ii, BoundingBox(x, y, k, h))
        right = rect_sum(ii, BoundingBox(x + k, y, w - k, h))
        assert left + right == whole


def test_disk_radius_4_has_45_positions():
    pos = enumerate_positions(LatticeDisk((50, 50), 0, 4), (10, 10), (200, 200))
    assert len(pos) == 45
    assert (50, 50) in {tuple(p) for p in pos}


def test_degenerate_disk_is_the_center():
    pos = enumerate_positions(LatticeDisk((7, 9), 0, 0), (4, 4), (40, 40))
    assert pos.tolist() == [[7, 9]]


def test_annulus_matches_brute_force():
    pos = enumerate_positions(LatticeDisk((60, 50), 8, 22), (20, 20), (160, 120))
    assert pos.tolist() == [list(p) for p in lattice_oracle((60, 50), 8, 22, 1, (20, 20), (160, 120))]
    d = np.hypot(pos[:, 0] - 60, pos[:, 1] - 50)
    assert d.min() >= 8 and d.max() < 22


@settings(max_examples=80, deadline=None)
@given(st.floats(0, 60), st.floats(0, 60), st.floats(0, 6), st.floats(0, 14),
       st.integers(1, 4), st.integers(1, 20), st.integers(1, 20))
def test_lattice_properties(cx, cy, inner, extra, step, w, h):
    outer = inner + extra
    frame_size = (70, 60)
    pos = enumerate_positions(LatticeDisk((cx, cy), inner, outer, step), (w, h), frame_size)
    expected = lattice_oracle((cx, cy), inner, outer, step, (w, h), frame_size)
    assert pos.tolist() == [list(p) for p in expected]
    keys = [(int(y), int(x)) for x, y in pos]
    assert keys == sorted(set(keys))
    if len(pos):
        assert pos[:, 0].min() >= 0 and pos[:, 1].min() >= 0
        assert pos[:, 0].max() <= frame_size[0] - w and pos[:, 1].max() <= frame_size[1] - h


def test_disk_fully_outside_frame_is_empty():
    pos = enumerate_positions(LatticeDisk((500, 500), 0, 5), (10, 10), (100, 100))
    assert pos.shape == (0, 2)


def test_invalid_disks_rejected():
    with pytest.raises(InvalidInputError):
        LatticeDisk((0, 0), 0, 4, step=0)
    with pytest.raises(InvalidInputError):
        LatticeDisk((0, 0), 5, 4)


def test_subsample_keeps_scan_order_and_uniqueness(rng):
    ring = enumerate_positions(LatticeDisk((60, 60), 8, 22), (20, 20), (200, 200))
    picked = subsample_positions(ring, 50, rng)
    assert len(picked) == 50
    rows = {tuple(p) for p in ring}
    assert all(tuple(p) in rows for p in picked)
    assert len({tuple(p) for p in picked}) == 50
    keys = [(y, x) for x, y in picked.tolist()]
    assert keys == sorted(keys)


def test_subsample_short_ring_returns_everything(rng):
    pos = np.array([[1, 2], [3, 4]])
    assert subsample_positions(pos, 50, rng).tolist() == pos.tolist()
