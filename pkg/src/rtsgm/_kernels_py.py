"""Pure numpy implementations of the hot kernels.

Selected at import when the compiled extension is unavailable, and kept as
the reference twin the compiled kernels are tested against. Every function
here has the same signature and writes the same bits as its counterpart in
``_ckernels.pyx``. Row-range arguments ``y0, y1`` restrict the write region
so callers can split work into stripes.
"""
import numpy as np

NAME = "python"

_SATURATED = 255


def census(img, ww, wh, y0, y1, out):
    height, width = img.shape
    rx, ry = ww // 2, wh // 2
    padded = np.zeros((height + 2 * ry, width + 2 * rx), dtype=np.uint8)
    padded[ry:ry + height, rx:rx + width] = img
    center = img[y0:y1]
    desc = np.zeros((y1 - y0, width), dtype=np.uint64)
    bit = 0
    for dy in range(wh):
        for dx in range(ww):
            if dy == ry and dx == rx:
                continue
            neighbor = padded[y0 + dy:y1 + dy, dx:dx + width]
            desc |= (neighbor < center).astype(np.uint64) << np.uint64(bit)
            bit += 1
    out[y0:y1] = desc


def _popcount64(words):
    # bytewise lookup keeps this exact for all 64 bits
    table = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)
    as_bytes = words.view(np.uint8).reshape(words.shape + (8,))
    return table[as_bytes].sum(axis=-1, dtype=np.uint16)


def hamming(census_l, census_r, dmin, out, y0, y1):
    ndisp = out.shape[2]
    width = census_l.shape[1]
    rows_l = census_l[y0:y1]
    rows_r = census_r[y0:y1]
    for k in range(ndisp):
        d = dmin + k
        plane = np.full((y1 - y0, width), _SATURATED, dtype=np.uint8)
        if d < width:
            plane[:, d:] = _popcount64(rows_l[:, d:] ^ rows_r[:, :width - d])
        out[y0:y1, :, k] = plane


def box_sums(img, ww, wh):
    """Zero-margin window sums of intensities and squared intensities (int64)."""
    values = img.astype(np.int64)
    return _box(values, ww, wh), _box(values * values, ww, wh)


def _box(values, ww, wh):
    height, width = values.shape
    rx, ry = ww // 2, wh // 2
    integral = np.zeros((height + 2 * ry + 1, width + 2 * rx + 1), dtype=np.int64)
    integral[ry + 1:ry + 1 + height, rx + 1:rx + 1 + width] = values
    integral = integral.cumsum(axis=0).cumsum(axis=1)
    return (
        integral[wh:wh + height, ww:ww + width]
        - integral[:height, ww:ww + width]
        - integral[wh:wh + height, :width]
        + integral[:height, :width]
    )


def ncc(img_l, img_r, sum_l, sq_l, sum_r, sq_r, ww, wh, dmin, out, y0, y1):
    ndisp = out.shape[2]
    height, width = img_l.shape
    n = ww * wh
    ry = wh // 2
    # product rows needed by the stripe, clipped to the image
    r0, r1 = max(0, y0 - ry), min(height, y1 + ry)
    left = img_l.astype(np.int64)
    right = img_r.astype(np.int64)
    var_l = n * sq_l - sum_l * sum_l
    var_r = n * sq_r - sum_r * sum_r
    for k in range(ndisp):
        d = dmin + k
        plane = np.full((y1 - y0, width), _SATURATED, dtype=np.uint8)
        if d < width:
            prod = np.zeros((height, width), dtype=np.int64)
            prod[r0:r1, d:] = left[r0:r1, d:] * right[r0:r1, :width - d]
            cross = _box(prod, ww, wh)[y0:y1, d:]
            sl = sum_l[y0:y1, d:]
            sr = sum_r[y0:y1, :width - d]
            num = n * cross - sl * sr
            den = var_l[y0:y1, d:] * var_r[y0:y1, :width - d]
            positive = den > 0
            phi = np.zeros(num.shape, dtype=np.float64)
            phi[positive] = num[positive] / np.sqrt(den[positive].astype(np.float64))
            s = 1.0 - np.maximum(phi, 0.0)
            plane[:, d:] = np.floor(255.0 * s + 0.5).astype(np.uint8)
        out[y0:y1, :, k] = plane


def aggregate_path(cost, dx, dy, p1, p2, normalize, out):
    height, width, ndisp = cost.shape
    if dx != 0:
        order = range(width) if dx > 0 else range(width - 1, -1, -1)
        get = lambda a, i: a[:, i]  # noqa: E731
        other = height
        shift = dy
    else:
        order = range(height) if dy > 0 else range(height - 1, -1, -1)
        get = lambda a, i: a[i]  # noqa: E731
        other = width
        shift = 0
    prev = None
    for i in order:
        s = get(cost, i).astype(np.int64)
        if prev is None:
            cur = s
        else:
            # prev line pixel j - shift feeds pixel j; pixels with no predecessor restart
            src = np.arange(other) - shift
            has_prev = (src >= 0) & (src < other)
            lp = prev[np.clip(src, 0, other - 1)]
            m = lp.min(axis=1, keepdims=True)
            best = np.minimum(lp, m + p2)
            if ndisp > 1:
                best[:, 1:] = np.minimum(best[:, 1:], lp[:, :-1] + p1)
                best[:, :-1] = np.minimum(best[:, :-1], lp[:, 1:] + p1)
            if normalize:
                best = best - m
            cur = np.where(has_prev[:, None], s + best, s)
        if dx != 0:
            out[:, i] = cur
        else:
            out[i] = cur
        prev = cur


def wta(volume, out, y0, y1):
    out[y0:y1] = np.argmin(volume[y0:y1], axis=2)


def right_wta(agg, dmin, out, valid, y0, y1):
    width, ndisp = agg.shape[1], agg.shape[2]
    rows = agg[y0:y1].astype(np.int64)
    empty = np.iinfo(np.int64).max
    best = np.full((y1 - y0, width), empty, dtype=np.int64)
    arg = np.zeros((y1 - y0, width), dtype=np.int32)
    # right pixel x reads left column x + d; strict < keeps the smallest d on ties
    for k in range(ndisp):
        d = dmin + k
        if d >= width:
            break
        cand = rows[:, d:, k]
        region = best[:, :width - d]
        better = cand < region
        region[better] = cand[better]
        arg[:, :width - d][better] = k
    out[y0:y1] = arg
    valid[y0:y1] = best != empty


def subpixel(agg, disp, dmin, out, y0, y1):
    ndisp = agg.shape[2]
    k = disp[y0:y1].astype(np.int64)
    result = (k + dmin).astype(np.float64)
    inner = (k > 0) & (k < ndisp - 1)
    if ndisp >= 3 and inner.any():
        rows = agg[y0:y1].astype(np.int64)
        kk = np.clip(k, 1, ndisp - 2)
        c_minus = np.take_along_axis(rows, (kk - 1)[..., None], axis=2)[..., 0]
        c_zero = np.take_along_axis(rows, kk[..., None], axis=2)[..., 0]
        c_plus = np.take_along_axis(rows, (kk + 1)[..., None], axis=2)[..., 0]
        den = c_minus - 2 * c_zero + c_plus
        use = inner & (den > 0)
        offset = np.zeros(k.shape, dtype=np.float64)
        offset[use] = (c_minus[use] - c_plus[use]) / (2.0 * den[use])
        offset = np.clip(offset, -0.5, 0.5)
        result = result + offset
    out[y0:y1] = result


def median3x3(values, out, y0, y1):
    """Bubble-network median over sentinel-padded 3x3 neighborhoods.

    ``values`` holds +inf at invalid pixels; out-of-image neighbors read as +inf.
    """
    height, width = values.shape
    padded = np.full((height + 2, width + 2), np.inf)
    padded[1:-1, 1:-1] = values
    wires = [
        padded[y0 + dy:y1 + dy, dx:dx + width].copy() for dy in range(3) for dx in range(3)
    ]
    for stage in range(5):
        for j in range(8 - stage):
            lo = np.minimum(wires[j], wires[j + 1])
            hi = np.maximum(wires[j], wires[j + 1])
            wires[j], wires[j + 1] = lo, hi
    out[y0:y1] = wires[4]
