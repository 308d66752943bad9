# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; bit-for-bit twin of ``_kernels_py``."""
from libc.math cimport sqrt, floor, INFINITY
from libc.stdint cimport uint8_t, uint32_t, uint64_t, int32_t, int64_t

NAME = "cython"

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

ctypedef fused volume_t:
    uint8_t
    uint32_t


def census(const uint8_t[:, ::1] img, int ww, int wh, Py_ssize_t y0, Py_ssize_t y1,
           uint64_t[:, ::1] out):
    cdef Py_ssize_t height = img.shape[0], width = img.shape[1]
    cdef int rx = ww // 2, ry = wh // 2
    cdef Py_ssize_t y, x, yy, xx
    cdef int dy, dx, bit
    cdef uint8_t center, neighbor
    cdef uint64_t desc
    with nogil:
        for y in range(y0, y1):
            for x in range(width):
                center = img[y, x]
                desc = 0
                bit = 0
                for dy in range(-ry, ry + 1):
                    yy = y + dy
                    for dx in range(-rx, rx + 1):
                        if dy == 0 and dx == 0:
                            continue
                        xx = x + dx
                        if 0 <= yy < height and 0 <= xx < width:
                            neighbor = img[yy, xx]
                        else:
                            neighbor = 0
                        if neighbor < center:
                            desc |= (<uint64_t>1) << bit
                        bit += 1
                out[y, x] = desc


def hamming(const uint64_t[:, ::1] census_l, const uint64_t[:, ::1] census_r, int dmin,
            uint8_t[:, :, ::1] out, Py_ssize_t y0, Py_ssize_t y1):
    cdef Py_ssize_t width = census_l.shape[1], ndisp = out.shape[2]
    cdef Py_ssize_t y, x, k, d
    cdef uint64_t ref
    with nogil:
        for y in range(y0, y1):
            for x in range(width):
                ref = census_l[y, x]
                for k in range(ndisp):
                    d = dmin + k
                    if x - d < 0:
                        out[y, x, k] = 255
                    else:
                        out[y, x, k] = <uint8_t>__builtin_popcountll(ref ^ census_r[y, x - d])


def box_sums(const uint8_t[:, ::1] img, int ww, int wh):
    import numpy as np
    cdef Py_ssize_t height = img.shape[0], width = img.shape[1]
    sums_arr = np.zeros((height, width), dtype=np.int64)
    sq_arr = np.zeros((height, width), dtype=np.int64)
    cdef int64_t[:, ::1] sums = sums_arr
    cdef int64_t[:, ::1] sq = sq_arr
    cdef int rx = ww // 2, ry = wh // 2
    cdef Py_ssize_t y, x, yy, xx
    cdef int64_t s, q, v
    with nogil:
        for y in range(height):
            for x in range(width):
                s = 0
                q = 0
                for yy in range(y - ry, y + ry + 1):
                    if yy < 0 or yy >= height:
                        continue
                    for xx in range(x - rx, x + rx + 1):
                        if xx < 0 or xx >= width:
                            continue
                        v = img[yy, xx]
                        s += v
                        q += v * v
                sums[y, x] = s
                sq[y, x] = q
    return sums_arr, sq_arr


def ncc(const uint8_t[:, ::1] img_l, const uint8_t[:, ::1] img_r,
        const int64_t[:, ::1] sum_l, const int64_t[:, ::1] sq_l,
        const int64_t[:, ::1] sum_r, const int64_t[:, ::1] sq_r,
        int ww, int wh, int dmin, uint8_t[:, :, ::1] out, Py_ssize_t y0, Py_ssize_t y1):
    import numpy as np
    cdef Py_ssize_t height = img_l.shape[0], width = img_l.shape[1], ndisp = out.shape[2]
    cdef int rx = ww // 2, ry = wh // 2
    cdef int64_t n = ww * wh
    colsum_arr = np.zeros(width, dtype=np.int64)
    cdef int64_t[::1] colsum = colsum_arr
    cdef Py_ssize_t y, x, k, d, c, yy
    cdef int64_t cross, num, den, var_l, var_r
    cdef double phi, s
    with nogil:
        for y in range(y0, y1):
            for k in range(ndisp):
                d = dmin + k
                # vertical products for columns c in [d, width), zero elsewhere
                for c in range(width):
                    colsum[c] = 0
                    if c < d:
                        continue
                    for yy in range(y - ry, y + ry + 1):
                        if 0 <= yy < height:
                            colsum[c] += <int64_t>img_l[yy, c] * <int64_t>img_r[yy, c - d]
                for x in range(width):
                    if x - d < 0:
                        out[y, x, k] = 255
                        continue
                    cross = 0
                    for c in range(x - rx, x + rx + 1):
                        if 0 <= c < width:
                            cross += colsum[c]
                    num = n * cross - sum_l[y, x] * sum_r[y, x - d]
                    var_l = n * sq_l[y, x] - sum_l[y, x] * sum_l[y, x]
                    var_r = n * sq_r[y, x - d] - sum_r[y, x - d] * sum_r[y, x - d]
                    den = var_l * var_r
                    if den > 0:
                        phi = <double>num / sqrt(<double>den)
                    else:
                        phi = 0.0
                    if phi < 0.0:
                        phi = 0.0
                    s = 1.0 - phi
                    out[y, x, k] = <uint8_t>floor(255.0 * s + 0.5)


cdef inline void _step(const uint8_t* s, const uint32_t* prev, uint32_t* cur,
                       Py_ssize_t ndisp, int64_t p1, int64_t p2, bint normalize) noexcept nogil:
    cdef Py_ssize_t d
    cdef int64_t m = prev[0], best, v
    for d in range(1, ndisp):
        if prev[d] < m:
            m = prev[d]
    for d in range(ndisp):
        best = prev[d]
        v = m + p2
        if v < best:
            best = v
        if d > 0:
            v = <int64_t>prev[d - 1] + p1
            if v < best:
                best = v
        if d < ndisp - 1:
            v = <int64_t>prev[d + 1] + p1
            if v < best:
                best = v
        if normalize:
            best -= m
        cur[d] = <uint32_t>(s[d] + best)


cdef inline void _step_norm32(const uint8_t* s, const uint32_t* prev, uint32_t* cur,
                              Py_ssize_t ndisp, uint32_t p1, uint32_t p2) noexcept nogil:
    # normalized cells stay below 255 + p2, so 32-bit sums cannot wrap when p2 < 2**30
    cdef Py_ssize_t d
    cdef uint32_t m = prev[0], best, a, b, jump
    for d in range(1, ndisp):
        m = prev[d] if prev[d] < m else m
    jump = m + p2
    best = prev[0] if prev[0] < jump else jump
    if ndisp > 1:
        b = prev[1] + p1
        best = b if b < best else best
    cur[0] = s[0] + best - m
    for d in range(1, ndisp - 1):
        best = prev[d] if prev[d] < jump else jump
        a = prev[d - 1] + p1
        b = prev[d + 1] + p1
        a = a if a < b else b
        best = a if a < best else best
        cur[d] = s[d] + best - m
    if ndisp > 1:
        d = ndisp - 1
        best = prev[d] if prev[d] < jump else jump
        a = prev[d - 1] + p1
        best = a if a < best else best
        cur[d] = s[d] + best - m


cdef inline void _advance(const uint8_t* s, const uint32_t* prev, uint32_t* cur,
                          Py_ssize_t ndisp, int64_t p1, int64_t p2, bint normalize,
                          bint narrow) noexcept nogil:
    if narrow:
        _step_norm32(s, prev, cur, ndisp, <uint32_t>p1, <uint32_t>p2)
    else:
        _step(s, prev, cur, ndisp, p1, p2, normalize)


def aggregate_path(const uint8_t[:, :, ::1] cost, int dx, int dy, long p1, long p2,
                   bint normalize, uint32_t[:, :, ::1] out):
    cdef Py_ssize_t height = cost.shape[0], width = cost.shape[1], ndisp = cost.shape[2]
    cdef Py_ssize_t i, j, x, y, px, py, d, start, stop, step
    cdef bint narrow = normalize and 0 <= p1 < p2 < 1073741824
    with nogil:
        if dx != 0:
            if dx > 0:
                start = 0
                stop = width
                step = 1
            else:
                start = width - 1
                stop = -1
                step = -1
            i = start
            while i != stop:
                x = i
                px = x - dx
                for y in range(height):
                    py = y - dy
                    if px < 0 or px >= width or py < 0 or py >= height:
                        for d in range(ndisp):
                            out[y, x, d] = cost[y, x, d]
                    else:
                        _advance(&cost[y, x, 0], &out[py, px, 0], &out[y, x, 0], ndisp, p1, p2, normalize, narrow)
                i += step
        else:
            if dy > 0:
                start = 0
                stop = height
                step = 1
            else:
                start = height - 1
                stop = -1
                step = -1
            i = start
            while i != stop:
                y = i
                py = y - dy
                for x in range(width):
                    if py < 0 or py >= height:
                        for d in range(ndisp):
                            out[y, x, d] = cost[y, x, d]
                    else:
                        _advance(&cost[y, x, 0], &out[py, x, 0], &out[y, x, 0], ndisp, p1, p2, normalize, narrow)
                i += step


def wta(const volume_t[:, :, ::1] volume, int32_t[:, ::1] out, Py_ssize_t y0, Py_ssize_t y1):
    cdef Py_ssize_t width = volume.shape[1], ndisp = volume.shape[2]
    cdef Py_ssize_t y, x, k, arg
    cdef volume_t best
    with nogil:
        for y in range(y0, y1):
            for x in range(width):
                best = volume[y, x, 0]
                arg = 0
                for k in range(1, ndisp):
                    if volume[y, x, k] < best:
                        best = volume[y, x, k]
                        arg = k
                out[y, x] = <int32_t>arg


def right_wta(const uint32_t[:, :, ::1] agg, int dmin, int32_t[:, ::1] out,
              uint8_t[:, ::1] valid, Py_ssize_t y0, Py_ssize_t y1):
    cdef Py_ssize_t width = agg.shape[1], ndisp = agg.shape[2]
    cdef Py_ssize_t y, x, k, arg
    cdef uint32_t best
    cdef bint found
    with nogil:
        for y in range(y0, y1):
            for x in range(width):
                found = False
                arg = 0
                best = 0
                for k in range(ndisp):
                    if x + dmin + k >= width:
                        break
                    if not found or agg[y, x + dmin + k, k] < best:
                        best = agg[y, x + dmin + k, k]
                        arg = k
                        found = True
                out[y, x] = <int32_t>arg
                valid[y, x] = found


def subpixel(const uint32_t[:, :, ::1] agg, const int32_t[:, ::1] disp, int dmin,
             double[:, ::1] out, Py_ssize_t y0, Py_ssize_t y1):
    cdef Py_ssize_t width = agg.shape[1], ndisp = agg.shape[2]
    cdef Py_ssize_t y, x, k
    cdef int64_t cm, c0, cp, den
    cdef double offset
    with nogil:
        for y in range(y0, y1):
            for x in range(width):
                k = disp[y, x]
                offset = 0.0
                if 0 < k < ndisp - 1:
                    cm = agg[y, x, k - 1]
                    c0 = agg[y, x, k]
                    cp = agg[y, x, k + 1]
                    den = cm - 2 * c0 + cp
                    if den > 0:
                        offset = <double>(cm - cp) / (2.0 * <double>den)
                        if offset < -0.5:
                            offset = -0.5
                        elif offset > 0.5:
                            offset = 0.5
                out[y, x] = <double>(k + dmin) + offset


def median3x3(const double[:, ::1] values, double[:, ::1] out, Py_ssize_t y0, Py_ssize_t y1):
    cdef Py_ssize_t height = values.shape[0], width = values.shape[1]
    cdef Py_ssize_t y, x, yy, xx
    cdef int i, j, stage
    cdef double w[9]
    cdef double t
    with nogil:
        for y in range(y0, y1):
            for x in range(width):
                i = 0
                for yy in range(y - 1, y + 2):
                    for xx in range(x - 1, x + 2):
                        if 0 <= yy < height and 0 <= xx < width:
                            w[i] = values[yy, xx]
                        else:
                            w[i] = INFINITY
                        i += 1
                # five bubble passes settle the five largest into w[4..8]
                for stage in range(5):
                    for j in range(8 - stage):
                        if w[j] > w[j + 1]:
                            t = w[j]
                            w[j] = w[j + 1]
                            w[j + 1] = t
                out[y, x] = w[4]
