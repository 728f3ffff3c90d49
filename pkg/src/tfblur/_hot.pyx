# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot inner loops.

Mirrors tfblur._hot_py function by function; see that module for the
argument contracts. Keep the two in sync.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t wrap(Py_ssize_t v, Py_ssize_t n) nogil:
    v = v % n
    if v < 0:
        v += n
    return v


def extract_frames(cnp.complex128_t[::1] x, cnp.complex128_t[::1] window,
                   Py_ssize_t hop, Py_ssize_t n_frames, bint circular):
    cdef Py_ssize_t length = x.shape[0]
    cdef Py_ssize_t win_len = window.shape[0]
    out_arr = np.zeros((n_frames, win_len), dtype=np.complex128)
    cdef cnp.complex128_t[:, ::1] out = out_arr
    cdef Py_ssize_t n, k, t
    with nogil:
        for n in range(n_frames):
            for k in range(win_len):
                t = n * hop + k
                if circular:
                    out[n, k] = x[wrap(t, length)] * window[k].conjugate()
                elif t < length:
                    out[n, k] = x[t] * window[k].conjugate()
    return out_arr


def ola_synthesize(cnp.complex128_t[:, ::1] g, cnp.complex128_t[::1] window,
                   Py_ssize_t hop, Py_ssize_t out_len, bint circular):
    cdef Py_ssize_t n_frames = g.shape[0]
    cdef Py_ssize_t n_channels = g.shape[1]
    cdef Py_ssize_t win_len = window.shape[0]
    out_arr = np.zeros(out_len, dtype=np.complex128)
    cdef cnp.complex128_t[::1] out = out_arr
    cdef Py_ssize_t n, k, t
    with nogil:
        for n in range(n_frames):
            for k in range(win_len):
                t = n * hop + k
                if circular:
                    out[wrap(t, out_len)] = out[wrap(t, out_len)] + \
                        window[k] * g[n, wrap(t, n_channels)]
                elif t < out_len:
                    out[t] = out[t] + window[k] * g[n, wrap(t, n_channels)]
    return out_arr


def conv2d_taps(cnp.complex128_t[:, ::1] tf, cnp.float64_t[:, ::1] taps,
                Py_ssize_t anchor_t, Py_ssize_t anchor_f, bint circular_time):
    cdef Py_ssize_t n_frames = tf.shape[0]
    cdef Py_ssize_t n_channels = tf.shape[1]
    cdef Py_ssize_t kt = taps.shape[0]
    cdef Py_ssize_t kf = taps.shape[1]
    out_arr = np.zeros((n_frames, n_channels), dtype=np.complex128)
    cdef cnp.complex128_t[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, n, m, src_n, dfm
    cdef Py_ssize_t dt
    cdef double w
    with nogil:
        for i in range(kt):
            dt = i - anchor_t
            if not circular_time and (dt <= -n_frames or dt >= n_frames):
                continue
            for j in range(kf):
                w = taps[i, j]
                if w == 0.0:
                    continue
                # split the circular frequency shift into two contiguous
                # runs so the inner loops carry no per-element wrap
                dfm = wrap(j - anchor_f, n_channels)
                for n in range(n_frames):
                    src_n = n - dt
                    if circular_time:
                        src_n = wrap(src_n, n_frames)
                    elif src_n < 0 or src_n >= n_frames:
                        continue
                    for m in range(dfm):
                        out[n, m] = out[n, m] + w * tf[src_n, m - dfm + n_channels]
                    for m in range(dfm, n_channels):
                        out[n, m] = out[n, m] + w * tf[src_n, m - dfm]
    return out_arr


def field_apply(cnp.complex128_t[:, ::1] tf, cnp.float64_t[:, :, :, ::1] field,
                Py_ssize_t anchor_t, Py_ssize_t anchor_f, bint circular_time):
    cdef Py_ssize_t n_frames = tf.shape[0]
    cdef Py_ssize_t n_channels = tf.shape[1]
    cdef Py_ssize_t kt = field.shape[2]
    cdef Py_ssize_t kf = field.shape[3]
    out_arr = np.zeros((n_frames, n_channels), dtype=np.complex128)
    cdef cnp.complex128_t[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, n, m, src_n, src_m
    cdef Py_ssize_t dt, df
    with nogil:
        for n in range(n_frames):
            for m in range(n_channels):
                for i in range(kt):
                    dt = i - anchor_t
                    src_n = n - dt
                    if circular_time:
                        src_n = wrap(src_n, n_frames)
                    elif src_n < 0 or src_n >= n_frames:
                        continue
                    for j in range(kf):
                        df = j - anchor_f
                        src_m = wrap(m - df, n_channels)
                        out[n, m] = out[n, m] + field[n, m, i, j] * tf[src_n, src_m]
    return out_arr
