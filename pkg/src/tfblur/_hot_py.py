"""Pure-NumPy implementations of the hot inner loops.

Used when the compiled extension ``tfblur._hot`` is unavailable or when
``TFBLUR_BACKEND=python`` is set. Must stay numerically interchangeable with
the Cython versions; ``tests/test_backend.py`` enforces agreement and
``benchmarks/bench_core.py`` compares throughput.

All functions expect C-contiguous arrays of the documented dtypes; the
coercion happens once in :mod:`tfblur.backend`.
"""

import numpy as np


def extract_frames(x, window, hop, n_frames, circular):
    """Gather windowed frames: seg[n, k] = x[n*hop + k] * conj(window[k]).

    Time indices wrap modulo len(x) in circular mode and read as zero past
    the end otherwise. Returns an (n_frames, len(window)) complex array.
    """
    length = x.shape[0]
    win_len = window.shape[0]
    offs = hop * np.arange(n_frames)[:, None] + np.arange(win_len)[None, :]
    if circular:
        seg = x[offs % length]
    else:
        seg = np.zeros((n_frames, win_len), dtype=np.complex128)
        valid = offs < length
        seg[valid] = x[offs[valid]]
    return seg * np.conj(window)[None, :]


def ola_synthesize(g, window, hop, out_len, circular):
    """Overlap-add: out[n*hop + k] += window[k] * g[n, (n*hop + k) % M].

    Output positions wrap modulo out_len in circular mode and are dropped
    past the end otherwise. Returns a complex vector of length out_len.
    """
    n_frames, n_channels = g.shape
    win_len = window.shape[0]
    pos = hop * np.arange(n_frames)[:, None] + np.arange(win_len)[None, :]
    vals = window[None, :] * g[np.arange(n_frames)[:, None], pos % n_channels]
    out = np.zeros(out_len, dtype=np.complex128)
    if circular:
        np.add.at(out, pos % out_len, vals)
    else:
        keep = pos < out_len
        np.add.at(out, pos[keep], vals[keep])
    return out


def conv2d_taps(tf, taps, anchor_t, anchor_f, circular_time):
    """2D tap convolution: out[n, m] = sum_{i,j} taps[i,j] * tf[n-(i-at), m-(j-af)].

    The frequency axis always wraps (DFT bins are cyclic); the time axis
    wraps in circular mode and reads as zero off-grid otherwise.
    """
    n_frames, n_channels = tf.shape
    kt, kf = taps.shape
    out = np.zeros((n_frames, n_channels), dtype=np.complex128)
    for i in range(kt):
        dt = i - anchor_t
        if not circular_time and not (-n_frames < dt < n_frames):
            continue
        for j in range(kf):
            w = taps[i, j]
            if w == 0.0:
                continue
            rolled = np.roll(tf, j - anchor_f, axis=1)
            if circular_time:
                out += w * np.roll(rolled, dt, axis=0)
            elif dt >= 0:
                out[dt:] += w * rolled[: n_frames - dt]
            else:
                out[: n_frames + dt] += w * rolled[-dt:]
    return out


def field_apply(tf, field, anchor_t, anchor_f, circular_time):
    """Position-dependent correlation: out[z] = sum_w field[z, w] * tf[z - w].

    field has shape (n_frames, n_channels, kt, kf); tap (i, j) addresses the
    offset (i - anchor_t, j - anchor_f). Axis topology as in conv2d_taps.
    """
    n_frames, n_channels = tf.shape
    kt, kf = field.shape[2], field.shape[3]
    out = np.zeros((n_frames, n_channels), dtype=np.complex128)
    for i in range(kt):
        dt = i - anchor_t
        if not circular_time and not (-n_frames < dt < n_frames):
            continue
        for j in range(kf):
            rolled = np.roll(tf, j - anchor_f, axis=1)
            if circular_time:
                shifted = np.roll(rolled, dt, axis=0)
            else:
                shifted = np.zeros_like(rolled)
                if dt >= 0:
                    shifted[dt:] = rolled[: n_frames - dt]
                else:
                    shifted[: n_frames + dt] = rolled[-dt:]
            out += field[:, :, i, j] * shifted
    return out
