"""Hot-kernel backend selection.

The compiled Cython core (:mod:`tfblur._hot`) is preferred; the pure-NumPy
fallback (:mod:`tfblur._hot_py`) is selected when the extension is missing.
``TFBLUR_BACKEND=python`` forces the fallback, ``TFBLUR_BACKEND=cython``
makes a missing extension a hard error. Array dtype/contiguity coercion for
both backends happens here, once.
"""

import os

import numpy as np

from . import _hot_py

_requested = os.environ.get("TFBLUR_BACKEND", "auto").lower()

if _requested in ("python", "pure", "py"):
    _impl = _hot_py
    BACKEND = "python"
elif _requested in ("auto", "cython", "c"):
    try:
        from . import _hot as _impl

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        _impl = _hot_py
        BACKEND = "python"
else:
    raise ValueError(f"unknown TFBLUR_BACKEND value: {_requested!r}")


def _c128(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def extract_frames(x, window, hop, n_frames, circular):
    return _impl.extract_frames(_c128(x), _c128(window), int(hop),
                                int(n_frames), bool(circular))


def ola_synthesize(g, window, hop, out_len, circular):
    return _impl.ola_synthesize(_c128(g), _c128(window), int(hop),
                                int(out_len), bool(circular))


def conv2d_taps(tf, taps, anchor_t, anchor_f, circular_time):
    return _impl.conv2d_taps(_c128(tf), _f64(taps), int(anchor_t),
                             int(anchor_f), bool(circular_time))


def field_apply(tf, field, anchor_t, anchor_f, circular_time):
    return _impl.field_apply(_c128(tf), _f64(field), int(anchor_t),
                             int(anchor_f), bool(circular_time))
