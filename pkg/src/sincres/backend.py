"""Selects the compiled kernel core at import, numpy fallback otherwise.

``SINCRES_BACKEND=fallback`` forces the numpy path (used by the parity
tests and the backend benchmark); ``SINCRES_BACKEND=compiled`` makes a
missing extension a hard error instead of a silent downgrade.
"""

import os

import numpy as np

from . import fallback

_requested = os.environ.get("SINCRES_BACKEND", "").strip().lower()

_core = None
if _requested != "fallback":
    try:
        from . import _core  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise
        _core = None

_impl = _core if _core is not None else fallback


def backend_name():
    return "compiled" if _core is not None else "fallback"


def has_compiled():
    return _core is not None


def set_threads(n):
    _impl.set_num_threads(int(n))


def _check(x, name):
    if not x.flags.c_contiguous:
        x = np.ascontiguousarray(x)
    if x.dtype not in (np.float32, np.float64):
        raise TypeError(f"{name}: expected float32/float64, got {x.dtype}")
    return x


def conv1d_fwd(x, w, pad, impl=None):
    impl = impl or _impl
    x, w = _check(x, "conv1d"), _check(w, "conv1d")
    return impl.conv1d_fwd(x, w, pad)


def conv1d_bwd_w(x, dy, L, pad, impl=None):
    impl = impl or _impl
    x, dy = _check(x, "conv1d"), _check(dy, "conv1d")
    return impl.conv1d_bwd_w(x, dy, L, pad)


def conv1d_bwd_x(w, dy, N, pad, impl=None):
    impl = impl or _impl
    w, dy = _check(w, "conv1d"), _check(dy, "conv1d")
    return impl.conv1d_bwd_x(w, dy, N, pad)


def conv2d_fwd(x, w, sh, sw, ph, pw, impl=None):
    impl = impl or _impl
    x, w = _check(x, "conv2d"), _check(w, "conv2d")
    return impl.conv2d_fwd(x, w, sh, sw, ph, pw)


def conv2d_bwd_w(x, dy, R, S, sh, sw, ph, pw, impl=None):
    impl = impl or _impl
    x, dy = _check(x, "conv2d"), _check(dy, "conv2d")
    return impl.conv2d_bwd_w(x, dy, R, S, sh, sw, ph, pw)


def conv2d_bwd_x(w, dy, H, W, sh, sw, ph, pw, impl=None):
    impl = impl or _impl
    w, dy = _check(w, "conv2d"), _check(dy, "conv2d")
    return impl.conv2d_bwd_x(w, dy, H, W, sh, sw, ph, pw)
