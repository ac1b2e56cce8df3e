"""Pure-numpy convolution kernels, drop-in replacements for the compiled core.

Built on chunked im2col + BLAS matmul; chunking bounds the materialized
window buffers so memory stays flat regardless of signal length.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

# upper bound on any materialized im2col buffer
_CHUNK_BYTES = 64 << 20


def set_num_threads(n):  # BLAS threading is process-global; nothing to do here
    pass


def get_max_threads():
    return 1


def _pad_last(x, pad):
    if pad == 0:
        return x
    width = [(0, 0)] * (x.ndim - 1) + [(pad, pad)]
    return np.pad(x, width)


def conv1d_fwd(x, w, pad):
    """x (B,C,N), w (K,C,L), stride 1 -> y (B,K,N+2*pad-L+1)."""
    B, C, N = x.shape
    K, _, L = w.shape
    No = N + 2 * pad - L + 1
    if No < 1:
        raise ValueError("conv1d: kernel longer than padded input")
    xp = _pad_last(x, pad)
    win = sliding_window_view(xp, L, axis=2)  # (B, C, No, L) view
    wmat = w.reshape(K, C * L).T
    y = np.empty((B, K, No), dtype=x.dtype)
    chunk = max(1, _CHUNK_BYTES // (C * L * x.itemsize * max(B, 1)))
    for s in range(0, No, chunk):
        e = min(s + chunk, No)
        cols = np.ascontiguousarray(win[:, :, s:e].transpose(0, 2, 1, 3))
        cols = cols.reshape(B * (e - s), C * L)
        y[:, :, s:e] = (cols @ wmat).reshape(B, e - s, K).transpose(0, 2, 1)
    return y


def conv1d_bwd_w(x, dy, L, pad):
    B, C, N = x.shape
    K = dy.shape[1]
    No = dy.shape[2]
    xp = _pad_last(x, pad)
    win = sliding_window_view(xp, L, axis=2)
    dw = np.zeros((K, C * L), dtype=x.dtype)
    chunk = max(1, _CHUNK_BYTES // (C * L * x.itemsize))
    for b in range(B):
        for s in range(0, No, chunk):
            e = min(s + chunk, No)
            cols = np.ascontiguousarray(win[b, :, s:e].transpose(1, 0, 2))
            dw += dy[b, :, s:e] @ cols.reshape(e - s, C * L)
    return dw.reshape(K, C, L)


def conv1d_bwd_x(w, dy, N, pad):
    # transposed convolution == forward conv with swapped axes, flipped taps
    L = w.shape[2]
    wt = np.ascontiguousarray(w.transpose(1, 0, 2)[:, :, ::-1])
    return conv1d_fwd(dy, wt, L - 1 - pad)


def _pad_hw(x, ph, pw):
    if ph == 0 and pw == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))


def conv2d_fwd(x, w, sh, sw, ph, pw):
    """x (B,C,H,W), w (K,C,R,S) -> y (B,K,Ho,Wo)."""
    B, C, H, W = x.shape
    K, _, R, S = w.shape
    Ho = (H + 2 * ph - R) // sh + 1
    Wo = (W + 2 * pw - S) // sw + 1
    if Ho < 1 or Wo < 1:
        raise ValueError("conv2d: kernel larger than padded input")
    xp = _pad_hw(x, ph, pw)
    win = sliding_window_view(xp, (R, S), axis=(2, 3))[:, :, ::sh, ::sw]
    wmat = w.reshape(K, C * R * S).T
    y = np.empty((B, K, Ho, Wo), dtype=x.dtype)
    chunk = max(1, _CHUNK_BYTES // (C * R * S * Wo * x.itemsize * max(B, 1)))
    for s in range(0, Ho, chunk):
        e = min(s + chunk, Ho)
        cols = np.ascontiguousarray(win[:, :, s:e].transpose(0, 2, 3, 1, 4, 5))
        cols = cols.reshape(B * (e - s) * Wo, C * R * S)
        out = (cols @ wmat).reshape(B, e - s, Wo, K)
        y[:, :, s:e] = out.transpose(0, 3, 1, 2)
    return y


def conv2d_bwd_w(x, dy, R, S, sh, sw, ph, pw):
    B, C, H, W = x.shape
    K, _, Ho, Wo = dy.shape[0], None, dy.shape[2], dy.shape[3]
    K = dy.shape[1]
    xp = _pad_hw(x, ph, pw)
    win = sliding_window_view(xp, (R, S), axis=(2, 3))[:, :, ::sh, ::sw]
    dw = np.zeros((K, C * R * S), dtype=x.dtype)
    for b in range(B):
        cols = np.ascontiguousarray(win[b].transpose(1, 2, 0, 3, 4))
        cols = cols.reshape(Ho * Wo, C * R * S)
        dw += dy[b].reshape(K, Ho * Wo) @ cols
    return dw.reshape(K, C, R, S)


def conv2d_bwd_x(w, dy, H, W, sh, sw, ph, pw):
    K, C, R, S = w.shape
    B, _, Ho, Wo = dy.shape
    wmat = w.reshape(K, C * R * S)
    dxp = np.zeros((B, C, H + 2 * ph, W + 2 * pw), dtype=dy.dtype)
    for b in range(B):
        dcol = dy[b].reshape(K, Ho * Wo).T @ wmat  # (Ho*Wo, C*R*S)
        dcol = dcol.reshape(Ho, Wo, C, R, S)
        for r in range(R):
            for s in range(S):
                dxp[b, :, r:r + sh * Ho:sh, s:s + sw * Wo:sw] += (
                    dcol[:, :, :, r, s].transpose(2, 0, 1))
    if ph or pw:
        return np.ascontiguousarray(
            dxp[:, :, ph:ph + H, pw:pw + W])
    return dxp
