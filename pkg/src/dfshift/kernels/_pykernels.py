"""Pure numpy implementations of the hot kernels.

Every function takes C-contiguous float64 arrays and returns a fresh array;
inputs are never written.  The Cython module mirrors these signatures and
must agree bit-for-bit.
"""

import numpy as np


def temporal_shift(x, i, reverse=False):
    """Shift channel bands along the frame axis of ``x`` shaped (G, T, C, P).

    Forward: band ``[0, i)`` comes from frame ``t-1`` and band ``[i, 2i)``
    from frame ``t+1``; the frame that has no neighbour gets zeros.  With
    ``reverse=True`` the two directions are exchanged, which is the adjoint.
    """
    out = x.copy()
    if i == 0:
        return out
    lo, hi = (slice(0, i), slice(i, 2 * i))
    if reverse:
        lo, hi = hi, lo
    # band `lo` moves forward in time, band `hi` moves backward
    out[:, 1:, lo] = x[:, :-1, lo]
    out[:, 0, lo] = 0.0
    out[:, :-1, hi] = x[:, 1:, hi]
    out[:, -1, hi] = 0.0
    return out


def modality_rotate(x, k, step=1):
    """Rotate the last ``k`` channels across the leading modality axis.

    ``x`` is shaped (N, F, C, P); output modality ``p`` receives the band of
    modality ``(p + step) mod N``.
    """
    out = x.copy()
    if k == 0:
        return out
    c = x.shape[2]
    out[:, :, c - k :] = np.roll(x[:, :, c - k :], -step, axis=0)
    return out


def dual_shift(x, k, i, reverse=False):
    """Fused modality rotation + temporal shift on ``x`` shaped (N, G, T, C, P).

    The two bands are disjoint, so the two permutations commute and one pass
    realizes either composition order.  ``reverse=True`` is the adjoint.
    """
    n, g, t, c, p = x.shape
    out = temporal_shift(x.reshape(n * g, t, c, p), i, reverse=reverse).reshape(x.shape)
    if k and n > 1:
        step = -1 if reverse else 1
        out[:, :, :, c - k :] = np.roll(x[:, :, :, c - k :], -step, axis=0)
    return out


def im2col(x, stride):
    """Unfold 3x3 zero-padded patches, one row per output pixel.

    (n, C, H, W) -> (n*Ho*Wo, C*9); row ``(b, oy, ox)``, column ``(c, ky, kx)``.
    """
    n, c, h, w = x.shape
    ho = (h - 1) // stride + 1
    wo = (w - 1) // stride + 1
    xp = np.zeros((n, c, h + 2, w + 2))
    xp[:, :, 1:-1, 1:-1] = x
    cols = np.empty((n, ho, wo, c, 9))
    for ky in range(3):
        for kx in range(3):
            patch = xp[:, :, ky : ky + stride * (ho - 1) + 1 : stride, kx : kx + stride * (wo - 1) + 1 : stride]
            cols[..., ky * 3 + kx] = patch.transpose(0, 2, 3, 1)
    return cols.reshape(n * ho * wo, c * 9)


def col2im(cols, c, h, w, stride):
    """Adjoint of :func:`im2col`: scatter-add rows back to (n, C, H, W)."""
    ho = (h - 1) // stride + 1
    wo = (w - 1) // stride + 1
    n = cols.shape[0] // (ho * wo)
    cols = cols.reshape(n, ho, wo, c, 9)
    xp = np.zeros((n, c, h + 2, w + 2))
    for ky in range(3):
        for kx in range(3):
            xp[:, :, ky : ky + stride * (ho - 1) + 1 : stride, kx : kx + stride * (wo - 1) + 1 : stride] += cols[
                ..., ky * 3 + kx
            ].transpose(0, 3, 1, 2)
    return np.ascontiguousarray(xp[:, :, 1:-1, 1:-1])
