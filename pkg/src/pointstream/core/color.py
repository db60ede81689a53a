"""sRGB <-> CIELAB conversion (D65 white point, 2 degree observer).

The white point is taken as the image of sRGB (1,1,1) under the linear
RGB->XYZ matrix, so pure white maps to exactly L=100, a=b=0 and the
byte-level round trip srgb -> lab -> srgb is the identity for every
24-bit color.
"""

from __future__ import annotations

import numpy as np

_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
_WHITE = _RGB_TO_XYZ.sum(axis=1)

_F_EPS = (6.0 / 29.0) ** 3
_F_SLOPE = (29.0 / 6.0) ** 2 / 3.0  # slope of the linear toe of f()


def srgb_to_lab(rgb) -> np.ndarray:
    """Map 8-bit sRGB to CIELAB.

    Accepts any (..., 3) array of byte values; returns (..., 3) float64
    with L in [0, 100].
    """
    c = np.asarray(rgb, dtype=np.float64) / 255.0
    lin = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = (lin @ _RGB_TO_XYZ.T) / _WHITE
    f = np.where(xyz > _F_EPS, np.cbrt(xyz), _F_SLOPE * xyz + 4.0 / 29.0)
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    out = np.empty(c.shape, dtype=np.float64)
    out[..., 0] = 116.0 * fy - 16.0
    out[..., 1] = 500.0 * (fx - fy)
    out[..., 2] = 200.0 * (fy - fz)
    return out


def lab_to_srgb(lab) -> np.ndarray:
    """Inverse of :func:`srgb_to_lab`.

    Out-of-gamut values are clamped to [0, 255] per channel before
    rounding, so any finite Lab triple yields a valid byte color.
    """
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    f = np.stack([fx, fy, fz], axis=-1)
    xyz = np.where(f > 6.0 / 29.0, f**3, (f - 4.0 / 29.0) / _F_SLOPE) * _WHITE
    lin = xyz @ _XYZ_TO_RGB.T
    c = np.where(
        lin <= 0.0031308,
        lin * 12.92,
        1.055 * np.maximum(lin, 0.0) ** (1.0 / 2.4) - 0.055,
    )
    return np.clip(np.rint(c * 255.0), 0.0, 255.0).astype(np.uint8)
