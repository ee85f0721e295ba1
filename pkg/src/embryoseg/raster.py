"""Image containers, grayscale conversion and histograms.

Images are plain numpy arrays indexed ``[y, x]`` with the origin at the
top-left corner:

* RGB image: ``(H, W, 3)`` ``uint8``
* gray image: ``(H, W)`` ``uint8``
* binary image: ``(H, W)`` ``bool``

The ``as_*`` helpers validate and normalise inputs; every public operation
returns a fresh array and never mutates its argument.
"""

import numpy as np

LEVELS = 256


def _check_dims(arr, ndim, what):
    if arr.ndim != ndim:
        raise ValueError(f"{what} must have {ndim} dimensions, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{what} must be at least 1x1, got shape {arr.shape}")


def _check_range(arr, what):
    if arr.dtype == np.uint8:
        return arr
    if arr.size and (arr.min() < 0 or arr.max() > 255):
        raise ValueError(f"{what} values must lie in [0, 255]")
    if np.issubdtype(arr.dtype, np.floating) and not np.all(arr == np.round(arr)):
        raise ValueError(f"{what} values must be integers")
    return arr.astype(np.uint8)


def as_rgb(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"RGB image must have shape (H, W, 3), got {arr.shape}")
    _check_dims(arr, 3, "RGB image")
    return _check_range(arr, "RGB image")


def as_gray(img) -> np.ndarray:
    arr = np.asarray(img)
    _check_dims(arr, 2, "gray image")
    return _check_range(arr, "gray image")


def as_binary(img) -> np.ndarray:
    arr = np.asarray(img)
    _check_dims(arr, 2, "binary image")
    if arr.dtype != bool:
        arr = arr != 0
    return arr


def to_grayscale(img) -> np.ndarray:
    """Luma conversion ``0.299 R + 0.587 G + 0.114 B``, rounded half up.

    The weighted sum is evaluated in integer thousandths so the rounding is
    exact; the coefficients sum to one, so the result never leaves [0, 255].
    """
    rgb = as_rgb(img).astype(np.int64)
    weighted = 299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2]
    gray = (weighted + 500) // 1000
    return np.clip(gray, 0, 255).astype(np.uint8)


def histogram(img, mask=None) -> np.ndarray:
    """256-bin intensity histogram; ``mask`` restricts the counted pixels.

    The pixel total is ``hist.sum()``.
    """
    gray = as_gray(img)
    if mask is not None:
        mask = as_binary(mask)
        if mask.shape != gray.shape:
            raise ValueError("mask shape does not match image")
        values = gray[mask]
    else:
        values = gray.ravel()
    return np.bincount(values, minlength=LEVELS).astype(np.int64)


def invert_binary(img) -> np.ndarray:
    return ~as_binary(img)
