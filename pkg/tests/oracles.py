"""Reference implementations used only by the test suite.

Everything here is written from first principles, independent of the library
code paths: boundary lookups fold or wrap indices step by step, convolution
loops over kernel taps, statistics go through explicit sorting.  Slow but
obviously correct.
"""

import numpy as np


def fold_index(k: int, n: int, mode: str) -> int:
    """Out-of-range index resolution by stepwise folding/wrapping."""
    if mode == "nearest":
        return min(max(k, 0), n - 1)
    if mode == "periodise":
        while k < 0:
            k += n
        while k >= n:
            k -= n
        return k
    if mode == "mirror":
        if n == 1:
            return 0
        while k < 0 or k > n - 1:
            if k < 0:
                k = -k
            if k > n - 1:
                k = 2 * (n - 1) - k
        return k
    raise ValueError(mode)


def ext_lookup(image: np.ndarray, idx: tuple, mode: str, constant: float = 0.0) -> float:
    """Extended-image value at an arbitrary integer index."""
    if mode == "constant":
        if any(k < 0 or k >= n for k, n in zip(idx, image.shape)):
            return constant
        return image[idx]
    src = tuple(fold_index(k, n, mode) for k, n in zip(idx, image.shape))
    return image[src]


def conv_brute(image: np.ndarray, kernel: np.ndarray, mode: str, constant: float = 0.0):
    """Direct per-voxel, per-tap convolution (python loops; tiny inputs only)."""
    image = np.asarray(image, dtype=np.float64)
    kernel = np.asarray(kernel)
    out = np.zeros(image.shape, dtype=kernel.dtype if np.iscomplexobj(kernel) else np.float64)
    centres = [m // 2 for m in kernel.shape]
    for k0 in np.ndindex(*image.shape):
        acc = 0.0
        for tap in np.ndindex(*kernel.shape):
            offset = tuple(t - c for t, c in zip(tap, centres))
            src = tuple(a - b for a, b in zip(k0, offset))
            acc = acc + kernel[tap] * ext_lookup(image, src, mode, constant)
        out[k0] = acc
    return out


def conv_taploop(image: np.ndarray, kernel: np.ndarray, mode: str, constant: float = 0.0):
    """Tap-by-tap convolution with vectorised gathers.

    Same definition as :func:`conv_brute` (checked against it in the suite)
    but fast enough for 16^3-scale inputs.
    """
    image = np.asarray(image, dtype=np.float64)
    kernel = np.asarray(kernel)
    out = np.zeros(image.shape, dtype=np.complex128 if np.iscomplexobj(kernel) else np.float64)
    centres = [m // 2 for m in kernel.shape]
    grids = np.meshgrid(*[np.arange(n) for n in image.shape], indexing="ij", sparse=True)
    for tap in np.ndindex(*kernel.shape):
        w = kernel[tap]
        if w == 0:
            continue
        src_axes = []
        inside = np.ones((), dtype=bool)
        for axis, (g, t, c, n) in enumerate(zip(grids, tap, centres, image.shape)):
            src = g - (t - c)
            if mode == "constant":
                inside = inside & ((src >= 0) & (src < n))
                src = np.clip(src, 0, n - 1)
            else:
                src = np.array([fold_index(int(k), n, mode) for k in src.ravel()]).reshape(src.shape)
            src_axes.append(src)
        vals = image[tuple(src_axes)]
        if mode == "constant":
            vals = np.where(inside, vals, constant)
        out = out + w * vals
    return out

_QCOS = (1, 0, -1, 0)
_QSIN = (0, 1, 0, -1)


def euler_matrix(quarters) -> np.ndarray:
    """Exact rotation matrix for an extrinsic Euler triple in quarter turns.

    First rotation about k3 (alpha), then k2 (beta), then k1 (gamma);
    the product R_alpha @ R_beta @ R_gamma acts on column vectors.
    """
    a, b, g = (int(q) % 4 for q in quarters)
    ca, sa = _QCOS[a], _QSIN[a]
    cb, sb = _QCOS[b], _QSIN[b]
    cg, sg = _QCOS[g], _QSIN[g]
    r_alpha = np.array([[ca, -sa, 0], [sa, ca, 0], [0, 0, 1]])
    r_beta = np.array([[cb, 0, sb], [0, 1, 0], [-sb, 0, cb]])
    r_gamma = np.array([[1, 0, 0], [0, cg, -sg], [0, sg, cg]])
    return r_alpha @ r_beta @ r_gamma


def planar_matrix(quarter: int) -> np.ndarray:
    """Clockwise right-angle matrix [[c, s], [-s, c]] for one quarter count."""
    c, s = _QCOS[int(quarter) % 4], _QSIN[int(quarter) % 4]
    return np.array([[c, s], [-s, c]])


def rotate_grid(volume: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """Rotate a cube about its centre: out[k] = volume[mat^-1 (k - c) + c].

    ``mat`` must be an integer orthogonal (signed permutation) matrix, so
    its inverse is its transpose and grid points map onto grid points.
    """
    volume = np.asarray(volume)
    n = volume.shape[0]
    if any(s != n for s in volume.shape):
        raise ValueError("grid rotation needs a cube")
    inv = np.asarray(mat).T
    centre = (n - 1) / 2.0
    idx = np.indices(volume.shape)
    src = np.tensordot(inv, idx - centre, axes=(1, 0)) + centre
    return volume[tuple(np.rint(src).astype(int))]
