"""Kernel builders: mean, Laplacian-of-Gaussian, Laws and Gabor filters.

All scale parameters are in voxel units here; millimetre flags are converted
by the caller through :func:`voxfilt.image.physical_to_voxel`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convolve import convolve_full, convolve_separable

__all__ = [
    "LAWS_NAMES",
    "GaborParams",
    "mean_kernel",
    "mean_kernel_1d",
    "gaussian_kernel_1d",
    "log_kernel",
    "laws_1d",
    "laws_response",
    "laws_energy",
    "gabor_kernel",
    "gabor_response_modulus",
    "gabor_bandwidth_ratio",
    "truncated_support",
]

_LAWS_TABLE = {
    "L3": np.array([1.0, 2.0, 1.0]) / np.sqrt(6.0),
    "L5": np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / np.sqrt(70.0),
    "E3": np.array([-1.0, 0.0, 1.0]) / np.sqrt(2.0),
    "E5": np.array([-1.0, -2.0, 0.0, 2.0, 1.0]) / np.sqrt(10.0),
    "S3": np.array([-1.0, 2.0, -1.0]) / np.sqrt(6.0),
    "S5": np.array([-1.0, 0.0, 2.0, 0.0, -1.0]) / np.sqrt(6.0),
    "W5": np.array([-1.0, 2.0, 0.0, -2.0, 1.0]) / np.sqrt(10.0),
    "R5": np.array([1.0, -4.0, 6.0, -4.0, 1.0]) / np.sqrt(70.0),
}

LAWS_NAMES = tuple(_LAWS_TABLE)


def mean_kernel(m: int, ndim: int) -> np.ndarray:
    """Dense averaging kernel: M^D taps of 1/M^D.  M must be odd."""
    if m < 1 or m % 2 == 0:
        raise ValueError(f"mean filter support must be odd and positive, got {m}")
    return np.full((m,) * ndim, 1.0 / m**ndim)


def mean_kernel_1d(m: int) -> np.ndarray:
    """One separable factor of the mean kernel (M taps of 1/M)."""
    if m < 1 or m % 2 == 0:
        raise ValueError(f"mean filter support must be odd and positive, got {m}")
    return np.full(m, 1.0 / m)


def truncated_support(sigma: float, d: float) -> int:
    """Odd 1-D size M = 1 + 2*floor(d*sigma + 0.5) used by LoG and Gabor."""
    return 1 + 2 * int(np.floor(d * sigma + 0.5))


def gaussian_kernel_1d(sigma: float, d: float = 4.0) -> np.ndarray:
    """Sampled Gaussian normalised to unit sum; same support rule as the LoG."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if d <= 0:
        raise ValueError(f"truncation parameter must be positive, got {d}")
    m = truncated_support(sigma, d)
    offsets = np.arange(m, dtype=np.float64) - m // 2
    taps = np.exp(-(offsets**2) / (2.0 * sigma**2))
    return taps / taps.sum()


def log_kernel(sigma: float, ndim: int, d: float = 4.0) -> np.ndarray:
    """Laplacian-of-Gaussian taps sampled at integer offsets.

    sigma is the Gaussian scale in voxels; d controls truncation (the kernel
    spans 1 + 2*floor(d*sigma + 0.5) voxels per axis).  Taps are point samples
    of the continuous profile and are deliberately not renormalised, so the
    kernel sum is close to, but not exactly, zero.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if d <= 0:
        raise ValueError(f"truncation parameter must be positive, got {d}")
    m = truncated_support(sigma, d)
    offsets = np.arange(m, dtype=np.float64) - m // 2
    grids = np.meshgrid(*([offsets] * ndim), indexing="ij", sparse=True)
    r2 = sum(g**2 for g in grids)
    norm = (1.0 / (np.sqrt(2.0 * np.pi) * sigma)) ** ndim
    return (-1.0 / sigma**2) * norm * (ndim - r2 / sigma**2) * np.exp(-r2 / (2.0 * sigma**2))


def laws_1d(name: str) -> np.ndarray:
    """One of the eight normalised Laws kernels (L3,L5,E3,E5,S3,S5,W5,R5)."""
    try:
        return _LAWS_TABLE[name].copy()
    except KeyError:
        raise ValueError(f"unknown Laws kernel {name!r}, expected one of {LAWS_NAMES}") from None


def laws_response(image, names, boundary: str, constant: float = 0.0) -> np.ndarray:
    """Separable Laws filtering; name order equals axis order (k1 first)."""
    image = np.asarray(image)
    if len(names) != image.ndim:
        raise ValueError(f"{len(names)} kernel names for a {image.ndim}-D image")
    return convolve_separable(image, [laws_1d(n) for n in names], boundary, constant)


def laws_energy(response, delta: int, boundary: str, constant: float = 0.0) -> np.ndarray:
    """Texture energy: mean of |response| over the Chebyshev-delta window.

    Implemented as a separable mean filter of width 2*delta + 1 applied to the
    absolute response, using the same boundary mode as the first pass.
    """
    if delta < 0:
        raise ValueError(f"delta must be non-negative, got {delta}")
    magnitude = np.abs(np.asarray(response))
    if delta == 0:
        return magnitude
    g = mean_kernel_1d(2 * delta + 1)
    return convolve_separable(magnitude, [g] * magnitude.ndim, boundary, constant)


@dataclass(frozen=True)
class GaborParams:
    """Gabor filter parameters, all spatial quantities in voxel units.

    theta turns clockwise in the (k1, k2) plane.  The rotated coordinates use
    the row pair ((cos, sin), (sin, -cos)); ``proper_rotation`` swaps the
    second row for (-sin, cos).  Both give identical kernels because the
    second coordinate only enters squared, so the flag is documentation of
    the convention rather than a behavioural switch.
    """

    sigma: float
    wavelength: float
    gamma: float = 1.0
    theta: float = 0.0
    d: float = 4.0
    proper_rotation: bool = False

    def __post_init__(self):
        if self.sigma <= 0 or self.wavelength <= 0 or self.gamma <= 0:
            raise ValueError("sigma, wavelength and gamma must all be positive")

    @property
    def support(self) -> int:
        scale = self.sigma if self.gamma <= 1.0 else self.gamma * self.sigma
        return truncated_support(scale, self.d)


def gabor_bandwidth_ratio(f_b: float) -> float:
    """sigma/wavelength ratio for a half-response bandwidth of f_b octaves."""
    if f_b <= 0:
        raise ValueError(f"bandwidth must be positive, got {f_b}")
    return np.sqrt(np.log(2.0) / 2.0) / np.pi * (2.0**f_b + 1.0) / (2.0**f_b - 1.0)


def gabor_kernel(params: GaborParams) -> np.ndarray:
    """Complex 2-D Gabor taps on the truncated square support."""
    m = params.support
    offsets = np.arange(m, dtype=np.float64) - m // 2
    k1, k2 = np.meshgrid(offsets, offsets, indexing="ij")
    c, s = np.cos(params.theta), np.sin(params.theta)
    kt1 = c * k1 + s * k2
    if params.proper_rotation:
        kt2 = -s * k1 + c * k2
    else:
        kt2 = s * k1 - c * k2
    envelope = -(kt1**2 + params.gamma**2 * kt2**2) / (2.0 * params.sigma**2)
    phase = 2.0 * np.pi * kt1 / params.wavelength
    return np.exp(envelope + 1j * phase)


def gabor_response_modulus(image2d, params: GaborParams, boundary: str,
                           constant: float = 0.0, via: str = "auto") -> np.ndarray:
    """Modulus of the complex Gabor response of one 2-D slice."""
    image2d = np.asarray(image2d)
    if image2d.ndim != 2:
        raise ValueError(f"expected a 2-D slice, got ndim={image2d.ndim}")
    return np.abs(convolve_full(image2d, gabor_kernel(params), boundary, constant, via=via))
