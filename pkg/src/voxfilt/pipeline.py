"""Processing configurations: resampling, rounding, re-segmentation, filtering.

A configuration describes the whole chain applied to an image/mask pair:
optional resampling to a new grid, optional intensity rounding, range
re-segmentation of the ROI, one filter from the benchmark table, and
feature aggregation over the re-segmented ROI.  The stage order is fixed:
filtering always happens after interpolation and rounding, features are
always aggregated over the entire (3-D) ROI even when filtering ran
slice by slice.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import yaml
from scipy import ndimage

from .boundary import BOUNDARY_MODES
from .convolve import convolve_full, convolve_separable
from .features import diagnostics, intensity_statistics
from .image import RoiMask, VolumeImage
from .kernels import (
    GaborParams,
    gabor_response_modulus,
    laws_1d,
    laws_energy,
    laws_response,
    log_kernel,
    mean_kernel_1d,
)
from .riesz import align_order2, riesz_filtered_map, riesz_indices, structure_tensor
from .rotinv import (
    equivariant_set_2d,
    equivariant_set_3d,
    gabor_orientation_set,
    orthogonal_plane_average,
    pool,
)
from .wavelets import (
    RADIAL_KINDS,
    RadialProfile,
    WAVELET_NAMES,
    nonseparable_b_map,
    swt_rotation_pooled,
    swt_undecimated,
)

__all__ = [
    "FILTER_KINDS",
    "FilterConfig",
    "ProcessingConfig",
    "load_config",
    "resample_image",
    "resample_mask",
    "round_intensities",
    "resegment",
    "apply_filter",
    "run_configuration",
]

FILTER_KINDS = (
    "none",
    "mean",
    "log",
    "laws",
    "gabor",
    "wavelet",
    "nonseparable",
    "riesz",
)

_INTERPOLATIONS = ("trilinear", "tricubic")


@dataclass(frozen=True)
class FilterConfig:
    """One benchmark filter: a kind plus its kind-specific parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ValueError(f"unknown filter kind {self.kind!r}, expected one of {FILTER_KINDS}")


@dataclass(frozen=True)
class ProcessingConfig:
    """Full image-processing chain for one benchmark test."""

    mode: str
    filter: FilterConfig
    resample_spacing_mm: tuple | None = None
    image_interpolation: str = "tricubic"
    mask_threshold: float = 0.5
    rounding: bool = False
    reseg_range: tuple | None = None
    boundary: str = "mirror"
    boundary_constant: float = 0.0

    def __post_init__(self):
        if self.mode not in ("2d", "3d"):
            raise ValueError(f"mode must be '2d' or '3d', got {self.mode!r}")
        if self.boundary not in BOUNDARY_MODES:
            raise ValueError(f"unknown boundary mode {self.boundary!r}")
        if self.image_interpolation not in _INTERPOLATIONS:
            raise ValueError(
                f"interpolation must be one of {_INTERPOLATIONS}, got {self.image_interpolation!r}"
            )
        if self.resample_spacing_mm is not None:
            spacing = tuple(float(s) for s in self.resample_spacing_mm)
            if any(s <= 0 for s in spacing):
                raise ValueError(f"resampled spacing must be positive, got {spacing}")
            object.__setattr__(self, "resample_spacing_mm", spacing)
        if not 0.0 < self.mask_threshold <= 1.0:
            raise ValueError(f"mask threshold must lie in (0, 1], got {self.mask_threshold}")
        if self.reseg_range is not None:
            low, high = (float(v) for v in self.reseg_range)
            if low > high:
                raise ValueError(f"re-segmentation range is inverted: [{low}, {high}]")
            object.__setattr__(self, "reseg_range", (low, high))


def load_config(path):
    """Read a configuration file; returns ``(test_id, ProcessingConfig)``."""
    with open(path) as handle:
        raw = yaml.safe_load(handle)
    if not isinstance(raw, dict):
        raise ValueError(f"configuration file {path} must hold a mapping")
    try:
        mode = str(raw["mode"]).lower()
        filt = raw["filter"]
    except KeyError as exc:
        raise ValueError(f"configuration is missing the {exc.args[0]!r} key") from None
    if not isinstance(filt, dict) or "kind" not in filt:
        raise ValueError("the filter block needs a 'kind' entry")
    params = {k: v for k, v in filt.items() if k != "kind"}
    resample = raw.get("resample")
    spacing = None
    interpolation = "tricubic"
    threshold = 0.5
    rounding = False
    if resample is not None:
        spacing = resample["spacing_mm"]
        interpolation = resample.get("image_interpolation", "tricubic")
        threshold = float(resample.get("mask_threshold", 0.5))
        rounding = bool(resample.get("rounding", False))
    config = ProcessingConfig(
        mode=mode,
        filter=FilterConfig(str(filt["kind"]).lower(), params),
        resample_spacing_mm=spacing,
        image_interpolation=interpolation,
        mask_threshold=threshold,
        rounding=rounding,
        reseg_range=raw.get("resegment_hu"),
        boundary=raw.get("boundary", "mirror"),
        boundary_constant=float(raw.get("boundary_constant", 0.0)),
    )
    return str(raw.get("test_id", "")), config


def _output_coordinates(dims, spacing, new_spacing):
    """Voxel coordinates of the aligned output grid, expressed on the input grid.

    Output and input grids share their physical centre; the output extent
    rounds up so no input voxel is dropped.
    """
    coords = []
    out_dims = []
    for n_in, s_in, s_out in zip(dims, spacing, new_spacing):
        n_out = math.ceil(n_in * s_in / s_out)
        centre_in = (n_in - 1) / 2.0
        centre_out = (n_out - 1) / 2.0
        axis = (np.arange(n_out, dtype=np.float64) - centre_out) * (s_out / s_in) + centre_in
        coords.append(axis)
        out_dims.append(n_out)
    return tuple(out_dims), coords


def _grid_unchanged(spacing, new_spacing):
    return all(float(a) == float(b) for a, b in zip(spacing, new_spacing))


def _interpolate(data, coords, order):
    mesh = np.meshgrid(*coords, indexing="ij")
    return ndimage.map_coordinates(
        data, np.stack(mesh), order=order, mode="mirror"
    )


def resample_image(image: VolumeImage, new_spacing, method: str) -> VolumeImage:
    """Resample intensities onto a centre-aligned grid with the given spacing.

    ``method`` is ``"trilinear"`` or ``"tricubic"`` (cubic spline).  An
    output grid identical to the input grid returns the image unchanged.
    """
    if method not in _INTERPOLATIONS:
        raise ValueError(f"interpolation must be one of {_INTERPOLATIONS}, got {method!r}")
    new_spacing = tuple(float(s) for s in new_spacing)
    if len(new_spacing) != image.ndim or any(s <= 0 for s in new_spacing):
        raise ValueError(f"need one positive spacing per axis, got {new_spacing}")
    if _grid_unchanged(image.spacing, new_spacing):
        return image
    out_dims, coords = _output_coordinates(image.dims, image.spacing, new_spacing)
    order = 1 if method == "trilinear" else 3
    data = _interpolate(image.data, coords, order)
    return VolumeImage(np.asfortranarray(data.reshape(out_dims)), new_spacing)


def resample_mask(mask: RoiMask, spacing, new_spacing, threshold: float = 0.5) -> RoiMask:
    """Trilinear mask resampling: voxels with partial volume >= threshold stay in."""
    new_spacing = tuple(float(s) for s in new_spacing)
    if len(new_spacing) != mask.membership.ndim or any(s <= 0 for s in new_spacing):
        raise ValueError(f"need one positive spacing per axis, got {new_spacing}")
    if _grid_unchanged(spacing, new_spacing):
        return RoiMask(mask.membership.copy(), kind=mask.kind)
    out_dims, coords = _output_coordinates(mask.dims, spacing, new_spacing)
    fraction = _interpolate(mask.membership.astype(np.float64), coords, order=1)
    return RoiMask(np.asfortranarray(fraction.reshape(out_dims) >= threshold), kind=mask.kind)


def round_intensities(image: VolumeImage) -> VolumeImage:
    """Round to the nearest integer, halves away from zero."""
    data = image.data
    rounded = np.sign(data) * np.floor(np.abs(data) + 0.5)
    return image.with_data(rounded)


def resegment(mask: RoiMask, image: VolumeImage, value_range) -> RoiMask:
    """Intensity mask: ROI voxels whose intensity lies in the closed range.

    The morphological mask itself is never altered; with ``value_range``
    None the membership is just re-labelled as an intensity mask.
    """
    if mask.dims != image.dims:
        raise ValueError(f"mask dims {mask.dims} do not match image dims {image.dims}")
    if value_range is None:
        return RoiMask(mask.membership.copy(), kind="intensity")
    low, high = (float(v) for v in value_range)
    if low > high:
        raise ValueError(f"re-segmentation range is inverted: [{low}, {high}]")
    keep = mask.membership & (image.data >= low) & (image.data <= high)
    return RoiMask(keep, kind="intensity")


def _check_keys(kind, params, required, optional=()):
    present = set(params)
    missing = set(required) - present
    if missing:
        raise ValueError(f"{kind} filter is missing parameters {sorted(missing)}")
    unknown = present - set(required) - set(optional)
    if unknown:
        raise ValueError(f"{kind} filter got unknown parameters {sorted(unknown)}")


def _isotropic_scale(values_vox, what):
    values = np.asarray(values_vox, dtype=np.float64)
    if values.max() - values.min() > 1e-9 * values.max():
        raise ValueError(
            f"{what} needs isotropic voxel spacing along the filtered axes; "
            f"resample first (got per-axis scales {tuple(values)})"
        )
    return float(values[0])


def _unit_mix_guard(kind, params):
    mm = sorted(k for k in params if k.endswith("_mm"))
    vox = sorted(k for k in params if k.endswith("_vox"))
    if mm and vox:
        raise ValueError(
            f"{kind} filter mixes physical and voxel units ({mm} with {vox}); "
            "pick one unit system per invocation"
        )


def _scale_param(params, stem, spacing, what, required=True):
    """Resolve a <stem>_mm / <stem>_vox parameter pair to voxel units."""
    vox = params.get(stem + "_vox")
    if vox is not None:
        return float(vox)
    mm = params.get(stem + "_mm")
    if mm is not None:
        return float(mm) / _isotropic_scale(spacing, what)
    if required:
        raise ValueError(f"{what} needs {stem}_mm or {stem}_vox")
    return None


def _laws_names(text, ndim):
    text = str(text).upper()
    if len(text) != 2 * ndim:
        raise ValueError(
            f"Laws kernel string {text!r} must name {ndim} kernels of two characters each"
        )
    return [text[i : i + 2] for i in range(0, len(text), 2)]


def _gabor_slice_op(params, spacing2, boundary, constant):
    sigma = _scale_param(params, "sigma", spacing2, "the Gabor filter")
    wavelength = _scale_param(params, "lambda", spacing2, "the Gabor filter")
    gamma = float(params.get("gamma", 1.0))
    if params.get("rotation_invariance", False):
        thetas = gabor_orientation_set(float(params["dtheta"]))
    else:
        thetas = [float(params.get("theta", 0.0))]
    pool_mode = params.get("pool", "average")

    def op(slice2d):
        responses = [
            gabor_response_modulus(
                slice2d,
                GaborParams(sigma=sigma, wavelength=wavelength, gamma=gamma, theta=theta),
                boundary,
                constant,
            )
            for theta in thetas
        ]
        return pool(responses, pool_mode)

    return op


def _filter_nd(data, spacing, filt: FilterConfig, boundary, constant):
    """Apply one filter to a full 2-D or 3-D array."""
    kind, params = filt.kind, filt.params
    ndim = data.ndim
    if kind == "none":
        _check_keys(kind, params, ())
        return data.astype(np.float64, copy=True)
    if kind == "mean":
        _check_keys(kind, params, ("support",))
        g = mean_kernel_1d(int(params["support"]))
        return convolve_separable(data, (g,) * ndim, boundary, constant)
    if kind == "log":
        _check_keys(kind, params, (), ("sigma_mm", "sigma_vox", "cutoff", "via"))
        _unit_mix_guard(kind, params)
        sigma = _scale_param(params, "sigma", spacing, "the LoG filter")
        cutoff = float(params.get("cutoff", 4.0))
        kernel = log_kernel(sigma, ndim, cutoff)
        return convolve_full(data, kernel, boundary, constant,
                             via=params.get("via", "auto"))
    if kind == "laws":
        _check_keys(
            kind, params, ("kernels",), ("rotation_invariance", "pool", "energy_delta")
        )
        names = _laws_names(params["kernels"], ndim)
        if params.get("rotation_invariance", False):
            factors = [laws_1d(n) for n in names]
            kernel_set = (
                equivariant_set_2d(*factors) if ndim == 2 else equivariant_set_3d(*factors)
            )
            responses = [
                convolve_separable(data, kernels, boundary, constant)
                for kernels in kernel_set
            ]
            out = pool(responses, params.get("pool", "max"))
        else:
            out = laws_response(data, names, boundary, constant)
        delta = params.get("energy_delta")
        if delta is not None:
            out = laws_energy(out, int(delta), boundary, constant)
        return out
    if kind == "wavelet":
        _check_keys(
            kind, params, ("family", "level", "subband"), ("rotation_invariance", "pool")
        )
        family = str(params["family"]).lower()
        if family not in WAVELET_NAMES:
            raise ValueError(f"unknown wavelet family {family!r}, expected one of {WAVELET_NAMES}")
        level = int(params["level"])
        subband = str(params["subband"])
        if params.get("rotation_invariance", False):
            return swt_rotation_pooled(
                data, family, level, subband, params.get("pool", "average"),
                boundary, constant,
            )
        return swt_undecimated(data, family, level, subband, boundary, constant)
    if kind == "nonseparable":
        _check_keys(kind, params, ("wavelet", "level"))
        wavelet = str(params["wavelet"]).lower()
        if wavelet not in RADIAL_KINDS:
            raise ValueError(f"unknown radial wavelet {wavelet!r}, expected one of {RADIAL_KINDS}")
        return nonseparable_b_map(data, wavelet, int(params["level"]))
    if kind == "riesz":
        _check_keys(
            kind, params, ("wavelet", "level", "l"),
            ("align", "sigma_tensor_mm", "sigma_tensor_vox"),
        )
        _unit_mix_guard(kind, params)
        profile = RadialProfile(str(params["wavelet"]).lower(), int(params["level"]))
        l = tuple(int(v) for v in params["l"])
        if len(l) != ndim:
            raise ValueError(f"Riesz index {l} has {len(l)} entries for a {ndim}-D filter")
        if params.get("align", False):
            if sum(l) != 2:
                raise ValueError("alignment is defined for second-order Riesz sets")
            sigma_mm = params.get("sigma_tensor_mm")
            if sigma_mm is None:
                # The tensor smoother takes mm and handles anisotropy per
                # axis, so only the voxel-unit variant needs a single scale.
                sigma_vox = params.get("sigma_tensor_vox")
                if sigma_vox is None:
                    raise ValueError(
                        "aligned Riesz filtering needs sigma_tensor_mm "
                        "or sigma_tensor_vox"
                    )
                sigma_mm = float(sigma_vox) * _isotropic_scale(
                    spacing, "the structure tensor"
                )
            responses = {
                idx: riesz_filtered_map(data, profile, idx)
                for idx in riesz_indices(2, ndim)
            }
            tensor = structure_tensor(data, profile, float(sigma_mm), spacing)
            return align_order2(responses, tensor)
        return riesz_filtered_map(data, profile, l)
    raise ValueError(f"unknown filter kind {kind!r}")


def apply_filter(image: VolumeImage, filt: FilterConfig, mode: str,
                 boundary: str = "mirror", constant: float = 0.0,
                 threads: int = 1) -> np.ndarray:
    """Run one filter over a volume, slice-wise ("2d") or volumetric ("3d").

    2-D mode treats each (k1, k2) plane as an independent image.  The Gabor
    filter is planar by construction: 3-D mode requires its
    ``orthogonal_planes`` option, which averages slice-wise responses over
    the three plane stacks.
    """
    if mode not in ("2d", "3d"):
        raise ValueError(f"mode must be '2d' or '3d', got {mode!r}")
    if threads < 1:
        raise ValueError(f"thread count must be at least 1, got {threads}")
    data = image.data
    spacing = image.spacing

    if filt.kind == "gabor":
        _check_keys(
            "gabor", filt.params,
            (),
            ("sigma_mm", "sigma_vox", "lambda_mm", "lambda_vox", "gamma", "theta",
             "rotation_invariance", "dtheta", "pool", "orthogonal_planes"),
        )
        _unit_mix_guard("gabor", filt.params)
        if mode == "2d":
            if data.ndim != 3:
                raise ValueError("2d mode expects a 3-D volume of slices")
            op = _gabor_slice_op(filt.params, spacing[:2], boundary, constant)
            return _map_slices(data, op, threads)
        if not filt.params.get("orthogonal_planes", False):
            raise ValueError(
                "the Gabor filter is planar; in 3d mode enable orthogonal_planes "
                "or run it in 2d mode"
            )
        scale = _isotropic_scale(spacing, "the Gabor filter")
        op = _gabor_slice_op(filt.params, (scale, scale), boundary, constant)
        return orthogonal_plane_average(data, op)

    if mode == "3d":
        return _filter_nd(data, spacing, filt, boundary, constant)
    if data.ndim != 3:
        raise ValueError("2d mode expects a 3-D volume of slices")
    op = lambda slice2d: _filter_nd(  # noqa: E731
        slice2d, spacing[:2], filt, boundary, constant
    )
    return _map_slices(data, op, threads)


def _map_slices(volume, op, threads):
    out = np.empty(volume.shape, dtype=np.float64, order="F")
    indices = range(volume.shape[2])
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = executor.map(lambda i: (i, op(volume[:, :, i])), indices)
            for i, piece in results:
                out[:, :, i] = piece
    else:
        for i in indices:
            out[:, :, i] = op(volume[:, :, i])
    return out


def run_configuration(image: VolumeImage, mask: RoiMask, config: ProcessingConfig,
                      threads: int = 1):
    """Execute a full configuration; returns (response, intensity mask, features).

    The feature tuple holds the five diagnostics followed by the eighteen
    intensity statistics of the response over the re-segmented ROI.
    """
    if mask.dims != image.dims:
        raise ValueError(f"mask dims {mask.dims} do not match image dims {image.dims}")
    mask_before = mask
    work = image
    roi = mask
    if config.resample_spacing_mm is not None:
        work = resample_image(work, config.resample_spacing_mm, config.image_interpolation)
        roi = resample_mask(roi, image.spacing, config.resample_spacing_mm,
                            config.mask_threshold)
    if config.rounding:
        work = round_intensities(work)
    intensity_mask = resegment(roi, work, config.reseg_range)
    if intensity_mask.voxel_count == 0:
        raise ValueError("empty ROI after re-segmentation")
    response_data = apply_filter(
        work, config.filter, config.mode, config.boundary, config.boundary_constant,
        threads,
    )
    kind = "modulus" if config.filter.kind == "gabor" else "real"
    response = VolumeImage(np.asfortranarray(response_data), work.spacing, kind)
    features = diagnostics(mask_before.membership, intensity_mask.membership, work.data)
    features = features + intensity_statistics(response_data, intensity_mask.membership)
    return response, intensity_mask, features
