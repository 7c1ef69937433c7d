"""Foreground/background color estimation for alpha mattes.

Thin numpy-facing wrapper around the C++ core. Images are float64 arrays of
shape (h, w) or (h, w, 3) with values in [0, 1]; alpha mattes are (h, w).
"""

from ._fgmatte import (
    __version__,
    apply_white_point,
    cf_foreground_background,
    compose,
    compose_naive,
    fit_white_point,
    gaussian_derivative_kernel,
    grad_error,
    level_schedule,
    linear_to_srgb,
    linear_to_srgb_value,
    load_png,
    ml_foreground_background,
    mse,
    prepare_ground_truth,
    resize,
    sad,
    save_png,
    solve_pixel,
    srgb_to_linear,
    srgb_to_linear_value,
)

__all__ = [
    "__version__",
    "apply_white_point",
    "cf_foreground_background",
    "compose",
    "compose_naive",
    "fit_white_point",
    "gaussian_derivative_kernel",
    "grad_error",
    "level_schedule",
    "linear_to_srgb",
    "linear_to_srgb_value",
    "load_png",
    "ml_foreground_background",
    "mse",
    "prepare_ground_truth",
    "resize",
    "sad",
    "save_png",
    "solve_pixel",
    "srgb_to_linear",
    "srgb_to_linear_value",
]
