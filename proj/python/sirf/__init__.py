"""Pan-sharpening by joint registration and variational fusion.

Images are float64 numpy arrays shaped (rows, cols, bands); single-band
images may be passed and are returned as 2D arrays.
"""

from sirf._core import (
    denoise,
    downsample,
    fuse,
    load,
    make_test_scene,
    metrics,
    objective,
    register_images,
    save,
    set_reference_mode,
    set_thread_count,
    simulate,
    translation_energy,
    upsample,
)

__all__ = [
    "denoise",
    "downsample",
    "fuse",
    "load",
    "make_test_scene",
    "metrics",
    "objective",
    "register_images",
    "save",
    "set_reference_mode",
    "set_thread_count",
    "simulate",
    "translation_energy",
    "upsample",
]

__version__ = "0.1.0"
