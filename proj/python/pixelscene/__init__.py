"""Bottom-up scene understanding from per-pixel class scores.

The heavy lifting lives in the `_core` extension module; this package
re-exports its public surface.
"""

from ._core import (  # noqa: F401
    SvmModel,
    ToyNet,
    ValidationError,
    argmax_label,
    average_precision,
    box_iou,
    class_histogram,
    connected_components,
    detect_objects,
    generate_toyrooms,
    kernel_eval,
    l2_normalize,
    max_fuse,
    mean_ap,
    one_hot,
    poly_lr,
    read_label_png,
    read_rgb_png,
    read_scoremap,
    resize_scores,
    run_pipeline,
    scene_accuracy,
    seg_metrics,
    softmax_map,
    spatial_pyramid,
    train_toynet,
    write_label_png,
    write_rgb_png,
    write_scoremap,
)

__all__ = [
    "SvmModel",
    "ToyNet",
    "ValidationError",
    "argmax_label",
    "average_precision",
    "box_iou",
    "class_histogram",
    "connected_components",
    "detect_objects",
    "generate_toyrooms",
    "kernel_eval",
    "l2_normalize",
    "max_fuse",
    "mean_ap",
    "one_hot",
    "poly_lr",
    "read_label_png",
    "read_rgb_png",
    "read_scoremap",
    "resize_scores",
    "run_pipeline",
    "scene_accuracy",
    "seg_metrics",
    "softmax_map",
    "spatial_pyramid",
    "train_toynet",
    "write_label_png",
    "write_rgb_png",
    "write_scoremap",
]

__version__ = "0.1.0"
