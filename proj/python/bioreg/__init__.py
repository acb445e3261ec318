"""Deformable registration of 2-D images with a linear-elastic prior.

Arrays: images (H, W) float64, fields (2, H, W) with channel 0 along
columns (x1) and channel 1 along rows (x2), masks (H, W) of 0/1.
"""

from ._bioreg import (
    BioregError,
    asd,
    dice,
    endpoint_error,
    hausdorff,
    jaccard,
    jacobian_det,
    make_phantom,
    paired_ttest,
    reg_bim,
    register,
    stiffness_matrix,
    strain_energy,
    warp_image,
)

__all__ = [
    "BioregError",
    "asd",
    "dice",
    "endpoint_error",
    "hausdorff",
    "jaccard",
    "jacobian_det",
    "make_phantom",
    "paired_ttest",
    "reg_bim",
    "register",
    "stiffness_matrix",
    "strain_energy",
    "warp_image",
]
