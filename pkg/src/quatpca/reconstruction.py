"""Image reconstruction from projected features.

Inverts the weighted projection P = (U f(Wl))^* F (V f(Wr)) by undoing
the weights on exactly the sides the scheme weighted:

    F_rec = U f(Wl)^(-1) P f(Wr)^(-1) V^* + mean

which reduces to U U^* F V V^* + mean, the orthogonal bi-projection of
the centered image.  With complete bases (k1 = m, k2 = n) this is exact.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidDataset, InvalidWeight, ShapeError
from .weighting import WeightingScheme, Manner, _transform_values, project

__all__ = ["reconstruct", "reconstruct_samples", "reconstruction_ratio"]


def _inverse_weights(d, transform):
    w = _transform_values(d, transform)
    if np.any(w == 0.0):
        raise InvalidWeight("zero weight cannot be inverted for reconstruction")
    return 1.0 / w


def reconstruct(P, basis, scheme=WeightingScheme(Manner.UNWEIGHTED)):
    """Rebuild one image from its feature matrix."""
    if P.shape != (basis.k1, basis.k2):
        raise ShapeError(
            f"feature shape {P.shape} does not match basis sizes ({basis.k1}, {basis.k2})")
    A = basis.U
    B = basis.V
    if scheme.weights_left:
        A = A.scale_columns(_inverse_weights(basis.d_left, scheme.transform))
    if scheme.weights_right:
        B = B.scale_columns(_inverse_weights(basis.d_right, scheme.transform))
    return A @ P @ B.H + basis.mean


def reconstruct_samples(samples, basis, scheme=WeightingScheme(Manner.UNWEIGHTED)):
    """Project and rebuild every sample of a raw (uncentered) set."""
    recs = []
    for sample in samples.samples:
        F = sample.image if samples.centered else sample.image - basis.mean
        recs.append(reconstruct(project(F, basis, scheme), basis, scheme))
    return recs


def reconstruction_ratio(originals, reconstructions):
    """Mean of 1 - ||F_i - F_i_rec||_F / ||F_i||_F over all samples.

    ``originals`` are the raw (uncentered) images; a perfect
    reconstruction scores 1.  Zero-norm originals are rejected.
    """
    if hasattr(originals, "images"):
        mats = list(originals.images())
    else:
        mats = list(originals)
    if not mats:
        raise InvalidDataset("need at least one sample to compute a ratio")
    if len(mats) != len(reconstructions):
        raise InvalidDataset(
            f"sample counts differ: {len(mats)} originals, {len(reconstructions)} reconstructions")
    total = 0.0
    for F, R in zip(mats, reconstructions):
        nf = F.fro_norm()
        if nf == 0.0:
            raise InvalidDataset("zero-norm original has no relative error")
        total += 1.0 - (F - R).fro_norm() / nf
    return total / len(mats)
