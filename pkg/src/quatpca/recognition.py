"""Nearest-neighbor recognition in the projected feature space.

A gallery holds one feature matrix per training sample.  A probe is
centered by the training mean, projected with the same basis and
weighting scheme, and assigned the label of the closest gallery feature
under the quaternion Frobenius distance.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidDataset
from .quaternion import QMatrix
from .solver import BasisPair
from .weighting import WeightingScheme, project

__all__ = ["Gallery", "build_gallery", "classify", "evaluate"]


@dataclass(frozen=True)
class Gallery:
    """Projected training features with their provenance."""

    labels: tuple[str, ...]
    features: tuple[QMatrix, ...]
    basis: BasisPair
    scheme: WeightingScheme

    def __len__(self):
        return len(self.labels)


def _centered_images(sample_set, basis):
    if sample_set.centered:
        return [s.image for s in sample_set.samples]
    return [s.image - basis.mean for s in sample_set.samples]


def build_gallery(train, basis, scheme):
    """Project every training sample; the set must match the fit's mean."""
    if len(train) == 0:
        raise InvalidDataset("cannot build a gallery from an empty sample set")
    images = _centered_images(train, basis)
    features = tuple(project(F, basis, scheme) for F in images)
    labels = tuple(s.label for s in train.samples)
    return Gallery(labels=labels, features=features, basis=basis, scheme=scheme)


def classify(probe, gallery, basis=None, scheme=None):
    """Label and distance of the nearest gallery feature.

    The probe must already be centered by the training mean.  Distance
    ties resolve to the smallest gallery index.
    """
    if len(gallery) == 0:
        raise InvalidDataset("cannot classify against an empty gallery")
    basis = gallery.basis if basis is None else basis
    scheme = gallery.scheme if scheme is None else scheme
    P = project(probe, basis, scheme)
    best_idx = 0
    best_dist = (gallery.features[0] - P).fro_norm()
    for idx in range(1, len(gallery)):
        dist = (gallery.features[idx] - P).fro_norm()
        if dist < best_dist:
            best_idx = idx
            best_dist = dist
    return gallery.labels[best_idx], best_dist


def evaluate(test, gallery, basis=None, scheme=None):
    """Fraction of test samples whose nearest neighbor shares their label."""
    if len(test) == 0:
        raise InvalidDataset("cannot evaluate on an empty sample set")
    basis = gallery.basis if basis is None else basis
    scheme = gallery.scheme if scheme is None else scheme
    probes = _centered_images(test, basis)
    hits = 0
    for sample, probe in zip(test.samples, probes):
        label, _ = classify(probe, gallery, basis, scheme)
        if label == sample.label:
            hits += 1
    return hits / len(test)
