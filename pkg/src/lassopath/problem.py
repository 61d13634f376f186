"""Lasso problem instances."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .precision import Precision, mode_of, to_float


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Design ``X`` (n x d), target ``y`` and provenance metadata.

    ``X`` and ``y`` are either float64 arrays or extended (object) arrays;
    :attr:`precision` reports which.
    """

    X: np.ndarray
    y: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.X)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-d, got shape {X.shape}")
        y = np.asarray(self.y)
        if y.shape != (X.shape[0],):
            raise ValueError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    @property
    def precision(self):
        return mode_of(self.X)

    def astype(self, precision):
        """Return the instance with ``X`` and ``y`` in ``precision``."""
        precision = Precision.parse(precision)
        if precision is self.precision and mode_of(self.y) is precision:
            return self
        return replace(self, X=precision.asarray(self.X), y=precision.asarray(self.y))

    def to_float(self):
        return to_float(self.X), to_float(self.y)

    def with_meta(self, **kwargs):
        return replace(self, meta={**self.meta, **kwargs})
