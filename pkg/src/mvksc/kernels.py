"""Gram matrices K = Phi(X)^T Phi(X) for the supported kernel families."""
from dataclasses import dataclass

import numpy as np

LINEAR = "linear"
POLYNOMIAL = "polynomial"


@dataclass(frozen=True)
class KernelSpec:
    """Feature-space map declared through its Gram function.

    Parameters
    ----------
    family : {"linear", "polynomial"}
    c : float
        Offset of the polynomial kernel ``(<x_i, x_j> + c)^d``. Ignored for linear.
    d : int
        Degree of the polynomial kernel. Ignored for linear.
    """

    family: str = LINEAR
    c: float = 0.0
    d: int = 1

    def __post_init__(self):
        if self.family not in (LINEAR, POLYNOMIAL):
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family == POLYNOMIAL:
            if int(self.d) != self.d or self.d < 1:
                raise ValueError(f"polynomial degree must be an integer >= 1, got {self.d}")
            if not np.isfinite(self.c) or self.c < 0:
                raise ValueError(f"polynomial offset must be >= 0, got {self.c}")

    @property
    def is_linear(self):
        return self.family == LINEAR

    def __str__(self):
        if self.is_linear:
            return "linear"
        return f"poly:{self.c:g}:{int(self.d)}"

    @classmethod
    def parse(cls, text):
        """Parse ``linear`` or ``poly:<c>:<d>``."""
        text = text.strip().lower()
        if text == "linear":
            return cls()
        parts = text.split(":")
        if parts[0] in ("poly", "polynomial") and len(parts) == 3:
            try:
                c, d = float(parts[1]), int(parts[2])
            except ValueError:
                raise ValueError(f"bad polynomial kernel spec {text!r}") from None
            return cls(POLYNOMIAL, c, d)
        raise ValueError(f"bad kernel spec {text!r}; expected 'linear' or 'poly:<c>:<d>'")


def gram(X, spec=KernelSpec()):
    """Gram matrix of the columns of ``X`` (features x samples).

    The result is symmetrized exactly, ``K <- (K + K^T) / 2``, since the
    downstream eigen-solvers assume exact symmetry.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.size == 0:
        raise ValueError("view matrix must be a non-empty 2-D array")
    if X.shape[1] < 2:
        raise ValueError("need at least two samples (columns)")
    if not np.all(np.isfinite(X)):
        raise ValueError("view matrix contains non-finite entries")

    K = X.T @ X
    if not spec.is_linear:
        K = (K + spec.c) ** int(spec.d)
    return (K + K.T) / 2
