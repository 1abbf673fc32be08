"""Run-length encoding of binary masks.

Runs alternate 0s and 1s in row-major order and always start with the
0-run, which may be zero-length; no other run may be empty. An all-zero
4x4 mask is therefore (16,) and an all-ones 4x4 mask is (0, 16).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CorruptDataError


@dataclass(frozen=True)
class RleMask:
    width: int
    height: int
    runs: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise CorruptDataError(f"mask dims must be positive, got {self.width}x{self.height}")
        if not self.runs:
            raise CorruptDataError("runs may not be empty")
        if any(r < 0 for r in self.runs):
            raise CorruptDataError(f"negative run length in {self.runs}")
        if any(r == 0 for r in self.runs[1:]):
            raise CorruptDataError("only the leading 0-run may be zero-length")
        total = sum(self.runs)
        if total != self.width * self.height:
            raise CorruptDataError(
                f"runs sum to {total}, expected {self.width}x{self.height}"
                f" = {self.width * self.height}"
            )


def rle_encode(mask: np.ndarray) -> RleMask:
    """Losslessly encode a 2-D binary mask."""
    if mask.ndim != 2 or mask.size == 0:
        raise CorruptDataError(f"mask must be non-empty 2-D, got shape {mask.shape}")
    flat = mask.astype(bool).ravel()
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    lengths = np.diff(bounds)
    runs = tuple(int(n) for n in lengths)
    if flat[0]:
        runs = (0,) + runs
    return RleMask(width=mask.shape[1], height=mask.shape[0], runs=runs)


def rle_decode(r: RleMask) -> np.ndarray:
    """Exact inverse of rle_encode (validation happens on construction)."""
    values = np.tile([False, True], (len(r.runs) + 1) // 2)[: len(r.runs)]
    flat = np.repeat(values, r.runs)
    return flat.reshape(r.height, r.width)
