"""Rescale and concatenate feature blocks into the neighborhood matrix.

Blocks can carry very different scales (graph statistics easily exceed the
quantile columns by an order of magnitude and would dominate the embedding),
so each block gets a scaling mode: "none" or "zscore" (per-column center and
scale by the sample standard deviation). Zero-variance columns become all
zeros and are flagged, not dropped, so column spans stay aligned with the
quantile/statistic naming.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Matrix
from .errors import ValidationError
from .quantiles import FeatureBlock

SCALING_MODES = ("none", "zscore")


@dataclass(frozen=True)
class BlockScaling:
    name: str
    mode: str
    start: int
    stop: int
    means: np.ndarray
    sds: np.ndarray
    zero_variance: np.ndarray  # bool per column


@dataclass(frozen=True)
class NeighborhoodMatrix:
    matrix: Matrix
    blocks: tuple[BlockScaling, ...]

    @property
    def values(self) -> np.ndarray:
        return self.matrix.values

    @property
    def col_names(self) -> tuple[str, ...]:
        return self.matrix.col_names

    def span(self, name: str) -> tuple[int, int]:
        for b in self.blocks:
            if b.name == name:
                return b.start, b.stop
        raise KeyError(name)


def assemble(blocks: list[FeatureBlock], modes: list[str]) -> NeighborhoodMatrix:
    """Column-concatenate blocks in order, applying each block's scaling mode."""
    if not blocks:
        raise ValidationError("assemble requires at least one block")
    if len(modes) != len(blocks):
        raise ValidationError(f"{len(modes)} modes for {len(blocks)} blocks")
    for mode in modes:
        if mode not in SCALING_MODES:
            raise ValidationError(f"unknown scaling mode {mode!r}; use one of {SCALING_MODES}")
    n = blocks[0].values.shape[0]
    for b in blocks:
        if b.values.shape[0] != n:
            raise ValidationError(
                f"block {b.name!r} has {b.values.shape[0]} rows, expected {n}"
            )

    parts, spans, col_names = [], [], []
    start = 0
    for block, mode in zip(blocks, modes):
        v = block.values
        means = v.mean(axis=0)
        sds = v.std(axis=0, ddof=1) if n > 1 else np.zeros(v.shape[1])
        zero_var = sds == 0.0
        if mode == "zscore":
            safe = np.where(zero_var, 1.0, sds)
            scaled = (v - means) / safe
            scaled[:, zero_var] = 0.0
        else:
            scaled = v
        stop = start + v.shape[1]
        parts.append(scaled)
        spans.append(
            BlockScaling(
                name=block.name,
                mode=mode,
                start=start,
                stop=stop,
                means=means,
                sds=sds,
                zero_variance=zero_var,
            )
        )
        col_names.extend(block.col_names)
        start = stop

    return NeighborhoodMatrix(
        matrix=Matrix(np.hstack(parts), tuple(col_names)), blocks=tuple(spans)
    )
