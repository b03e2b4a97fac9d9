"""Built-in convolutional feature extractors.

The estimator treats the extractor as pluggable (larger pretrained
backbones slot in behind the same interface); the two shipped here are
small enough to train from scratch in CI without downloading anything.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError


@dataclass(frozen=True)
class ConvLayerSpec:
    out_channels: int
    kernel: int
    stride: int


@dataclass(frozen=True)
class ExtractorSpec:
    """Architecture descriptor: valid (unpadded) convs + one fc layer."""

    extractor_id: str
    input_size: int
    in_channels: int
    convs: tuple[ConvLayerSpec, ...]
    fc_dim: int

    def conv_output_shape(self) -> tuple[int, int]:
        """(channels, side) after the conv stack."""
        side = self.input_size
        channels = self.in_channels
        for layer in self.convs:
            side = (side - layer.kernel) // layer.stride + 1
            channels = layer.out_channels
        return channels, side

    @property
    def flat_dim(self) -> int:
        channels, side = self.conv_output_shape()
        return channels * side * side


ARCHITECTURES = {
    "conv-small": ExtractorSpec(
        "conv-small", 64, 3,
        (ConvLayerSpec(8, 5, 2), ConvLayerSpec(16, 3, 2),
         ConvLayerSpec(32, 3, 2), ConvLayerSpec(32, 3, 2)),
        96),
    "conv-base": ExtractorSpec(
        "conv-base", 64, 3,
        (ConvLayerSpec(12, 5, 2), ConvLayerSpec(24, 3, 2),
         ConvLayerSpec(48, 3, 2), ConvLayerSpec(64, 3, 2)),
        128),
}


def get_extractor(extractor_id: str) -> ExtractorSpec:
    try:
        return ARCHITECTURES[extractor_id]
    except KeyError:
        raise ConfigError(
            f"unknown feature extractor {extractor_id!r}; "
            f"available: {sorted(ARCHITECTURES)}") from None
