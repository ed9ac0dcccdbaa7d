"""U-Net for image-to-image artifact correction on 64 x 64 rasters.

Contracting path: `levels` blocks of (conv3x3 -> BN -> ReLU) x 2 followed by
2x2 max pooling, doubling the channel count from `base_channels` at each
level.  Expansive path: 3x3 transposed convolutions (stride 2) for
upsampling, skip concatenation with the matching encoder features, then the
same double-conv block.  All convolutions are 3x3 with "same" padding; the
head maps back to one channel, so output spatial dims equal input dims.
"""

from __future__ import annotations

import torch
from torch import nn


def _double_conv(in_ch: int, out_ch: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, kernel_size=3, padding=1, bias=False),
        nn.BatchNorm2d(out_ch),
        nn.ReLU(inplace=True),
        nn.Conv2d(out_ch, out_ch, kernel_size=3, padding=1, bias=False),
        nn.BatchNorm2d(out_ch),
        nn.ReLU(inplace=True),
    )


class UNet(nn.Module):
    def __init__(self, levels: int = 4, base_channels: int = 64, in_channels: int = 1):
        super().__init__()
        if levels < 1 or base_channels < 1:
            raise ValueError(f"invalid architecture ({levels=}, {base_channels=})")
        self.levels = levels
        self.base_channels = base_channels

        self.encoders = nn.ModuleList()
        ch = in_channels
        enc_channels = []
        for i in range(levels):
            out_ch = base_channels * 2**i
            self.encoders.append(_double_conv(ch, out_ch))
            enc_channels.append(out_ch)
            ch = out_ch
        self.pool = nn.MaxPool2d(2)
        self.bottleneck = _double_conv(ch, ch * 2)
        ch *= 2

        self.upsamplers = nn.ModuleList()
        self.decoders = nn.ModuleList()
        for skip_ch in reversed(enc_channels):
            self.upsamplers.append(
                nn.ConvTranspose2d(
                    ch, skip_ch, kernel_size=3, stride=2, padding=1, output_padding=1
                )
            )
            self.decoders.append(_double_conv(skip_ch * 2, skip_ch))
            ch = skip_ch
        self.head = nn.Conv2d(ch, 1, kernel_size=3, padding=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] % 2**self.levels or x.shape[-2] % 2**self.levels:
            raise ValueError(
                f"input spatial dims {tuple(x.shape[-2:])} must be divisible by "
                f"2^levels = {2 ** self.levels}"
            )
        skips = []
        for encoder in self.encoders:
            x = encoder(x)
            skips.append(x)
            x = self.pool(x)
        x = self.bottleneck(x)
        for upsample, decoder, skip in zip(self.upsamplers, self.decoders, reversed(skips)):
            x = upsample(x)
            x = decoder(torch.cat([skip, x], dim=1))
        return self.head(x)


def build_unet(levels: int = 4, base_channels: int = 64) -> UNet:
    """Fresh U-Net with the canonical 1-channel input/output configuration."""
    return UNet(levels=levels, base_channels=base_channels)
