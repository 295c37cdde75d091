"""Deterministic toy image domains: oriented gratings, clean and corrupted.

Four texture classes (grating orientation/frequency pairs) with per-image
random phase and mild pixel noise. The "corrupted" domain applies heavy
additive noise plus a contrast/brightness shift to the same underlying
images — visually the same dataset from a much worse sensor.
"""

from __future__ import annotations

import math

import torch

NUM_CLASSES = 4
_ORIENTATIONS = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)
_FREQUENCIES = (2.0, 3.0, 4.0, 5.0)


def make_images(n: int, size: int = 32, seed: int = 0) -> tuple[torch.Tensor, torch.Tensor]:
    """n grating images (n, 1, size, size) in [0, 1] with class labels.

    Labels cycle 0..NUM_CLASSES-1 so any batch size divisible by
    NUM_CLASSES sees a balanced class mix — the many-class regime of real
    evaluation streams, where per-batch composition noise is negligible.
    """
    gen = torch.Generator().manual_seed(seed)
    labels = torch.arange(n) % NUM_CLASSES
    coords = torch.linspace(-1.0, 1.0, size)
    yy, xx = torch.meshgrid(coords, coords, indexing="ij")
    images = torch.empty(n, 1, size, size)
    phases = torch.rand(n, generator=gen) * 2 * math.pi
    for i in range(n):
        c = int(labels[i])
        theta, freq = _ORIENTATIONS[c], _FREQUENCIES[c]
        wave = torch.sin(
            2 * math.pi * freq * (xx * math.cos(theta) + yy * math.sin(theta)) + phases[i]
        )
        images[i, 0] = 0.5 + 0.4 * wave
    images += 0.03 * torch.randn(images.shape, generator=gen)
    return images.clamp(0.0, 1.0), labels


def corrupt(images: torch.Tensor, seed: int = 0, noise: float = 0.35) -> torch.Tensor:
    """Heavy sensor-style corruption: strong noise, crushed contrast, glare."""
    gen = torch.Generator().manual_seed(seed)
    out = 0.45 * images + 0.35  # contrast crush + brightness lift
    out = out + noise * torch.randn(images.shape, generator=gen)
    return out.clamp(0.0, 1.0)


def augment(images: torch.Tensor, gen: torch.Generator) -> torch.Tensor:
    """Train-time augmentation: shifts, flips, jitter, light noise."""
    n, _, h, w = images.shape
    out = images.clone()
    shifts = torch.randint(-3, 4, (n, 2), generator=gen)
    flips = torch.rand(n, generator=gen) < 0.5
    gains = 1.0 + 0.2 * (torch.rand(n, generator=gen) - 0.5)
    offsets = 0.1 * (torch.rand(n, generator=gen) - 0.5)
    for i in range(n):
        img = torch.roll(out[i], shifts=(int(shifts[i, 0]), int(shifts[i, 1])), dims=(1, 2))
        if flips[i]:
            img = torch.flip(img, dims=(2,))
        out[i] = img * gains[i] + offsets[i]
    out += 0.05 * torch.randn(out.shape, generator=gen)
    return out.clamp(0.0, 1.0)


def batched(images: torch.Tensor, batch_size: int) -> list[torch.Tensor]:
    """Full batches only, in order; a partial tail batch is dropped."""
    n_full = images.shape[0] // batch_size
    return [images[i * batch_size : (i + 1) * batch_size] for i in range(n_full)]
