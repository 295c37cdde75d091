"""A small BN-heavy CNN classifier and its deterministic pretraining."""

from __future__ import annotations

from collections import OrderedDict

import torch
from torch import nn

from .toydata import NUM_CLASSES, augment


def _block(cin: int, cout: int, pool: bool = True) -> nn.Sequential:
    layers = OrderedDict(
        conv=nn.Conv2d(cin, cout, kernel_size=3, padding=1),
        bn=nn.BatchNorm2d(cout),
        relu=nn.ReLU(inplace=True),
    )
    if pool:
        layers["pool"] = nn.MaxPool2d(2)
    return nn.Sequential(layers)


class TinyCNN(nn.Module):
    """Three conv/BN blocks and a linear head; block3 is the "last block"."""

    def __init__(self, num_classes: int = NUM_CLASSES):
        super().__init__()
        self.block1 = _block(1, 16)
        self.block2 = _block(16, 32)
        self.block3 = _block(32, 64, pool=False)
        self.head = nn.Sequential(
            OrderedDict(pool=nn.AdaptiveAvgPool2d(1), flatten=nn.Flatten(), fc=nn.Linear(64, num_classes))
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.block3(self.block2(self.block1(x))))


def build_pretrained(
    images: torch.Tensor,
    labels: torch.Tensor,
    *,
    epochs: int = 2,
    batch_size: int = 64,
    seed: int = 0,
    lr: float = 1e-2,
) -> TinyCNN:
    """Train TinyCNN on the given source data, with train-time augmentation.

    Augmentation matters beyond accuracy: the stored BN statistics end up
    calibrated to the augmented training distribution, a realistic offset
    from any un-augmented test stream.
    """
    torch.manual_seed(seed)
    model = TinyCNN()
    gen = torch.Generator().manual_seed(seed + 1)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    loss_fn = nn.CrossEntropyLoss()
    n = images.shape[0]
    model.train()
    for _ in range(epochs):
        order = torch.randperm(n, generator=gen)
        for start in range(0, n - batch_size + 1, batch_size):
            idx = order[start : start + batch_size]
            batch = augment(images[idx], gen)
            optimizer.zero_grad()
            loss = loss_fn(model(batch), labels[idx])
            loss.backward()
            optimizer.step()
    model.eval()
    return model
