import torch


def make() -> torch.Tensor:
    return torch.zeros(4)


def use():
    t = make()
    return t.reshape(2, 2)
