import torch


def flat(x: torch.Tensor):
    return x.reshape(-1)
