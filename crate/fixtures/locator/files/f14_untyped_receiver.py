import torch


def unknown(x):
    return x.reshape(3)
