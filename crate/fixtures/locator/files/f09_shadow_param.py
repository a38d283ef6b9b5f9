import numpy as np


def shadowed(np):
    return np.full(1, 2)


def plain():
    return np.full(1, 2)
