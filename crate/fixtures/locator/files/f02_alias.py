import numpy as np


def ones(n):
    arr = np.full(n, 1)
    return arr
