import numpy as np


def nested():
    return np.full(np.full(2, 1), 0)
