import numpy as np


def misses(obj):
    ref = np.full
    obj.np.full(1, 2)
    np.fullx(1, 2)
    text = 'np.full(1, 2)'
    # np.full(3, 4)
    return ref, text
