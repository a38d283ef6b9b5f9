def inner_import():
    import numpy as np
    return np.full(5, 5)


def no_import():
    return np.full(5, 5)
