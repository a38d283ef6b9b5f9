from .numpy import full


def local_full():
    return full(1, 1)
