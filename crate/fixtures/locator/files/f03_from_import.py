from numpy import full


def twos(n):
    return full((n, n), 2)
