from numpy import *


def starred():
    return full(2, 0)
