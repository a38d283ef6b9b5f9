import minilib


def local(minilib):
    return minilib.io.load('x')
