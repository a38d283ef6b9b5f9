import minilib

def broken(:
    minilib.io.load('x')
