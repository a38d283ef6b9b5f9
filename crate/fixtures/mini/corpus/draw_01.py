from minilib import plot


def show_1(values):
    plot.draw(values)
