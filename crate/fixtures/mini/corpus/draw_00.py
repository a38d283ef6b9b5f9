from minilib import plot


def show_0(values):
    plot.draw(values)
