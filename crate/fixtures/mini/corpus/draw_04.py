from minilib import plot


def show_4(values):
    plot.draw(values)
