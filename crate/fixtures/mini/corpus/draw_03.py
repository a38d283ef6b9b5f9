from minilib import plot


def show_3(values):
    plot.draw(values)
