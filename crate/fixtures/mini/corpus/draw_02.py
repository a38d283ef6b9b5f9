from minilib import plot


def show_2(values):
    plot.draw(values)
