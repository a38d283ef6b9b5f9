from minilib import Table as T


def combine_11(rows, extra):
    table = T(rows)
    other = T(extra)
    result = table.merge(other)
    return result.merge(other)
