from minilib import Table as T


def combine_7(rows, extra):
    table = T(rows)
    other = T(extra)
    result = table.merge(other)
    return result.merge(other)
