from minilib import Table


def combine_10(rows, extra):
    table = Table(rows)
    other = Table(extra)
    result = table.merge(other)
    return result.merge(other)
