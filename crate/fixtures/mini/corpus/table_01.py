import minilib as ml


def combine_1(rows, extra):
    table = ml.Table(rows)
    other = ml.Table(extra)
    result = table.merge(other)
    return result.merge(other)
