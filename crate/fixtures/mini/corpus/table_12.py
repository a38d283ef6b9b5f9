import minilib


def build_12(rows):
    return minilib.Table(rows)


def join_12(left: minilib.Table, right):
    joined = left.merge(right, how='inner')
    return joined
