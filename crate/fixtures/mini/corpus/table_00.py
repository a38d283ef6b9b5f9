import minilib


def build_0(rows):
    return minilib.Table(rows)


def join_0(left: minilib.Table, right):
    joined = left.merge(right, how='inner')
    return joined
