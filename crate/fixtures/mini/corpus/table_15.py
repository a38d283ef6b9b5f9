from minilib import Table as T


def build_15(rows):
    return T(rows)


def join_15(left: 'T', right):
    joined = left.merge(right, how='inner')
    return joined
