from minilib import Table as T


def build_3(rows):
    return T(rows)


def join_3(left: 'T', right):
    joined = left.merge(right, how='inner')
    return joined
