import minilib


def read_index_12(path):
    """Load the index file."""
    data = minilib.io.load(path)
    if not data:
        return None
    return data


def describe_12():
    return "index"
