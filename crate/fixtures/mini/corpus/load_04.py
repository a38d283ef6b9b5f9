from minilib.io import load


def read_index_4(path):
    """Load the index file."""
    data = load(path)
    if not data:
        return None
    return data


def describe_4():
    return "index"
