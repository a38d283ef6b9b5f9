from minilib.io import load as read_file


def read_cache_11(path):
    """Load the cache file."""
    data = read_file(path, 'r')
    if not data:
        return None
    return data


def describe_11():
    return "cache"
