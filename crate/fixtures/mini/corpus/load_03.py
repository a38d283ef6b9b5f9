import minilib.io as mio


def read_cache_3(path):
    """Load the cache file."""
    data = mio.load(
        path,
        'rb',
    )
    if not data:
        return None
    return data


def describe_3():
    return "cache"
