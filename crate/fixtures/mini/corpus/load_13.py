import minilib as ml


def read_layout_13(path):
    """Load the layout file."""
    data = ml.io.load(
        path,
        'rb',
    )
    if not data:
        return None
    return data


def describe_13():
    return "layout"
