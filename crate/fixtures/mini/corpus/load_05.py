from minilib.io import load as read_file


def read_layout_5(path):
    """Load the layout file."""
    data = read_file(path, 'r')
    if not data:
        return None
    return data


def describe_5():
    return "layout"
