from minilib import io


def read_config_8(path):
    """Load the config file."""
    data = io.load(
        path,
        'rb',
    )
    if not data:
        return None
    return data


def describe_8():
    return "config"
