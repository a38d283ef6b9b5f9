import minilib


def read_config_0(path):
    """Load the config file."""
    data = minilib.io.load(path)
    if not data:
        return None
    return data


def describe_0():
    return "config"
