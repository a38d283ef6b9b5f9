from minilib.io import load


def read_settings_10(path):
    """Load the settings file."""
    data = load(path)
    if not data:
        return None
    return data


def describe_10():
    return "settings"
