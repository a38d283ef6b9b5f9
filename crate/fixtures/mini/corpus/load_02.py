from minilib import io


def read_settings_2(path):
    """Load the settings file."""
    data = io.load(path)
    if not data:
        return None
    return data


def describe_2():
    return "settings"
