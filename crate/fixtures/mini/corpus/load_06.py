import minilib


def read_manifest_6(path):
    """Load the manifest file."""
    data = minilib.io.load(path)
    if not data:
        return None
    return data


def describe_6():
    return "manifest"
