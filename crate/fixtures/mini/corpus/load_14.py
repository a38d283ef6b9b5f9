from minilib import io


def read_manifest_14(path):
    """Load the manifest file."""
    data = io.load(path)
    if not data:
        return None
    return data


def describe_14():
    return "manifest"
