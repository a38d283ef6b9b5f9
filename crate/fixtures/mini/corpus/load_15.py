import minilib.io as mio


def read_schema_15(path):
    """Load the schema file."""
    data = mio.load(path, 'r')
    if not data:
        return None
    return data


def describe_15():
    return "schema"
