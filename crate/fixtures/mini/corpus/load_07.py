import minilib as ml


def read_schema_7(path):
    """Load the schema file."""
    data = ml.io.load(path, 'r')
    if not data:
        return None
    return data


def describe_7():
    return "schema"
