import minilib as ml


def read_records_1(path):
    """Load the records file."""
    data = ml.io.load(path, 'r')
    if not data:
        return None
    return data


def describe_1():
    return "records"
