"""Published reference values, transcribed by hand."""
import numpy as np

from ultrametric.core import Dendrogram, Node

IRIS_LABELS = [f"iris{i}" for i in range(1, 9)]

# first eight iris observations: sepal length, sepal width, petal length, petal width
IRIS8 = np.array([
    [5.1, 3.5, 1.4, 0.2],
    [4.9, 3.0, 1.4, 0.2],
    [4.7, 3.2, 1.3, 0.2],
    [4.6, 3.1, 1.5, 0.2],
    [5.0, 3.6, 1.4, 0.2],
    [5.4, 3.9, 1.7, 0.4],
    [4.6, 3.4, 1.4, 0.3],
    [5.0, 3.4, 1.5, 0.2],
])
IRIS7 = IRIS8[:7]

_A, _B, _C, _D, _E = 0.6480741, 1.1661904, 0.3316625, 0.2449490, 0.6164414
_F = 0.9949874
IRIS7_COPHENETIC = np.array([
    [0, _A, _A, _A, _B, _B, _B],
    [_A, 0, _C, _C, _B, _B, _B],
    [_A, _C, 0, _D, _B, _B, _B],
    [_A, _C, _D, 0, _B, _B, _B],
    [_B, _B, _B, _B, 0, _E, _F],
    [_B, _B, _B, _B, _E, 0, _F],
    [_B, _B, _B, _B, _F, _F, 0],
])

# rows: attributes; columns: s_7, d_7, d_6, ..., d_1
IRIS8_HAAR = np.array([
    [5.146875, 0.253125, 0.13125, 0.1375, -0.025, 0.05, -0.025, 0.05],
    [3.603125, 0.296875, 0.16875, -0.1375, 0.125, 0.05, -0.075, -0.05],
    [1.562500, 0.137500, 0.02500, 0.0000, 0.000, -0.10, 0.050, 0.00],
    [0.306250, 0.093750, -0.01250, -0.0250, 0.050, 0.00, 0.000, 0.00],
])

X8_CODES = np.array([
    [1, 1, 0, 0, 1, 0, 1],
    [-1, 1, 0, 0, 1, 0, 1],
    [0, -1, 0, 0, 1, 0, 1],
    [0, 0, 1, 1, -1, 0, 1],
    [0, 0, -1, 1, -1, 0, 1],
    [0, 0, 0, -1, -1, 0, 1],
    [0, 0, 0, 0, 0, 1, -1],
    [0, 0, 0, 0, 0, -1, -1],
])

BOOLEAN5_OBJECTS = ("a", "b", "c", "e", "f")
BOOLEAN5 = np.array([
    [1, 0, 1],
    [0, 1, 1],
    [1, 0, 1],
    [1, 0, 0],
    [0, 0, 1],
])


def _tree(labels, spec):
    n = len(labels)

    def ref(s):
        kind, k = s.split(":")
        return int(k) if kind == "t" else n + int(k) - 1

    nodes = [Node(r, float(r), ref(a), ref(b)) for r, (a, b) in enumerate(spec, start=1)]
    return Dendrogram(labels, nodes)


# eight terminals x1..x8, heights equal to ranks
X8_TREE = _tree([f"x{i}" for i in range(1, 9)], [
    ("t:0", "t:1"), ("n:1", "t:2"), ("t:3", "t:4"), ("n:3", "t:5"),
    ("n:2", "n:4"), ("t:6", "t:7"), ("n:5", "n:6"),
])

# the median-criterion hierarchy on IRIS8; the first-listed child carries +d
IRIS8_MEDIAN_TREE = _tree(IRIS_LABELS, [
    ("t:0", "t:4"), ("t:7", "n:1"), ("t:2", "t:3"), ("t:6", "n:3"),
    ("t:1", "n:4"), ("n:2", "n:5"), ("t:5", "n:6"),
])

# ultrametricity proportion per generator and dimension (20, 200, 2000, 20000)
CLOUD_UM = {
    "uniform": [0.13, 0.36, 0.84, 0.94],
    "hypercube": [0.16, 0.36, 0.87, 0.96],
    "gaussian": [0.13, 0.36, 0.80, 0.98],
}
CLOUD_DIMS = (20, 200, 2000, 20000)
