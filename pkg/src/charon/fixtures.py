"""Small hand-written networks used by the tests, demos and docs.

``robust_net``: 1 input, 2 classes; robust for class 1 on [-1, 1], not on [-1, 2].
``xor_net``: 2 inputs, 2 classes; computes XOR on {0, 1}^2.
``zonotope_net``: 2 inputs, classes (A, B); class B holds on [0, 1]^2 but the plain
zonotope domain cannot show it while a two-disjunct powerset can.
"""
from .network import Network

CLASS_A, CLASS_B = 0, 1


def robust_net() -> Network:
    return Network.from_arrays(
        [[[1.0], [2.0]], [[2.0, 1.0], [-1.0, 1.0]]],
        [[-1.0, 1.0], [1.0, 2.0]],
    )


def xor_net() -> Network:
    return Network.from_arrays(
        [[[1.0, 1.0], [1.0, 1.0]], [[-1.0, 2.0], [1.0, -2.0]]],
        [[0.0, -1.0], [1.0, 0.0]],
    )


def zonotope_net() -> Network:
    return Network.from_arrays(
        [[[1.0, -3.0], [0.0, 3.0]], [[1.0, 1.1], [-1.0, 1.0]]],
        [[1.0, 1.0], [-3.0, 1.2]],
    )
