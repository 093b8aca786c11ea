"""Text file format for dense tensors ("cpdhnf-tensor v1").

Line 1: magic and version.  Line 2: scalar field tag (real|complex).
Line 3: order d.  Line 4: space-separated dimensions.  Remaining content:
whitespace-separated scalars in row-major order, complex values as
``re im`` pairs.  Writers emit 17 significant digits.
"""

import numpy as np

from .tensors import COMPLEX, REAL, DenseTensor

MAGIC = "cpdhnf-tensor v1"


def write_tensor(path, t):
    flat = t.ravel()
    with open(path, "w") as fh:
        fh.write(MAGIC + "\n")
        fh.write(t.scalars + "\n")
        fh.write(f"{t.order}\n")
        fh.write(" ".join(str(s) for s in t.shape) + "\n")
        if t.scalars == COMPLEX:
            vals = [f"{z.real:.17g} {z.imag:.17g}" for z in flat]
        else:
            vals = [f"{x:.17g}" for x in flat]
        fh.write("\n".join(vals) + "\n")


def read_tensor(path):
    with open(path) as fh:
        magic = fh.readline().strip()
        if magic != MAGIC:
            raise ValueError(f"bad magic line {magic!r}, expected {MAGIC!r}")
        scalars = fh.readline().strip()
        if scalars not in (REAL, COMPLEX):
            raise ValueError(f"unknown field tag {scalars!r}")
        order = int(fh.readline())
        dims = tuple(int(tok) for tok in fh.readline().split())
        if len(dims) != order:
            raise ValueError(f"expected {order} dimensions, got {len(dims)}")
        tokens = fh.read().split()
    count = int(np.prod(dims))
    if scalars == COMPLEX:
        if len(tokens) != 2 * count:
            raise ValueError(f"expected {2 * count} scalars, got {len(tokens)}")
        raw = np.array(tokens, dtype=float).reshape(count, 2)
        data = (raw[:, 0] + 1j * raw[:, 1]).reshape(dims)
    else:
        if len(tokens) != count:
            raise ValueError(f"expected {count} scalars, got {len(tokens)}")
        data = np.array(tokens, dtype=float).reshape(dims)
    return DenseTensor(data, scalars)
