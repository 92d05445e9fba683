import numpy as np

from core.errors import ShapeMismatchError, UsageError


def as_matrix(a) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise UsageError(f"Expected a 2-D matrix, got shape {arr.shape}.")
    return arr


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"Inner dimensions differ: {a.shape} @ {b.shape}.")
    return a @ b


def transpose(a) -> np.ndarray:
    return as_matrix(a).T.copy()


def frob_norm(a) -> float:
    return float(np.linalg.norm(as_matrix(a), "fro"))
