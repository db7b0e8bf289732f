"""Input checks shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .groups import GroupSpec
from .quadruples import SubsetSample


def check_group(group) -> GroupSpec:
    if isinstance(group, GroupSpec):
        return group
    if isinstance(group, (int, np.integer)):
        return GroupSpec.cyclic(int(group))
    if isinstance(group, str):
        return GroupSpec.parse(group)
    if isinstance(group, (tuple, list)):
        return GroupSpec(tuple(group))
    raise TypeError(f"cannot interpret {group!r} as a group")


def _column(X, name: str) -> np.ndarray:
    arr = np.asarray(X)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    arr = check_array(arr, ensure_2d=False, dtype=None, ensure_min_samples=0, input_name=name)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional (or a single column)")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.mod(arr, 1) == 0):
            raise ValueError(f"{name} must hold integer group indices")
    return arr.astype(np.int64)


def check_elements(X, group: GroupSpec, name: str = "X") -> np.ndarray:
    """1-d int64 array of element indices, range-checked, order kept."""
    arr = _column(X, name)
    if arr.size and (arr.min() < 0 or arr.max() >= group.order):
        raise ValueError(f"{name} has entries outside [0, {group.order})")
    return arr


def check_subset(X, group: GroupSpec, allow_empty: bool = False) -> SubsetSample:
    arr = check_elements(X, group)
    if np.unique(arr).size != arr.size:
        raise ValueError("X contains repeated elements")
    if arr.size == 0 and not allow_empty:
        raise ValueError("empty set")
    return SubsetSample.explicit(group, np.sort(arr))


def check_values(y, target: GroupSpec, n: int) -> np.ndarray:
    arr = check_elements(y, target, name="y")
    if arr.size != n:
        raise ValueError(f"y has {arr.size} entries, expected {n}")
    return arr
