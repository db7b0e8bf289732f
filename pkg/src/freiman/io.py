"""Plain-text formats for sets and maps.

Set file::

    group=4,9
    0
    5
    17

Map file (one ``x h`` pair per line, ``x`` in the source group)::

    target=7
    0 2
    1 5

Blank lines and ``#`` comments are ignored.  Set elements must be strictly
increasing.
"""

from __future__ import annotations

from pathlib import Path

from .groups import GroupSpec
from .quadruples import SubsetSample


class FormatError(ValueError):
    pass


def _lines(path):
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _header(lines, key):
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise FormatError(f"missing '{key}=' header") from None
    if not line.startswith(key + "="):
        raise FormatError(f"line {lineno}: expected '{key}=<factors>'")
    return GroupSpec.parse(line[len(key) + 1:])


def read_set(path) -> SubsetSample:
    lines = _lines(path)
    group = _header(lines, "group")
    elems = []
    for lineno, line in lines:
        try:
            x = int(line)
        except ValueError:
            raise FormatError(f"line {lineno}: not an integer: {line!r}") from None
        if not 0 <= x < group.order:
            raise FormatError(f"line {lineno}: element {x} outside [0, {group.order})")
        if elems and x <= elems[-1]:
            raise FormatError(f"line {lineno}: elements must be strictly increasing")
        elems.append(x)
    return SubsetSample.explicit(group, elems)


def write_set(path, A: SubsetSample) -> None:
    body = "".join(f"{x}\n" for x in A.tolist())
    Path(path).write_text(f"group={A.group}\n{body}")


def read_map(path) -> tuple[GroupSpec, dict[int, int]]:
    lines = _lines(path)
    target = _header(lines, "target")
    phi = {}
    for lineno, line in lines:
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected 'x h'")
        try:
            x, h = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"line {lineno}: not integers: {line!r}") from None
        if not 0 <= h < target.order:
            raise FormatError(f"line {lineno}: value {h} outside [0, {target.order})")
        if x in phi:
            raise FormatError(f"line {lineno}: duplicate argument {x}")
        phi[x] = h
    return target, phi


def write_map(path, target: GroupSpec, phi: dict[int, int]) -> None:
    body = "".join(f"{x} {h}\n" for x, h in sorted(phi.items()))
    Path(path).write_text(f"target={target}\n{body}")
