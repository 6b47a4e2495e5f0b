"""Line-oriented instance files.

::

    # comment
    machines 4
    part 1
    route 3 4
    route 2 4
    part 2
    route 2 3

Parts must appear as ``part 1``, ``part 2``, ... and routes are numbered
globally in file order. Machine indices on a route are ascending.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import Instance, machines_of, validate_instance
from .errors import InstanceSyntaxError


def parse_instance(text: str) -> Instance:
    machine_count = None
    parts: list[list[int]] = []
    rows: list[list[int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *args = line.split()
        if keyword == "machines":
            if machine_count is not None:
                raise InstanceSyntaxError("duplicate 'machines' line", lineno)
            if len(args) != 1 or not args[0].isdigit() or int(args[0]) < 1:
                raise InstanceSyntaxError("expected 'machines <M>' with M >= 1", lineno)
            machine_count = int(args[0])
        elif keyword == "part":
            if machine_count is None:
                raise InstanceSyntaxError("'part' before 'machines'", lineno)
            if len(args) != 1 or not args[0].isdigit():
                raise InstanceSyntaxError("expected 'part <k>'", lineno)
            if int(args[0]) != len(parts) + 1:
                raise InstanceSyntaxError(
                    f"expected part {len(parts) + 1}, got part {args[0]}", lineno
                )
            parts.append([])
        elif keyword == "route":
            if not parts:
                raise InstanceSyntaxError("'route' before any 'part'", lineno)
            try:
                machines = [int(a) for a in args]
            except ValueError:
                raise InstanceSyntaxError("machine indices must be integers", lineno) from None
            for m in machines:
                if not 1 <= m <= machine_count:
                    raise InstanceSyntaxError(
                        f"machine {m} outside 1..{machine_count}", lineno
                    )
            if any(b <= a for a, b in zip(machines, machines[1:])):
                raise InstanceSyntaxError("machine indices must be strictly ascending", lineno)
            row = [0] * machine_count
            for m in machines:
                row[m - 1] = 1
            rows.append(row)
            parts[-1].append(len(rows))
        else:
            raise InstanceSyntaxError(f"unknown keyword {keyword!r}", lineno)
    if machine_count is None:
        raise InstanceSyntaxError("missing 'machines' line", max(1, len(text.splitlines())))
    incidence = rows if rows else np.zeros((0, machine_count), dtype=np.uint8)
    return validate_instance(
        {"machine_count": machine_count, "parts": parts, "incidence": incidence}
    )


def format_instance(instance: Instance) -> str:
    lines = [f"machines {instance.machine_count}"]
    for k, routes in enumerate(instance.parts, start=1):
        lines.append(f"part {k}")
        for i in routes:
            lines.append("route " + " ".join(str(m) for m in sorted(machines_of(instance, i))))
    return "\n".join(lines) + "\n"


def read_instance(path: str | Path) -> Instance:
    return parse_instance(Path(path).read_text())
