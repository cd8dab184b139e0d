"""Flat-file formats: trajectory CSV and the plain-text density matrix file.

Trajectory CSV
    Header ``t,gamma_t,C,rho11_re,rho11_im,...,rho44_re,rho44_im`` (entries
    row-major), numbers printed with 17 significant digits, LF endings.

Matrix file
    Four non-comment lines of four whitespace-separated complex entries,
    written ``a+bi`` / ``a-bi`` (a bare real ``a`` or imaginary ``bi`` is also
    accepted).  Lines starting with ``#`` and blank lines are ignored.
"""

from __future__ import annotations

import csv
import io
import re
from pathlib import Path

import numpy as np

from .errors import UsageError
from .model import validate_density_matrix

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = re.compile(rf"^(?P<re>[+-]?{_NUM})?(?:(?P<im>[+-]?{_NUM})?(?P<unit>i))?$")

ENTRY_COLUMNS = [f"rho{i + 1}{k + 1}_{part}" for i in range(4) for k in range(4) for part in ("re", "im")]
TRAJECTORY_HEADER = ["t", "gamma_t", "C"] + ENTRY_COLUMNS


class ParseError(UsageError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def fmt(x: float) -> str:
    """Shortest round-trip-safe text for a float at 17 significant digits."""
    x = float(x)
    if x == 0.0:
        return "0"  # folds -0.0 so output does not depend on the sign of zero
    return f"{x:.17g}"


def parse_complex(token: str) -> complex:
    m = _COMPLEX.match(token)
    if not m or token in ("", "+", "-") or (m.group("re") is None and m.group("unit") is None):
        raise ValueError(f"malformed complex entry {token!r}")
    real = float(m.group("re")) if m.group("re") else 0.0
    if m.group("unit"):
        im_text = m.group("im")
        if im_text is None:
            # "2i" parses as re="2", unit="i": the number is the imaginary part
            if m.group("re") is None:
                raise ValueError(f"malformed complex entry {token!r}")
            return complex(0.0, real)
        return complex(real, float(im_text))
    return complex(real, 0.0)


def format_complex(z: complex) -> str:
    re_part = fmt(z.real)
    im = z.imag
    sign = "-" if (im < 0) else "+"
    return f"{re_part}{sign}{fmt(abs(im))}i"


def parse_density_matrix(text: str) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 4:
            raise ParseError(f"expected 4 entries, found {len(tokens)}", lineno, 1)
        row = []
        col = 0
        for token in tokens:
            col = line.index(token, col) + 1
            try:
                row.append(parse_complex(token))
            except ValueError as exc:
                raise ParseError(str(exc), lineno, col) from None
            col += len(token) - 1
        rows.append((lineno, row))
    if len(rows) != 4:
        last = rows[-1][0] if rows else 0
        raise ParseError(f"expected 4 matrix rows, found {len(rows)}", last + 1 if len(rows) < 4 else rows[4][0], 1)
    return np.array([r for _, r in rows], dtype=complex)


def read_density_matrix_file(path) -> np.ndarray:
    """Parse and validate a matrix file; invariant failures raise ``DomainError``."""
    text = Path(path).read_text()
    return validate_density_matrix(parse_density_matrix(text))


def write_density_matrix_file(path, rho, comment: str | None = None) -> None:
    lines = [f"# {comment}"] if comment else []
    for row in np.asarray(rho, dtype=complex):
        lines.append(" ".join(format_complex(z) for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_csv(path, header, rows) -> None:
    """Write rows of preformatted or numeric cells with LF line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    Path(path).write_bytes(buf.getvalue().encode("ascii"))


def trajectory_rows(traj, gamma: float):
    for t, state, c in zip(traj.times, traj.states, traj.concurrences):
        cells = [t, gamma * t, c]
        for z in np.asarray(state).reshape(-1):
            cells += [z.real, z.imag]
        yield cells


def write_trajectory_csv(path, traj, gamma: float) -> None:
    write_csv(path, TRAJECTORY_HEADER, trajectory_rows(traj, gamma))


def read_trajectory_csv(path):
    """Return ``(times, gamma_times, concurrences, states)`` from a trajectory CSV."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRAJECTORY_HEADER:
            raise ParseError("unexpected trajectory header", 1, 1)
        data = np.array([[float(x) for x in row] for row in reader])
    if data.size == 0:
        return np.empty(0), np.empty(0), np.empty(0), np.empty((0, 4, 4), dtype=complex)
    entries = data[:, 3::2] + 1j * data[:, 4::2]
    return data[:, 0], data[:, 1], data[:, 2], entries.reshape(-1, 4, 4)
