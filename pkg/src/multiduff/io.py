"""Artifact writers and the measurement-file reader.

Every emitted file starts with the same two comment lines: the
artifact version and the digest of the config file that produced it,
so any output can be traced back to the exact inputs.  Writers avoid
timestamps, locale formatting, and float rounding so that reruns with
the same config are byte-identical.
"""

from __future__ import annotations

import numpy as np

from . import __version__
from .dynamics import TrajectoryImage
from .errors import IOFormatError, ValidationError
from .estimation import AXES, DIRECTIONS, FitResult, Measurement

MEASUREMENT_HEADER = "freq_hz,amplitude_m,axis,direction"


def header_lines(digest: str) -> list:
    return [f"# artifact-version: {__version__}",
            f"# config-digest: sha256:{digest}"]


def _fmt(value) -> str:
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path, columns, rows, digest: str):
    """CSV with the standard comment header.  Floats are written with
    repr, whose shortest-roundtrip output is stable across runs."""
    lines = header_lines(digest)
    lines.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("row width does not match the column header")
        lines.append(",".join(_fmt(v) for v in row))
    _write_text(path, lines)


def write_fit_report(path, result: FitResult, digest: str):
    """Human-readable key = value listing of a fit outcome."""
    lines = header_lines(digest)
    lines.append(f"mode = {result.mode}")
    lines.append(f"n_points = {result.n_points}")
    lines.append(f"n_used = {result.n_used}")
    lines.append(f"residual_rms = {_fmt(result.residual_rms)}")
    for name in sorted(result.estimates):
        value = _fmt(result.estimates[name])
        if name in result.fixed:
            lines.append(f"{name} = {value} (fixed)")
        else:
            lines.append(f"{name} = {value} "
                         f"+- {_fmt(result.half_widths[name])}")
    _write_text(path, lines)


def write_pgm(path, image: TrajectoryImage, digest: str):
    """Binary (P5) grayscale image of an occupancy histogram.

    Rows run top to bottom in decreasing ordinate, columns left to
    right in increasing abscissa.  Counts are scaled to 0..255 with
    integer arithmetic so the bytes are exactly reproducible.
    """
    counts = np.flip(image.counts.T, axis=0)
    peak = int(counts.max())
    if peak > 0:
        pixels = (counts * 255) // peak
    else:
        pixels = np.zeros_like(counts)
    height, width = pixels.shape
    head = [b"P5"]
    head += [line.encode() for line in header_lines(digest)]
    head.append(f"# plane: {image.plane}".encode())
    head.append(f"{width} {height}".encode())
    head.append(b"255")
    try:
        with open(path, "wb") as fh:
            fh.write(b"\n".join(head) + b"\n")
            fh.write(pixels.astype(np.uint8).tobytes())
    except OSError as exc:
        raise IOFormatError(f"cannot write {path}: {exc}") from exc


def read_measurement_csv(path) -> Measurement:
    """Parse a measured response scan.

    The file may open with # comment lines, then must carry exactly
    the header `freq_hz,amplitude_m,axis,direction` followed by one
    row per measured point.  Structural problems (and rows that break
    the measurement contract, like a non-monotonic scan) raise
    IOFormatError with the offending line number where one exists.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise IOFormatError(f"cannot read {path}: {exc}") from exc

    lines = raw.splitlines()
    body = [(i + 1, ln.strip()) for i, ln in enumerate(lines)
            if ln.strip() and not ln.lstrip().startswith("#")]
    if not body:
        raise IOFormatError(f"{path}: no data rows")
    header_no, header = body[0]
    if header != MEASUREMENT_HEADER:
        raise IOFormatError(
            f"{path}:{header_no}: expected header "
            f"{MEASUREMENT_HEADER!r}, got {header!r}")
    if len(body) == 1:
        raise IOFormatError(f"{path}: no data rows")

    freq, amp, axis, direction = [], [], [], []
    for line_no, row in body[1:]:
        parts = [p.strip() for p in row.split(",")]
        if len(parts) != 4:
            raise IOFormatError(f"{path}:{line_no}: expected 4 fields, "
                                f"got {len(parts)}")
        try:
            freq.append(float(parts[0]))
            amp.append(float(parts[1]))
        except ValueError as exc:
            raise IOFormatError(f"{path}:{line_no}: {exc}") from exc
        if parts[2] not in AXES:
            raise IOFormatError(f"{path}:{line_no}: axis must be one of "
                                f"{sorted(AXES)}, got {parts[2]!r}")
        if parts[3] not in DIRECTIONS:
            raise IOFormatError(f"{path}:{line_no}: direction must be one "
                                f"of {sorted(DIRECTIONS)}, got {parts[3]!r}")
        axis.append(parts[2])
        direction.append(parts[3])

    try:
        return Measurement(freq_hz=np.array(freq), amplitude_m=np.array(amp),
                           axis=tuple(axis), direction=tuple(direction))
    except ValidationError as exc:
        raise IOFormatError(f"{path}: {exc}") from exc


def write_measurement_csv(path, measurement: Measurement, digest: str):
    """Inverse of read_measurement_csv, with the artifact header."""
    rows = zip(measurement.freq_hz, measurement.amplitude_m,
               measurement.axis, measurement.direction)
    lines = header_lines(digest)
    lines.append(MEASUREMENT_HEADER)
    lines += [f"{_fmt(f)},{_fmt(a)},{ax},{d}" for f, a, ax, d in rows]
    _write_text(path, lines)


def _write_text(path, lines):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IOFormatError(f"cannot write {path}: {exc}") from exc
