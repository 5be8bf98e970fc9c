"""Image, manifest and result file formats.

Images are binary PGM (``P5``, maxval 255) or CSV (one image row per line).
Manifests are CSV files of ``path,label`` rows; paths are relative to the
manifest directory unless an explicit root is given, ``#`` starts a comment
line and a leading ``path,label`` header is optional.
"""

import csv
import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dictionary import Dictionary


class ImageFormatError(ValueError):
    """Malformed or unsupported image or manifest file."""


def fmt(v):
    """Shortest round-tripping text for a float; plain text for other values."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return str(v)


_DIGITS = re.compile(rb"\d+")


def _read_pgm(path):
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise ImageFormatError(f"{path}: not a binary PGM (missing P5 magic)")
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
            continue
        m = _DIGITS.match(data, pos)
        if m is None:
            raise ImageFormatError(f"{path}: malformed PGM header")
        fields.append(int(m.group()))
        pos = m.end()
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise ImageFormatError(f"{path}: malformed PGM header")
    pos += 1
    width, height, maxval = fields
    if maxval != 255:
        raise ImageFormatError(f"{path}: PGM maxval {maxval} unsupported, need 255")
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: empty PGM image")
    raw = data[pos:pos + width * height]
    if len(raw) != width * height:
        raise ImageFormatError(
            f"{path}: PGM pixel data truncated ({len(raw)} of {width * height} bytes)"
        )
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width).astype(np.float64)


def _write_pgm(M, path):
    pix = np.clip(np.rint(M), 0, 255).astype(np.uint8)
    header = f"P5\n{pix.shape[1]} {pix.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + pix.tobytes())


def _read_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise ImageFormatError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ImageFormatError(f"{path}: empty CSV image")
    width = len(rows[0])
    for lineno, row in enumerate(rows, 1):
        if len(row) != width:
            raise ImageFormatError(
                f"{path}: row {lineno} has {len(row)} values, expected {width}"
            )
    M = np.array(rows)
    if not np.all(np.isfinite(M)):
        raise ImageFormatError(f"{path}: non-finite values")
    return M


def _write_csv(M, path):
    with open(path, "w", newline="") as fh:
        for row in np.asarray(M, dtype=np.float64):
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _suffix(path):
    ext = Path(path).suffix.lower()
    if ext not in (".pgm", ".csv"):
        raise ImageFormatError(f"{path}: unsupported image format {ext!r} (use .pgm or .csv)")
    return ext


def load_image(path):
    """Read a ``.pgm`` or ``.csv`` image as a float64 matrix."""
    ext = _suffix(path)
    try:
        return _read_pgm(path) if ext == ".pgm" else _read_csv(path)
    except OSError as exc:
        raise OSError(f"{path}: cannot read image ({exc.strerror or exc})") from exc


def save_image(M, path):
    """Write ``M`` as ``.pgm`` (clamped and rounded to 0..255) or ``.csv`` (exact)."""
    ext = _suffix(path)
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {M.shape}")
    if ext == ".pgm":
        _write_pgm(M, path)
    else:
        _write_csv(M, path)


@dataclass
class Manifest:
    """Labelled image list; ``entries`` holds ``(relative_path, label)`` pairs."""

    entries: list
    root: Path

    def paths(self):
        return [self.root / p for p, _ in self.entries]

    @property
    def labels(self):
        return [lab for _, lab in self.entries]

    def load_images(self):
        """Load every image, checking that all share one shape."""
        images = [load_image(p) for p in self.paths()]
        shape = images[0].shape
        for (rel, _), im in zip(self.entries, images):
            if im.shape != shape:
                raise ImageFormatError(
                    f"{self.root / rel}: shape {im.shape} differs from {shape}"
                )
        return images

    def to_dictionary(self):
        return Dictionary(np.stack(self.load_images()), self.labels)


def load_manifest(path, root=None):
    """Parse a ``path,label`` manifest CSV."""
    path = Path(path)
    root = path.parent if root is None else Path(root)
    entries = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise OSError(f"{path}: cannot read manifest ({exc.strerror or exc})") from exc
    with fh:
        lines = (ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#"))
        for lineno, row in enumerate(csv.reader(lines), 1):
            row = [c.strip() for c in row]
            if lineno == 1 and row == ["path", "label"]:
                continue
            if len(row) != 2 or not row[0] or not row[1]:
                raise ImageFormatError(f"{path}: bad manifest row {row!r}, expected path,label")
            entries.append((row[0], row[1]))
    if not entries:
        raise ImageFormatError(f"{path}: manifest has no entries")
    missing = [p for p, _ in entries if not (root / p).is_file()]
    if missing:
        raise ImageFormatError(f"{path}: missing image file(s): {', '.join(missing[:5])}")
    return Manifest(entries, root)


def write_manifest(entries, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["path", "label"])
        for p, lab in entries:
            w.writerow([os.fspath(p), lab])


def write_coefficients(x, path):
    """One coefficient per line, in dictionary order."""
    with open(path, "w") as fh:
        for v in np.asarray(x, dtype=np.float64):
            fh.write(fmt(v) + "\n")


def read_coefficients(path):
    with open(path) as fh:
        return np.array([float(ln) for ln in fh if ln.strip()])


TRACE_HEADER = ("iter", "primal", "dual", "eps_pri", "eps_dual", "objective")


def write_trace(trace, path):
    _write_rows(path, TRACE_HEADER, trace)


REPORT_HEADER = ("test_id", "predicted", "true", "correct", "margin", "converged")


def report_row(test_id, report, true_label):
    return (test_id, report.predicted_label, true_label,
            report.predicted_label == true_label, report.margin, report.converged)


def write_reports(rows, path):
    """``rows`` are tuples as produced by :func:`report_row`."""
    _write_rows(path, REPORT_HEADER, rows)


def write_class_errors(test_ids, reports, path):
    """Wide CSV with one column of reconstruction errors per class."""
    classes = list(reports[0].class_errors)
    rows = [[tid] + [rep.class_errors[c] for c in classes]
            for tid, rep in zip(test_ids, reports)]
    _write_rows(path, ["test_id"] + [str(c) for c in classes], rows)


SWEEP_HEADER = ("level", "kind", "seed", "method", "recognition_rate")


def write_sweep(rows, path):
    _write_rows(path, SWEEP_HEADER, rows)


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([fmt(v) for v in row] for row in rows)
