"""File formats: binary timetags, CSV tables, minimal SVG line plots.

Timetag files carry the 8-byte magic ``QMWPTT01`` followed by little-endian
records of (uint8 channel id, uint64 time in femtoseconds). Femtosecond grain
preserves jittered sub-bin times through a round trip; channel 0 is the
signal arm and channel 1 the idler by convention.

All writers are write-to-temp-then-rename, so a crashed run never leaves a
half-written artifact behind.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ContractError
from .link import TimeTagStream
from .source import PairStream

TIMETAG_MAGIC = b"QMWPTT01"
FS_PER_PS = 1000.0

_RECORD_DTYPE = np.dtype([("channel", "u1"), ("time_fs", "<u8")])

SIGNAL_CHANNEL = 0
IDLER_CHANNEL = 1


def _atomic_write(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_timetags(path: str | Path, streams: list[TimeTagStream]) -> None:
    """Merge channels time-sorted and write one binary timetag file."""
    path = Path(path)
    chans = np.concatenate(
        [np.full(len(s), s.channel_id, dtype=np.uint8) for s in streams]
    ) if streams else np.empty(0, dtype=np.uint8)
    times = np.concatenate([s.times for s in streams]) if streams else np.empty(0)
    if np.any(times < 0):
        raise ContractError("timetag files cannot store negative times")

    order = np.argsort(times, kind="stable")
    records = np.empty(len(times), dtype=_RECORD_DTYPE)
    records["channel"] = chans[order]
    records["time_fs"] = np.round(times[order] * FS_PER_PS).astype(np.uint64)
    _atomic_write(path, TIMETAG_MAGIC + records.tobytes())


def read_timetags(path: str | Path) -> dict[int, np.ndarray]:
    """Read a timetag file back into per-channel sorted time arrays (ps)."""
    raw = Path(path).read_bytes()
    if raw[: len(TIMETAG_MAGIC)] != TIMETAG_MAGIC:
        raise ContractError(f"{path}: bad magic, not a timetag file")
    records = np.frombuffer(raw[len(TIMETAG_MAGIC) :], dtype=_RECORD_DTYPE)
    out: dict[int, np.ndarray] = {}
    for ch in np.unique(records["channel"]):
        t = records["time_fs"][records["channel"] == ch].astype(np.float64) / FS_PER_PS
        out[int(ch)] = np.sort(t)
    return out


def write_pair_timetags(
    path: str | Path, pairs: PairStream, detuning_sidecar: bool = False
) -> None:
    """Serialize a pair stream as channel 0 (signal) / channel 1 (idler).

    With detuning_sidecar, per-pair detunings (rad/ps, float64 LE, in
    t_signal order) are written next to the file as ``<name>.detuning``.
    """
    path = Path(path)
    streams = [
        TimeTagStream(
            SIGNAL_CHANNEL,
            pairs.t_signal,
            np.zeros(len(pairs), dtype=bool),
            pairs.duration,
        ),
        TimeTagStream(
            IDLER_CHANNEL,
            np.sort(pairs.t_idler),
            np.zeros(len(pairs), dtype=bool),
            pairs.duration,
        ),
    ]
    write_timetags(path, streams)
    if detuning_sidecar:
        _atomic_write(
            path.with_name(path.name + ".detuning"),
            pairs.detuning.astype("<f8").tobytes(),
        )


def write_csv(path: str | Path, header: list[str], columns: list[np.ndarray]) -> None:
    """CSV with one header row; '.' decimals, LF endings, %.10g floats."""
    path = Path(path)
    n = len(columns[0]) if columns else 0
    lines = [",".join(header)]
    for i in range(n):
        cells = []
        for col in columns:
            v = col[i]
            if isinstance(v, (np.integer, int)):
                cells.append(str(int(v)))
            else:
                cells.append(format(float(v), ".10g"))
        lines.append(",".join(cells))
    _atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))


def write_svg(
    path: str | Path,
    x: np.ndarray,
    y: np.ndarray,
    x_label: str = "",
    y_label: str = "",
    width: int = 640,
    height: int = 400,
) -> None:
    """Single-series line plot on linear axes; no styling contract."""
    path = Path(path)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    finite = np.isfinite(x) & np.isfinite(y)
    x, y = x[finite], y[finite]

    margin = 50.0
    pw, ph = width - 2 * margin, height - 2 * margin
    if len(x):
        x0, x1 = float(x.min()), float(x.max())
        y0, y1 = float(y.min()), float(y.max())
        xs = (x - x0) / (x1 - x0 or 1.0) * pw + margin
        ys = height - margin - (y - y0) / (y1 - y0 or 1.0) * ph
        pts = " ".join(f"{px:.6f},{py:.6f}" for px, py in zip(xs, ys))
    else:
        pts = ""

    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect x="{margin:.6f}" y="{margin:.6f}" width="{pw:.6f}" height="{ph:.6f}" '
        'fill="none" stroke="black"/>\n'
        f'<polyline points="{pts}" fill="none" stroke="blue" stroke-width="1"/>\n'
        f'<text x="{width / 2:.6f}" y="{height - 10:.6f}" text-anchor="middle">'
        f"{x_label}</text>\n"
        f'<text x="15" y="{height / 2:.6f}" text-anchor="middle" '
        f'transform="rotate(-90 15 {height / 2:.6f})">{y_label}</text>\n'
        "</svg>\n"
    )
    _atomic_write(path, svg.encode("utf-8"))
