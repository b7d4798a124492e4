"""CSV and manifest writing with all-or-nothing output directories."""

from __future__ import annotations

import contextlib
import csv
import hashlib
import io
import json
import math
import os
import shutil
import tempfile


def format_value(v) -> str:
    """Locale-independent text for a CSV cell ('.' decimal separator)."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(int(v))
    if isinstance(v, float):
        v = float(v)  # numpy 2 reprs np.float64 with its type name
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if hasattr(v, "item"):  # numpy scalar
        return format_value(v.item())
    return str(v)


def csv_bytes(header, rows, config_hash: str) -> bytes:
    """RFC-4180 CSV (CRLF line ends, minimal quoting) encoded as UTF-8.

    Every row ends with a ``config_hash`` column tying it to its config.
    """
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(list(header) + ["config_hash"])
    for row in rows:
        if isinstance(row, dict):
            row = [row.get(h) for h in header]
        if len(row) != len(header):
            raise ValueError("row length does not match the header")
        writer.writerow([format_value(v) for v in row] + [config_hash])
    return buf.getvalue().encode("utf-8")


def read_csv(path: str) -> tuple[list[str], list[dict]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        return list(reader.fieldnames or []), rows


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class OutputDir:
    """Collects files in a staging directory and moves them into place only
    when the run succeeds; on failure nothing is left behind."""

    def __init__(self, target: str):
        self.target = os.path.abspath(target)
        parent = os.path.dirname(self.target) or "."
        os.makedirs(parent, exist_ok=True)
        self.stage = tempfile.mkdtemp(prefix=".sepsim-", dir=parent)
        self.files: list[str] = []

    def path(self, name: str) -> str:
        return os.path.join(self.stage, name)

    def write_bytes(self, name: str, data: bytes) -> str:
        with open(self.path(name), "wb") as fh:
            fh.write(data)
        if name not in self.files:
            self.files.append(name)
        return os.path.join(self.target, name)

    def write_csv(self, name: str, header, rows, config_hash: str) -> str:
        return self.write_bytes(name, csv_bytes(header, rows, config_hash))

    def write_text(self, name: str, text: str) -> str:
        return self.write_bytes(name, text.encode("utf-8"))

    def write_json(self, name: str, obj) -> str:
        text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"
        return self.write_text(name, text)

    def digests(self) -> dict:
        return {name: sha256_file(self.path(name)) for name in sorted(self.files)}

    def commit(self) -> None:
        os.makedirs(self.target, exist_ok=True)
        for name in self.files:
            os.replace(self.path(name), os.path.join(self.target, name))
        shutil.rmtree(self.stage, ignore_errors=True)

    def abort(self) -> None:
        shutil.rmtree(self.stage, ignore_errors=True)


def _json_default(o):
    if hasattr(o, "item"):
        return o.item()
    if hasattr(o, "tolist"):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


@contextlib.contextmanager
def staged_output(target: str):
    out = OutputDir(target)
    try:
        yield out
    except BaseException:
        out.abort()
        raise
    else:
        out.commit()
