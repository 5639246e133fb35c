"""Run-record persistence: canonical JSON, atomic writes, stable CSV.

Records are plain JSON with sorted keys and no whitespace so that a rerun
with the same configuration reproduces the file byte for byte.  Floats go
through Python's shortest round-trip repr (up to 17 significant digits),
which json preserves losslessly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile

from .errors import ValidationError

VERSION = "0.1.0"

__all__ = ["VERSION", "canonical_json", "write_json_atomic", "read_json",
           "write_csv_atomic", "payload_sha256", "check_versions"]


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      allow_nan=False) + "\n"


def _atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".",
                               prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(path, obj) -> None:
    _atomic_write(path, canonical_json(obj))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_csv_atomic(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    _atomic_write(path, buf.getvalue())


def payload_sha256(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def check_versions(records, force: bool = False) -> None:
    versions = {r.get("version") for r in records}
    if len(versions) > 1 and not force:
        raise ValidationError(
            f"records from mixed artifact versions {sorted(versions)}; "
            f"pass --force to analyze anyway")
