"""Bundled datasets and CSV ingestion.

Two datasets ship with the package:

``ozone``
    108 ozone level excesses over 100 ug/m^3 recorded at a Delhi monitoring
    station between June 2015 and November 2017.
``bilbao``
    179 zero-crossing hourly mean wave periods (seconds) above 7 s from the
    Bilbao buoy. Analyses typically use the exceedances over 7.5 s (154 values).

Both files are pinned by SHA-256 digest and verified on load.
"""

import csv
import hashlib
import io
from dataclasses import dataclass
from importlib import resources

import numpy as np

from ._validation import check_sample
from .estimate import CensoredSample
from .exceptions import DataError

BUNDLED = {
    "ozone": ("ozone.csv", "8d6ef2fed117fe42f1ead63199fd4453998e293c0bd1df423e4edd631a4ba926",
              "Delhi ozone level excesses over 100 ug/m^3, Jun 2015 - Nov 2017"),
    "bilbao": ("bilbao.csv", "ee59c9031fbb578ad1a889b9554184bb5ac16b120d200fa4552630c94ab51732",
               "Bilbao buoy zero-crossing mean wave periods above 7 s"),
}

CENSORED_HEADER = ("time", "delta")


@dataclass(frozen=True)
class Dataset:
    """Parsed data with its provenance.

    ``values`` holds the complete sample; ``censored`` is set instead for
    two-column ``time,delta`` files.
    """

    name: str
    values: np.ndarray | None
    censored: CensoredSample | None
    digest: str
    provenance: str
    threshold: float | None = None

    @property
    def n(self):
        return len(self.censored) if self.censored is not None else self.values.shape[0]

    @property
    def is_censored(self):
        return self.censored is not None

    def exceedances(self, threshold):
        """Values ``x - threshold`` for ``x >= threshold`` (complete data only)."""
        if self.is_censored:
            raise DataError("thresholding is only supported for complete samples")
        kept = self.values[self.values >= threshold]
        if kept.shape[0] == 0:
            raise DataError(f"no observations at or above threshold {threshold:g}")
        exc = kept - threshold
        if np.any(exc <= 0):
            raise DataError(f"observations equal to the threshold {threshold:g} give "
                            "zero exceedances")
        return Dataset(self.name, exc, None, self.digest,
                       f"{self.provenance}; exceedances over {threshold:g}", threshold)


def _digest(raw):
    return hashlib.sha256(raw).hexdigest()


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def parse_csv(text, name="<input>", digest=None):
    """Parse a one-column sample or a two-column ``time,delta`` file.

    A header row is detected when its first field is not numeric. Two-column
    files must carry the header ``time,delta``. Every malformed row raises
    `DataError` naming its line number; nothing is coerced or dropped.
    """
    if digest is None:
        digest = _digest(text.encode())
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        fields = [f.strip() for f in row]
        if not fields or all(f == "" for f in fields):
            continue
        rows.append((lineno, fields))
    if not rows:
        raise DataError(f"{name}: no data")
    header = None
    if not _is_number(rows[0][1][0]):
        header = tuple(f.lower() for f in rows[0][1])
        rows = rows[1:]
    if not rows:
        raise DataError(f"{name}: header but no data rows")
    width = len(header) if header is not None else len(rows[0][1])
    if width == 2 and header != CENSORED_HEADER:
        raise DataError(f"{name}: two-column files need the header 'time,delta'")
    if width not in (1, 2):
        raise DataError(f"{name}: expected 1 or 2 columns, got {width}")
    out = np.empty((len(rows), width))
    for i, (lineno, fields) in enumerate(rows):
        if len(fields) != width:
            raise DataError(f"{name}: line {lineno}: expected {width} field(s), "
                            f"got {len(fields)}")
        for j, f in enumerate(fields):
            try:
                out[i, j] = float(f)
            except ValueError:
                raise DataError(f"{name}: line {lineno}: not a number: {f!r}") from None
            if not np.isfinite(out[i, j]):
                raise DataError(f"{name}: line {lineno}: non-finite value {f!r}")
        if out[i, 0] <= 0:
            raise DataError(f"{name}: line {lineno}: value must be positive, got {fields[0]}")
        if width == 2 and out[i, 1] not in (0.0, 1.0):
            raise DataError(f"{name}: line {lineno}: delta must be 0 or 1, got {fields[1]}")
    if width == 1:
        return Dataset(name, check_sample(out[:, 0], min_size=1, name=name), None, digest,
                       f"file {name}")
    cs = CensoredSample(out[:, 0], out[:, 1].astype(np.int8))
    return Dataset(name, None, cs, digest, f"file {name}")


def load_bundled(name):
    """Load a bundled dataset, verifying its pinned digest."""
    try:
        filename, pinned, provenance = BUNDLED[name]
    except KeyError:
        raise DataError(f"unknown bundled dataset {name!r}; choose from "
                        f"{sorted(BUNDLED)}") from None
    raw = resources.files("gpdgof").joinpath("data", filename).read_bytes()
    digest = _digest(raw)
    if digest != pinned:
        raise DataError(f"bundled dataset {name!r} failed its integrity check")
    ds = parse_csv(raw.decode(), name=name, digest=digest)
    return Dataset(name, ds.values, None, digest, provenance)


def load(source):
    """Load a bundled dataset by name or a CSV file by path."""
    if source in BUNDLED:
        return load_bundled(source)
    try:
        with open(source, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {source}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError:
        raise DataError(f"{source}: not valid UTF-8 text") from None
    return parse_csv(text, name=str(source), digest=_digest(raw))


def load_ozone():
    return load_bundled("ozone").values


def load_bilbao(threshold=None):
    """Bilbao wave periods; exceedances over ``threshold`` when given."""
    ds = load_bundled("bilbao")
    return ds.values if threshold is None else ds.exceedances(threshold).values
