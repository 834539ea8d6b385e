"""Matrix file ingestion and binary sketch persistence.

Sketch files start with the 8-byte magic ``b"CSKETCH\\0"`` and a little-endian
u32 version, followed by a one-byte record type and the record payload.
All integers are little-endian; reals are IEEE-754 doubles (``+inf`` allowed
for tau).

Sample record::

    kind u8 (0 priority, 1 threshold) | weight_mode u8 (0 squared norm, 1 leverage)
    k u64 | seed u64 | n_rows u64 | n_cols u64 | tau f64 | count u64
    count x (index u64 | nnz u32 | nnz x (col u32 | value f64))

Linear record::

    kind u8 (0 gaussian, 1 sign, 2 countsketch) | k u64 | seed u64
    n_rows u64 | n_cols u64 | k*n_cols x f64 (row-major)

Regression record::

    sample record | count x f64 leverage scores | gram_mode u8 (0 exact, 1 single)
    exact:  d u64 | d*d x f64
    single: z u64 | d u64 | z*d x f64 rows | z x f64 scales
"""
import csv
import io
import struct

import numpy as np

from .errors import MatrixParseError, SketchFormatError
from .linear import COUNTSKETCH, GAUSSIAN, SIGN, LinearSketch
from .matrix import SparseMatrix
from .regression import ExactGram, RegressionSketch, SampledGram
from .sampling import LEVERAGE, PRIORITY, SQUARED_NORM, THRESHOLD, SampleSketch

__all__ = [
    "MAGIC",
    "VERSION",
    "load_matrix",
    "save_matrix",
    "read_dense_csv",
    "write_dense_csv",
    "dumps_sketch",
    "loads_sketch",
    "save_sketch",
    "load_sketch",
]

MAGIC = b"CSKETCH\0"
VERSION = 1

_REC_SAMPLE, _REC_LINEAR, _REC_REGRESSION = 1, 2, 3
_SAMPLE_KINDS = (PRIORITY, THRESHOLD)
_WEIGHT_MODES = (SQUARED_NORM, LEVERAGE)
_LINEAR_KINDS = (GAUSSIAN, SIGN, COUNTSKETCH)


# -- matrices ---------------------------------------------------------------


def _infer_format(path, fmt):
    if fmt is not None:
        fmt = fmt.lower()
        if fmt in ("mm", "mtx", "matrixmarket"):
            return "mm"
        if fmt in ("csv", "densecsv"):
            return "csv"
        raise ValueError(f"unknown matrix format {fmt!r}")
    return "mm" if str(path).lower().endswith(".mtx") else "csv"


def load_matrix(path, fmt=None):
    """Read a Matrix Market coordinate/array file or a dense CSV file.

    The format is inferred from the extension (``.mtx`` is Matrix Market,
    anything else CSV) unless ``fmt`` is given.
    """
    fmt = _infer_format(path, fmt)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if fmt == "mm":
        return parse_matrix_market(text, path=str(path))
    return parse_dense_csv(text, path=str(path))


def _parse_float(token, lineno, path):
    try:
        return float(token)
    except ValueError:
        raise MatrixParseError(f"invalid number {token!r}", lineno, path) from None


def _parse_int(token, lineno, path):
    try:
        return int(token)
    except ValueError:
        raise MatrixParseError(f"invalid integer {token!r}", lineno, path) from None


def parse_matrix_market(text, path=None):
    lines = text.splitlines()
    if not lines:
        raise MatrixParseError("empty file", 1, path)
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket" or header[1].lower() != "matrix":
        raise MatrixParseError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'", 1, path)
    layout, field, symmetry = (h.lower() for h in header[2:])
    if layout not in ("coordinate", "array"):
        raise MatrixParseError(f"unsupported layout {layout!r}", 1, path)
    if field not in ("real", "integer", "double", "pattern"):
        raise MatrixParseError(f"unsupported field {field!r}", 1, path)
    if symmetry not in ("general", "symmetric", "skew-symmetric"):
        raise MatrixParseError(f"unsupported symmetry {symmetry!r}", 1, path)
    if layout == "array" and field == "pattern":
        raise MatrixParseError("pattern field requires coordinate layout", 1, path)

    body = ((no, ln.strip()) for no, ln in enumerate(lines[1:], start=2))
    body = [(no, ln) for no, ln in body if ln and not ln.startswith("%")]
    if not body:
        raise MatrixParseError("missing size line", len(lines), path)
    size_no, size_line = body[0]
    size = size_line.split()
    expected = 3 if layout == "coordinate" else 2
    if len(size) != expected:
        raise MatrixParseError(f"size line must have {expected} integers", size_no, path)
    dims = [_parse_int(t, size_no, path) for t in size]
    n_rows, n_cols = dims[0], dims[1]
    if n_rows < 1 or n_cols < 1:
        raise MatrixParseError("matrix dimensions must be positive", size_no, path)
    entries = body[1:]

    rows, cols, vals = [], [], []
    if layout == "coordinate":
        nnz = dims[2]
        if len(entries) != nnz:
            lineno = entries[-1][0] if entries else size_no
            raise MatrixParseError(f"expected {nnz} entries, found {len(entries)}", lineno, path)
        want = 2 if field == "pattern" else 3
        for lineno, ln in entries:
            tok = ln.split()
            if len(tok) != want:
                raise MatrixParseError(f"expected {want} fields, got {len(tok)}", lineno, path)
            i = _parse_int(tok[0], lineno, path)
            j = _parse_int(tok[1], lineno, path)
            if not (1 <= i <= n_rows and 1 <= j <= n_cols):
                raise MatrixParseError(
                    f"entry ({i}, {j}) outside declared {n_rows} x {n_cols}", lineno, path
                )
            v = 1.0 if field == "pattern" else _parse_float(tok[2], lineno, path)
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(v)
    else:
        if symmetry != "general":
            raise MatrixParseError("array layout supports only general symmetry", 1, path)
        if len(entries) != n_rows * n_cols:
            lineno = entries[-1][0] if entries else size_no
            raise MatrixParseError(
                f"expected {n_rows * n_cols} values, found {len(entries)}", lineno, path
            )
        for t, (lineno, ln) in enumerate(entries):
            tok = ln.split()
            if len(tok) != 1:
                raise MatrixParseError("expected one value per line", lineno, path)
            # array layout is column-major
            rows.append(t % n_rows)
            cols.append(t // n_rows)
            vals.append(_parse_float(tok[0], lineno, path))

    if symmetry != "general":
        sign = -1.0 if symmetry == "skew-symmetric" else 1.0
        extra = [(c, r, sign * v) for r, c, v in zip(rows, cols, vals) if r != c]
        for r, c, v in extra:
            rows.append(r)
            cols.append(c)
            vals.append(v)
    return SparseMatrix.from_coo(n_rows, n_cols, rows, cols, vals)


def parse_dense_csv(text, path=None):
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        tokens = line.split(",")
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise MatrixParseError(f"expected {width} columns, got {len(tokens)}", lineno, path)
        rows.append([_parse_float(t.strip(), lineno, path) for t in tokens])
    if not rows:
        raise MatrixParseError("no data rows", 1, path)
    return SparseMatrix.from_dense(np.array(rows, dtype=np.float64))


def save_matrix(A, path, fmt=None):
    """Write ``A`` as Matrix Market coordinate (``.mtx``) or dense CSV.

    Values are written with shortest round-trip formatting, so reading the
    file back reproduces ``A`` exactly.
    """
    fmt = _infer_format(path, fmt)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if fmt == "mm":
            fh.write("%%MatrixMarket matrix coordinate real general\n")
            fh.write(f"{A.n_rows} {A.n_cols} {A.nnz}\n")
            row_of = np.repeat(np.arange(A.n_rows), A.row_nnz())
            for r, c, v in zip(row_of, A.indices, A.data):
                fh.write(f"{r + 1} {c + 1} {float(v)!r}\n")
        else:
            write_dense_csv(A.to_dense(), fh)


def write_dense_csv(W, dest):
    """Dense array as CSV, one matrix row per line (1-D input is a column)."""
    W = np.asarray(W, dtype=np.float64)
    if W.ndim == 1:
        W = W[:, None]
    text = "".join(",".join(repr(float(v)) for v in row) + "\n" for row in W)
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def read_dense_csv(path):
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [[float(t) for t in row] for row in reader if row]
    return np.array(rows, dtype=np.float64)


# -- sketches ---------------------------------------------------------------


def _pack_sample(buf, S):
    buf.write(struct.pack(
        "<BBQQQQdQ",
        _SAMPLE_KINDS.index(S.kind), _WEIGHT_MODES.index(S.weight_mode),
        S.k, S.seed, S.n_rows, S.n_cols, S.tau, S.size,
    ))
    rows = S.rows
    for t, idx in enumerate(S.indices):
        lo, hi = rows.indptr[t], rows.indptr[t + 1]
        buf.write(struct.pack("<QI", int(idx), int(hi - lo)))
        pairs = np.empty(hi - lo, dtype=[("c", "<u4"), ("v", "<f8")])
        pairs["c"] = rows.indices[lo:hi]
        pairs["v"] = rows.data[lo:hi]
        buf.write(pairs.tobytes())


def _pack_array(buf, a):
    buf.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def dumps_sketch(sketch):
    """Serialize a Sample, Linear or Regression sketch to bytes."""
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", VERSION))
    if isinstance(sketch, SampleSketch):
        buf.write(struct.pack("<B", _REC_SAMPLE))
        _pack_sample(buf, sketch)
    elif isinstance(sketch, LinearSketch):
        buf.write(struct.pack("<B", _REC_LINEAR))
        buf.write(struct.pack(
            "<BQQQQ", _LINEAR_KINDS.index(sketch.kind), sketch.k, sketch.seed,
            sketch.n_rows, sketch.n_cols,
        ))
        _pack_array(buf, sketch.data)
    elif isinstance(sketch, RegressionSketch):
        buf.write(struct.pack("<B", _REC_REGRESSION))
        _pack_sample(buf, sketch.sample)
        _pack_array(buf, sketch.sampled_scores)
        if isinstance(sketch.gram, ExactGram):
            G = sketch.gram.matrix
            buf.write(struct.pack("<BQ", 0, G.shape[0]))
            _pack_array(buf, G)
        else:
            rows = sketch.gram.rows
            buf.write(struct.pack("<BQQ", 1, rows.shape[0], rows.shape[1]))
            _pack_array(buf, rows)
            _pack_array(buf, sketch.gram.scale)
    else:
        raise TypeError(f"cannot serialize {type(sketch).__name__}")
    return buf.getvalue()


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def unpack(self, fmt):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise SketchFormatError("truncated sketch file")
        out = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return out

    def array(self, dtype, count):
        dtype = np.dtype(dtype)
        size = dtype.itemsize * count
        if self.pos + size > len(self.data):
            raise SketchFormatError("truncated sketch file")
        out = np.frombuffer(self.data, dtype=dtype, count=count, offset=self.pos).copy()
        self.pos += size
        return out


def _choice(options, code, what):
    if code >= len(options):
        raise SketchFormatError(f"unknown {what} code {code}")
    return options[code]


def _unpack_sample(r):
    kind, mode, k, seed, n_rows, n_cols, tau, count = r.unpack("<BBQQQQdQ")
    kind = _choice(_SAMPLE_KINDS, kind, "sketch kind")
    mode = _choice(_WEIGHT_MODES, mode, "weight mode")
    indices = np.empty(count, dtype=np.int64)
    indptr = np.zeros(count + 1, dtype=np.int64)
    cols, vals = [], []
    for t in range(count):
        idx, nnz = r.unpack("<QI")
        indices[t] = idx
        pairs = r.array([("c", "<u4"), ("v", "<f8")], nnz)
        cols.append(pairs["c"].astype(np.int64))
        vals.append(pairs["v"].astype(np.float64))
        indptr[t + 1] = indptr[t] + nnz
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    vals = np.concatenate(vals) if vals else np.zeros(0)
    try:
        rows = SparseMatrix(count, n_cols, indptr, cols, vals)
        return SampleSketch(kind, k, seed, indices, rows, tau, mode, n_rows)
    except ValueError as exc:
        raise SketchFormatError(f"invalid sample record: {exc}") from exc


def loads_sketch(data):
    """Inverse of :func:`dumps_sketch`."""
    r = _Reader(bytes(data))
    if r.unpack("8s")[0] != MAGIC:
        raise SketchFormatError("not a sketch file (bad magic)")
    (version,) = r.unpack("<I")
    if version != VERSION:
        raise SketchFormatError(f"unsupported sketch file version {version}")
    (rec,) = r.unpack("<B")
    if rec == _REC_SAMPLE:
        out = _unpack_sample(r)
    elif rec == _REC_LINEAR:
        kind, k, seed, n_rows, n_cols = r.unpack("<BQQQQ")
        kind = _choice(_LINEAR_KINDS, kind, "linear kind")
        data_ = r.array("<f8", k * n_cols).reshape(k, n_cols)
        out = LinearSketch(kind, k, seed, data_, n_rows)
    elif rec == _REC_REGRESSION:
        sample = _unpack_sample(r)
        scores = r.array("<f8", sample.size)
        (mode,) = r.unpack("<B")
        if mode == 0:
            (d,) = r.unpack("<Q")
            gram = ExactGram(r.array("<f8", d * d).reshape(d, d))
        elif mode == 1:
            z, d = r.unpack("<QQ")
            rows = r.array("<f8", z * d).reshape(z, d)
            gram = SampledGram(rows, r.array("<f8", z))
        else:
            raise SketchFormatError(f"unknown gram mode {mode}")
        out = RegressionSketch(sample, scores, gram)
    else:
        raise SketchFormatError(f"unknown record type {rec}")
    if r.pos != len(r.data):
        raise SketchFormatError("trailing bytes after sketch record")
    return out


def save_sketch(sketch, path):
    with open(path, "wb") as fh:
        fh.write(dumps_sketch(sketch))


def load_sketch(path):
    with open(path, "rb") as fh:
        return loads_sketch(fh.read())
