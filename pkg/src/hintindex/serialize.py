"""Binary snapshots of built indexes.

Layout (all integers little-endian)::

    magic      6 bytes  b"HINTM1"
    version    u16
    meta_len   u32
    meta       meta_len bytes of UTF-8 JSON (sorted keys)
    n_arrays   u32
    per array, in name order:
        name_len u16, name (ASCII)
        dtype    u8   (0 = int64, 1 = uint64, 2 = bool)
        ndim     u8, then ndim x u64 shape
        data     prod(shape) * itemsize bytes, C order

The same index always serialises to the same bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .baselines import BruteForce, Grid1D
from .core import IntervalArray
from .hint import HintIndex
from .hintm import HintMIndex
from .updates import HybridIndex, UpdatableHintMIndex

MAGIC = b"HINTM1"
VERSION = 1
_DTYPES = [np.dtype("<i8"), np.dtype("<u8"), np.dtype("bool")]


class FormatError(ValueError):
    pass


def _pack(meta: dict, arrays: dict) -> bytes:
    blob = json.dumps(meta, sort_keys=True).encode()
    parts = [MAGIC, struct.pack("<HI", VERSION, len(blob)), blob, struct.pack("<I", len(arrays))]
    for name in sorted(arrays):
        a = np.asarray(arrays[name])
        code = next((i for i, d in enumerate(_DTYPES) if a.dtype.kind == d.kind), None)
        if code is None:
            raise TypeError(f"array {name!r} has unsupported dtype {a.dtype}")
        a = np.ascontiguousarray(a, dtype=_DTYPES[code])
        raw = name.encode("ascii")
        parts.append(struct.pack("<H", len(raw)) + raw)
        parts.append(struct.pack("<BB", code, a.ndim) + struct.pack(f"<{a.ndim}Q", *a.shape))
        parts.append(a.tobytes())
    return b"".join(parts)


def _unpack(data: bytes) -> tuple[dict, dict]:
    if data[:6] != MAGIC:
        raise FormatError("not an index snapshot (bad magic)")
    pos = 6
    version, meta_len = struct.unpack_from("<HI", data, pos)
    if version != VERSION:
        raise FormatError(f"unsupported snapshot version {version}")
    pos += 6
    meta = json.loads(data[pos:pos + meta_len].decode())
    pos += meta_len
    (count,) = struct.unpack_from("<I", data, pos)
    pos += 4
    arrays = {}
    try:
        for _ in range(count):
            (nl,) = struct.unpack_from("<H", data, pos)
            pos += 2
            name = data[pos:pos + nl].decode("ascii")
            pos += nl
            code, ndim = struct.unpack_from("<BB", data, pos)
            pos += 2
            shape = struct.unpack_from(f"<{ndim}Q", data, pos)
            pos += 8 * ndim
            dt = _DTYPES[code]
            size = int(np.prod(shape, dtype=np.int64)) * dt.itemsize
            if pos + size > len(data):
                raise FormatError("snapshot truncated")
            arrays[name] = np.frombuffer(data, dtype=dt, count=size // dt.itemsize,
                                         offset=pos).reshape(shape).astype(dt.newbyteorder("="))
            pos += size
    except (struct.error, IndexError) as exc:
        raise FormatError(f"corrupt snapshot: {exc}") from None
    if pos != len(data):
        raise FormatError("trailing bytes after last array")
    return meta, arrays


def _delta_arrays(delta: UpdatableHintMIndex) -> dict:
    ids = np.array(list(delta._records), dtype=np.int64)
    ext = np.array(list(delta._records.values()), dtype=np.int64).reshape(-1, 2)
    return {"delta_ids": ids, "delta_st": ext[:, 0], "delta_end": ext[:, 1],
            "delta_dead": np.array(sorted(delta._dead), dtype=np.int64)}


def dumps(index) -> bytes:
    """Serialise any index kind of this package."""
    if isinstance(index, HintIndex):
        meta = {"kind": "hint", "m": index.m, "sparse": index.sparse, "n": index.n}
        arrays = dict(index.arrays(), dead=index._dead)
    elif isinstance(index, HintMIndex):
        meta = {"kind": "hintm", **index.meta()}
        arrays = index.arrays()
    elif isinstance(index, HybridIndex):
        meta = {"kind": "hybrid", **index.main.meta(), "merge_threshold": index.merge_threshold,
                "flushes": index.flushes}
        arrays = {**index.main.arrays(), **_delta_arrays(index.delta)}
    elif isinstance(index, Grid1D):
        meta = {"kind": "grid", "p": index.p, "min_x": index.min_x, "max_x": index.max_x, "n": index.n}
        arrays = index.arrays()
    elif isinstance(index, BruteForce):
        meta = {"kind": "brute"}
        arrays = {"ids": index.data.ids, "st": index.data.st, "end": index.data.end}
    else:
        raise TypeError(f"cannot serialise {type(index).__name__}")
    return _pack(meta, arrays)


def loads(data: bytes):
    meta, a = _unpack(data)
    kind = meta.get("kind")
    if kind == "hint":
        idx = HintIndex(meta["m"], a["lvl_ptr"], a["dir_off"], a["dir_pos"], a["o_ids"], a["r_ids"],
                        sparse=meta["sparse"], n=meta["n"])
        idx._dead = a["dead"]
        return idx
    if kind == "hintm":
        return HintMIndex.from_arrays(meta, a)
    if kind == "hybrid":
        main = HintMIndex.from_arrays(meta, a)
        idx = HybridIndex(main, meta["merge_threshold"])
        idx.flushes = meta["flushes"]
        delta = idx.delta
        for s in IntervalArray(a["delta_ids"], a["delta_st"], a["delta_end"], validate=False):
            delta.insert(s)
        for rid in a["delta_dead"].tolist():
            delta.delete(rid)
        return idx
    if kind == "grid":
        return Grid1D(meta["p"], meta["min_x"], meta["max_x"], a["cell_ptr"], a["ids"], a["st"],
                      a["end"], meta["n"])
    if kind == "brute":
        return BruteForce(IntervalArray(a["ids"], a["st"], a["end"], validate=False))
    raise FormatError(f"unknown index kind {kind!r}")


def save_index(index, path) -> int:
    data = dumps(index)
    Path(path).write_bytes(data)
    return len(data)


def load_index(path):
    return loads(Path(path).read_bytes())
