"""Table caching, run manifests and the artifact header convention.

Every artifact starts with a ``# heightlab/1 ...`` line.  Tables carry a
sha256 checksum of their body so truncation or editing is detected on load.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from fractions import Fraction
from pathlib import Path

from .enumeration import TabulatedSurfaceTension
from .errors import CorruptTable
from .lattice import fraction_str

FORMAT_VERSION = "heightlab/1"


def sha256_hex(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode()
    return hashlib.sha256(data).hexdigest()


def config_hash(config: dict) -> str:
    return sha256_hex(json.dumps(config, sort_keys=True, default=str))


def _float_str(x: float) -> str:
    return repr(float(x))


def table_body(model: TabulatedSurfaceTension) -> str:
    """CSV rows ``m,s1..sm,n,ent_n`` for every measurement followed by one
    ``m,s1..sm,inf,ent_extrapolated`` row per grid slope."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m"] + [f"s{i + 1}" for i in range(model.m)] + ["n", "ent"])
    slopes = sorted(model.values)
    for s in slopes:
        for n in model.n_list:
            if (s, n) in model.raw:
                w.writerow([model.m] + [fraction_str(v) for v in s] + [n, _float_str(model.raw[(s, n)])])
    for s in slopes:
        w.writerow([model.m] + [fraction_str(v) for v in s] + ["inf", _float_str(model.values[s])])
    return buf.getvalue()


def cache_table(model: TabulatedSurfaceTension, path) -> Path:
    body = table_body(model)
    meta = {"m": model.m, "axis": [fraction_str(a) for a in model.axis], "n": list(model.n_list),
            "extrapolation": model.extrapolation, "kind": model.kind}
    header = (f"# {FORMAT_VERSION} surface-tension sha256={sha256_hex(body)}\n"
              f"# meta {json.dumps(meta, sort_keys=True)}\n")
    path = Path(path)
    path.write_text(header + body)
    return path


def load_table(path) -> TabulatedSurfaceTension:
    text = Path(path).read_text()
    lines = text.split("\n", 2)
    if len(lines) < 3 or not lines[0].startswith("# "):
        raise CorruptTable("missing header")
    head = lines[0][2:].split()
    if head[0] != FORMAT_VERSION:
        raise CorruptTable(f"format version {head[0]!r}, expected {FORMAT_VERSION!r}")
    if len(head) < 3 or head[1] != "surface-tension" or not head[2].startswith("sha256="):
        raise CorruptTable("malformed header")
    body = lines[2]
    if sha256_hex(body) != head[2][len("sha256="):]:
        raise CorruptTable("checksum mismatch (truncated or modified file)")
    if not lines[1].startswith("# meta "):
        raise CorruptTable("missing metadata line")
    meta = json.loads(lines[1][len("# meta "):])
    m = int(meta["m"])
    rows = list(csv.reader(io.StringIO(body)))[1:]
    raw, values = {}, {}
    for r in rows:
        if not r:
            continue
        s = tuple(Fraction(v) for v in r[1:1 + m])
        if r[1 + m] == "inf":
            values[s] = float(r[2 + m])
        else:
            raw[(s, int(r[1 + m]))] = float(r[2 + m])
    return TabulatedSurfaceTension(m, tuple(Fraction(a) for a in meta["axis"]), tuple(meta["n"]), values, raw,
                                   meta["extrapolation"], meta["kind"])


def write_manifest(path, subcommand: str, config: dict, inputs=(), outputs=(), seed=None) -> Path:
    """Record a run: resolved configuration and sha256 of every input and output file."""
    from . import __version__

    def digest(p):
        p = Path(p)
        return {"path": str(p), "sha256": sha256_hex(p.read_bytes())} if p.exists() else {"path": str(p)}

    manifest = {"schema": FORMAT_VERSION, "version": __version__, "subcommand": subcommand,
                "config": config, "config_sha256": config_hash(config), "seed": seed,
                "inputs": [digest(p) for p in inputs], "outputs": [digest(p) for p in outputs]}
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return path
