"""
JSON instances and reports, CSV export, seeded instance generation
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Complex matrices are written as nested rows of ``[re, im]`` pairs. On
input a block may also be a flat list of ``m*m`` pairs in row-major order.
JSON is emitted with sorted keys and a fixed indent, and floats use their
shortest round-trip representation, so write -> read -> write is
byte-identical.
"""
import csv
import io as _io
import json

import numpy as np

from .algebra import Op, Subspace, TracialAlgebra
from .exceptions import DomainError, ShapeError

__all__ = ["InstanceError", "encode_matrix", "decode_matrix", "encode_op", "decode_op",
           "instance_to_dict", "parse_instance", "load_instance", "dumps", "write_json",
           "certificate_rows", "write_csv", "gen_instance", "ENSEMBLES"]

ENSEMBLES = ("gaussian-dense", "corner", "commutative")


class InstanceError(ValueError):
    """Malformed or inconsistent instance file."""


def encode_matrix(M):
    M = np.asarray(M, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _pair(z):
    if isinstance(z, (int, float)) and not isinstance(z, bool):
        return complex(z)
    if isinstance(z, (list, tuple)) and len(z) == 2 and all(
            isinstance(t, (int, float)) and not isinstance(t, bool) for t in z):
        return complex(z[0], z[1])
    raise InstanceError(f"complex entries must be [re, im] pairs, got {z!r}")


def decode_matrix(data, m):
    """Square ``m x m`` matrix from nested rows or a flat row-major list of pairs."""
    if not isinstance(data, list):
        raise InstanceError("matrix must be a list")
    if len(data) == m and all(isinstance(r, list) and len(r) == m and
                              all(isinstance(z, list) for z in r) for r in data):
        vals = [_pair(z) for r in data for z in r]
    elif len(data) == m * m:
        vals = [_pair(z) for z in data]
    else:
        raise InstanceError(f"expected a {m}x{m} matrix")
    M = np.array(vals, dtype=np.complex128).reshape(m, m)
    if not np.all(np.isfinite(M)):
        raise InstanceError("matrix entries must be finite")
    return M


def encode_op(x):
    return [encode_matrix(b) for b in x.blocks]


def decode_op(alg, data):
    if not isinstance(data, list) or len(data) != alg.n_blocks:
        raise InstanceError(f"operator must be a list of {alg.n_blocks} blocks")
    return alg.op([decode_matrix(b, m) for b, m in zip(data, alg.block_dims)])


def instance_to_dict(E, **extra):
    out = {"algebra": {"block_dims": list(E.algebra.block_dims),
                       "trace_weights": list(E.algebra.trace_weights)},
           "basis": [encode_op(x) for x in E.basis]}
    out.update({k: v for k, v in extra.items() if v is not None})
    return out


def parse_instance(obj):
    """Build ``(Subspace, extras)`` from a decoded instance object.

    ``extras`` holds every other top-level field (``p``, ``seed``,
    ``labels``, ...), so that write-read-write round trips are exact.
    """
    if not isinstance(obj, dict) or "algebra" not in obj or "basis" not in obj:
        raise InstanceError("instance needs 'algebra' and 'basis' fields")
    a = obj["algebra"]
    if not isinstance(a, dict) or "block_dims" not in a:
        raise InstanceError("algebra needs 'block_dims'")
    try:
        alg = TracialAlgebra(tuple(a["block_dims"]), a.get("trace_weights"))
        basis = obj["basis"]
        if not isinstance(basis, list) or not basis:
            raise InstanceError("basis must be a nonempty list")
        E = Subspace(alg, [decode_op(alg, x) for x in basis])
    except (TypeError, DomainError, ShapeError) as exc:
        raise InstanceError(str(exc)) from exc
    extras = {k: v for k, v in obj.items() if k not in ("algebra", "basis")}
    return E, extras


def load_instance(path):
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceError(f"cannot read instance {path}: {exc}") from exc
    return parse_instance(obj)


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Op):
        return encode_op(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _finite(o):
    if isinstance(o, float) and not np.isfinite(o):
        return None if np.isnan(o) else ("inf" if o > 0 else "-inf")
    if isinstance(o, dict):
        return {k: _finite(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_finite(v) for v in o]
    return o


def dumps(obj):
    """Canonical JSON text (sorted keys, 2-space indent, trailing newline)."""
    plain = json.loads(json.dumps(obj, default=_default))
    return json.dumps(_finite(plain), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


CSV_FIELDS = ("instance", "kind", "quantity", "level", "measured", "bound", "margin", "hard")


def certificate_rows(instance, cert):
    return [{"instance": instance, "kind": cert.kind, "quantity": e.quantity, "level": e.level,
             "measured": repr(float(e.measured)), "bound": repr(float(e.bound)),
             "margin": repr(float(e.margin)), "hard": int(e.hard)} for e in cert.entries]


def write_csv(path, rows):
    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def _gaussian(rng, m):
    return rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))


def gen_instance(block_dims, n, seed, ensemble="gaussian-dense", trace_weights=None):
    """Seeded random instance.

    Parameters
    ----------
    block_dims : sequence of int
    n : int
        Subspace dimension.
    ensemble : {"gaussian-dense", "corner", "commutative"}
        ``corner`` compresses Gaussian operators to ``e M e`` for a proper
        diagonal projection ``e`` (rank ``ceil(m/2)`` per block; with only
        1x1 blocks the last block is dropped), so the square function is
        singular. ``commutative`` replaces the blocks by ``sum(block_dims)``
        blocks of size 1.

    Returns
    -------
    dict
        Instance object as accepted by :func:`parse_instance`.
    """
    if ensemble not in ENSEMBLES:
        raise InstanceError(f"unknown ensemble {ensemble!r}; choose from {ENSEMBLES}")
    dims = tuple(int(m) for m in block_dims)
    if not dims or min(dims) < 1:
        raise InstanceError("block dimensions must be positive")
    if ensemble == "commutative":
        dims = (1,) * sum(dims)
        trace_weights = None if trace_weights is None else list(trace_weights)
    if trace_weights is not None and len(trace_weights) != len(dims):
        raise InstanceError("trace weights do not match the blocks")
    alg = TracialAlgebra(dims, trace_weights)
    ranks = list(dims)
    if ensemble == "corner":
        ranks = [(m + 1) // 2 for m in dims]
        if ranks == list(dims):
            ranks[-1] = 0
    capacity = sum(r * r for r in ranks)
    if not 1 <= int(n) <= capacity:
        raise InstanceError(f"n={n} must lie in [1, {capacity}] for this algebra and ensemble")
    rng = np.random.default_rng(seed)
    for _ in range(100):
        basis = []
        for _ in range(int(n)):
            blocks = []
            for m, r in zip(dims, ranks):
                b = np.zeros((m, m), dtype=np.complex128)
                b[:r, :r] = _gaussian(rng, r)
                blocks.append(b)
            basis.append(Op(blocks))
        try:
            E = Subspace(alg, basis)
            break
        except DomainError:
            continue
    else:
        raise InstanceError("could not draw an independent basis")
    return instance_to_dict(E, seed=int(seed), ensemble=ensemble)
