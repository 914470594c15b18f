"""Effect messages and their wire encoding.

An EffectMessage is the immutable broadcast produced by the prepare half of
an update: the user parameters plus whatever metadata the initiator attached
(a remove-history vector, a unique tag, an observed tag set).  One message
type serves every collection variant in the package; fields that a variant
does not use stay None.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import FrozenSet, Optional, Tuple


class OperationRejected(Exception):
    """An update or query whose precondition fails at the serving replica.

    This is a client-visible rejection, not a fault: callers (the workload
    driver in particular) count it and move on.
    """


class CausalDeliveryViolation(RuntimeError):
    """The transport delivered a message before one it causally depends on.

    Raised by the basic remove-win set, whose effect handler is undefined
    without causal delivery; always a harness bug, never ignored.
    """


class HookContractError(RuntimeError):
    """A user-supplied resolution hook broke its contract (e.g. a
    non-commutative update resolver)."""


# (replica_id, per-replica sequence number); unique across the system.
UniqueTag = Tuple[int, int]

KIND_ADD = "add"
KIND_RMV = "rmv"
KIND_UPD = "upd"

_KIND_CODE = {KIND_ADD: 0, KIND_RMV: 1, KIND_UPD: 2}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}


@dataclass(frozen=True)
class EffectMessage:
    kind: str                 # 'add' | 'rmv' | 'upd'
    key: object               # element id (str or int)
    initiator: int
    op_id: UniqueTag          # unique per prepared update
    vector: Optional[tuple] = None          # remove-history vector
    tags: Optional[FrozenSet[UniqueTag]] = None  # tag set (basic add / add-win)
    tag: Optional[UniqueTag] = None         # single tag (basic rmv / add-win add)
    value: Optional[int] = None             # innate value or update payload


def _pack_uint_seq(seq) -> bytes:
    return struct.pack(">I", len(seq)) + b"".join(struct.pack(">Q", x) for x in seq)


def _unpack_uint_seq(buf: bytes, off: int):
    (n,) = struct.unpack_from(">I", buf, off)
    off += 4
    vals = struct.unpack_from(">%dQ" % n, buf, off) if n else ()
    return tuple(vals), off + 8 * n


def _pack_tag(tag: UniqueTag) -> bytes:
    return struct.pack(">HQ", tag[0], tag[1])


def _unpack_tag(buf: bytes, off: int):
    r, s = struct.unpack_from(">HQ", buf, off)
    return (r, s), off + 10


def encode_message(msg: EffectMessage, int_keys: bool = False) -> bytes:
    """Serialize to the shared wire format.

    Layout: kind byte, element id (u64 or length-prefixed UTF-8), initiator
    (u16), op id, then presence-flagged sections for the vector, tag-set,
    single tag and value payloads.
    """
    out = [struct.pack(">B", _KIND_CODE[msg.kind])]
    if int_keys:
        out.append(struct.pack(">BQ", 0, msg.key))
    else:
        kb = str(msg.key).encode("utf-8")
        out.append(struct.pack(">BI", 1, len(kb)) + kb)
    out.append(struct.pack(">H", msg.initiator))
    out.append(_pack_tag(msg.op_id))

    flags = ((msg.vector is not None) | (msg.tags is not None) << 1
             | (msg.tag is not None) << 2 | (msg.value is not None) << 3)
    out.append(struct.pack(">B", flags))
    if msg.vector is not None:
        out.append(_pack_uint_seq(msg.vector))
    if msg.tags is not None:
        out.append(struct.pack(">I", len(msg.tags)))
        for t in sorted(msg.tags):
            out.append(_pack_tag(t))
    if msg.tag is not None:
        out.append(_pack_tag(msg.tag))
    if msg.value is not None:
        out.append(struct.pack(">q", msg.value))
    return b"".join(out)


def decode_message(buf: bytes) -> EffectMessage:
    off = 0
    (kind_code,) = struct.unpack_from(">B", buf, off)
    off += 1
    (key_mode,) = struct.unpack_from(">B", buf, off)
    off += 1
    if key_mode == 0:
        (key,) = struct.unpack_from(">Q", buf, off)
        off += 8
    else:
        (klen,) = struct.unpack_from(">I", buf, off)
        off += 4
        key = buf[off:off + klen].decode("utf-8")
        off += klen
    (initiator,) = struct.unpack_from(">H", buf, off)
    off += 2
    op_id, off = _unpack_tag(buf, off)
    (flags,) = struct.unpack_from(">B", buf, off)
    off += 1
    vector = tags = tag = value = None
    if flags & 1:
        vector, off = _unpack_uint_seq(buf, off)
    if flags & 2:
        (n,) = struct.unpack_from(">I", buf, off)
        off += 4
        ts = []
        for _ in range(n):
            t, off = _unpack_tag(buf, off)
            ts.append(t)
        tags = frozenset(ts)
    if flags & 4:
        tag, off = _unpack_tag(buf, off)
    if flags & 8:
        (value,) = struct.unpack_from(">q", buf, off)
        off += 8
    return EffectMessage(_CODE_KIND[kind_code], key, initiator, op_id,
                         vector=vector, tags=tags, tag=tag, value=value)
