"""Classical-channel messages and their byte encoding.

Every message is one tag byte followed by its fields, all big-endian:

    ParityMsg  0x01 | round:u32 | bitvector
    HashMsg    0x02 | k:u32     | bitvector
    SeedMsg    0x03 | len:u32   | seed as len unsigned big-endian bytes

A bitvector is ``length:u32`` followed by ``ceil(length/8)`` bytes, packed
most significant bit first, with zero bits filling the final byte.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .bitcore import BitString

PARITY_TAG = 0x01
HASH_TAG = 0x02
SEED_TAG = 0x03


def encode_bits(bits: BitString) -> bytes:
    return struct.pack(">I", len(bits)) + np.packbits(bits.bits, bitorder="big").tobytes()


def decode_bits(buf: bytes, offset: int = 0) -> tuple[BitString, int]:
    (n,) = struct.unpack_from(">I", buf, offset)
    offset += 4
    nbytes = (n + 7) // 8
    if len(buf) < offset + nbytes:
        raise ValueError("truncated bit vector")
    raw = np.frombuffer(buf, dtype=np.uint8, count=nbytes, offset=offset)
    bits = np.unpackbits(raw, bitorder="big")[:n]
    return BitString(bits), offset + nbytes


@dataclass(frozen=True)
class ParityMsg:
    round: int
    parities: BitString

    def to_bytes(self) -> bytes:
        return bytes([PARITY_TAG]) + struct.pack(">I", self.round) + encode_bits(self.parities)


@dataclass(frozen=True)
class HashMsg:
    k: int
    hash: BitString

    def to_bytes(self) -> bytes:
        return bytes([HASH_TAG]) + struct.pack(">I", self.k) + encode_bits(self.hash)


@dataclass(frozen=True)
class SeedMsg:
    seed: int

    def to_bytes(self) -> bytes:
        raw = self.seed.to_bytes(max(1, (self.seed.bit_length() + 7) // 8), "big")
        return bytes([SEED_TAG]) + struct.pack(">I", len(raw)) + raw


def decode(buf: bytes):
    """Parse one message produced by ``to_bytes``."""
    if not buf:
        raise ValueError("empty message")
    tag = buf[0]
    if tag == PARITY_TAG:
        (rnd,) = struct.unpack_from(">I", buf, 1)
        bits, end = decode_bits(buf, 5)
        msg = ParityMsg(rnd, bits)
    elif tag == HASH_TAG:
        (k,) = struct.unpack_from(">I", buf, 1)
        bits, end = decode_bits(buf, 5)
        msg = HashMsg(k, bits)
    elif tag == SEED_TAG:
        (length,) = struct.unpack_from(">I", buf, 1)
        end = 5 + length
        if len(buf) < end:
            raise ValueError("truncated seed")
        msg = SeedMsg(int.from_bytes(buf[5:end], "big"))
    else:
        raise ValueError(f"unknown message tag {tag:#04x}")
    if end != len(buf):
        raise ValueError("trailing bytes after message")
    return msg
