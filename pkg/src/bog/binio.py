"""Little-endian binary reading/writing helpers with CRC32 trailers."""

import struct
import zlib

import numpy as np

from .errors import FormatError


class Reader:
    """Sequential reader that reports the byte offset of any format problem."""

    def __init__(self, data, what="file"):
        self.data = memoryview(data)
        self.pos = 0
        self.what = what

    def fail(self, message):
        raise FormatError(f"{self.what}: {message}", offset=self.pos)

    def take(self, n):
        if n < 0 or self.pos + n > len(self.data):
            self.fail(f"truncated: need {n} bytes, {len(self.data) - self.pos} left")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return bytes(chunk)

    def unpack(self, fmt):
        size = struct.calcsize("<" + fmt)
        values = struct.unpack("<" + fmt, self.take(size))
        return values[0] if len(values) == 1 else values

    def floats(self, count):
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)

    def string(self):
        n = self.unpack("H")
        raw = self.take(n)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            self.fail("invalid UTF-8 string")


def split_crc(data, what="file"):
    """Verify and strip the trailing CRC32; returns the payload bytes."""
    if len(data) < 4:
        raise FormatError(f"{what}: truncated, no CRC trailer", offset=len(data))
    payload, trailer = data[:-4], data[-4:]
    expected = struct.unpack("<I", trailer)[0]
    actual = zlib.crc32(payload) & 0xFFFFFFFF
    if expected != actual:
        raise FormatError(f"{what}: CRC mismatch (stored {expected:#010x}, computed {actual:#010x})", offset=len(payload))
    return payload


def with_crc(payload):
    return payload + struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF)


def pack_string(s):
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError("string too long for u16 length prefix")
    return struct.pack("<H", len(raw)) + raw


def pack_floats(arr):
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()
