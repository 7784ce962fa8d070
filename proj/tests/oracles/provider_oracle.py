#!/usr/bin/env python3
"""Independent provider model used to produce the golden conformance vectors.

Usage: provider_oracle.py > tests/data/provider_vectors.txt
"""

import json
import random


class Provider:
    def __init__(self, data: bytes):
        self.data = bytes(data)

    def _take(self, k):
        head, self.data = self.data[:k], self.data[k:]
        return int.from_bytes(head.ljust(k, b"\0"), "big")

    def int_in_range(self, lo, hi):
        if lo > hi:
            raise ValueError("lo > hi")
        span = hi - lo + 1
        k = 0
        while 256 ** k < span:
            k += 1
        return lo + self._take(k) % span

    def bool(self):
        if not self.data:
            return False
        return bool(self._take(1) & 1)

    def probability(self):
        return self._take(4) / 2 ** 32

    def ascii_string(self, max_len):
        if not self.data:
            return ""
        n = self._take(1) % (max_len + 1)
        head, self.data = self.data[:n], self.data[n:]
        return "".join(chr(0x20 + b % 95) for b in head)

    def int_list(self, count, lo, hi):
        return [self.int_in_range(lo, hi) for _ in range(count)]


def render(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    return "[" + ",".join(str(v) for v in value) + "]"


def line(buf, prim, args):
    p = Provider(buf)
    value = getattr(p, prim)(*args)
    hexbuf = buf.hex() or "-"
    argtxt = ",".join(str(a) for a in args) or "-"
    return f"{hexbuf} {prim} {argtxt} -> {render(value)} {p.data.hex() or '-'}"


def cases():
    yield bytes([0x00]), "int_in_range", (1, 6)
    yield bytes([0x07]), "int_in_range", (1, 6)
    yield b"", "int_in_range", (5, 9)
    yield b"\xff", "int_in_range", (0, 255)
    yield b"\xff\x01", "int_in_range", (0, 256)
    yield b"\x12", "int_in_range", (0, 65535)
    yield b"\x12\x34\x56", "int_in_range", (1, 10 ** 6)
    yield b"\xab\xcd", "int_in_range", (7, 7)
    yield b"\x80" * 9, "int_in_range", (-(2 ** 63), 2 ** 63 - 1)
    yield b"\x01\x02\x03\x04\x05", "int_in_range", (-100, 100)
    yield b"\xde\xad\xbe\xef", "int_in_range", (-5, -1)
    yield b"", "bool", ()
    yield b"\x00", "bool", ()
    yield b"\x01\x02", "bool", ()
    yield b"\xfe", "bool", ()
    yield b"", "probability", ()
    yield b"\x80\x00\x00\x00", "probability", ()
    yield b"\xff\xff\xff\xff\x01", "probability", ()
    yield b"\x00\x00\x00\x01", "probability", ()
    yield b"\x00\x06\x8d\xb9", "probability", ()
    yield b"\x40", "probability", ()
    yield b"", "ascii_string", (10,)
    yield b"\x00\x41", "ascii_string", (10,)
    yield b"\x03\x41\x42\x43\x44", "ascii_string", (10,)
    yield b"\x0f\x00\x01", "ascii_string", (20,)
    yield b"\x05\x02\x3c\x5e\x7e\xff", "ascii_string", (4,)
    yield b"\x09hello", "ascii_string", (0,)
    yield b"", "int_list", (3, 0, 9)
    yield b"\x01\x02\x03", "int_list", (3, 0, 9)
    yield b"\x01", "int_list", (3, 10, 20)
    yield b"\x00\x10\x20\x30", "int_list", (2, 0, 1000)
    yield b"\x05", "int_list", (0, 0, 9)

    rng = random.Random(20240601)
    prims = [
        ("int_in_range", lambda: tuple(sorted((rng.randint(-10 ** 9, 10 ** 9), rng.randint(-10 ** 9, 10 ** 9))))),
        ("int_in_range", lambda: (0, rng.choice([1, 2, 255, 256, 65536, 2 ** 24, 2 ** 32]))),
        ("bool", lambda: ()),
        ("probability", lambda: ()),
        ("ascii_string", lambda: (rng.randint(0, 40),)),
        ("int_list", lambda: (rng.randint(0, 6), -50, rng.randint(-50, 5000))),
    ]
    for _ in range(48):
        prim, args = rng.choice(prims)
        buf = bytes(rng.randrange(256) for _ in range(rng.randint(0, 12)))
        yield buf, prim, args()


def main():
    print("# provider conformance vectors")
    print("# <hex buffer> <primitive> <args> -> <value> <hex rest>")
    for buf, prim, args in cases():
        print(line(buf, prim, args))


if __name__ == "__main__":
    main()
