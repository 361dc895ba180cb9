"""Block programs: exact binary itineraries for the doubling map.

A program is an ordered list of ``(word, count)`` blocks. The generated
sequence is the concatenation ``word_1^count_1 word_2^count_2 ...`` followed
by the last word repeated forever, so every program describes an infinite,
eventually periodic binary sequence. Iterating the doubling map is a shift
of this sequence; real coordinates are read off through a window of
``precision`` bits.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

_BLOCK_RE = re.compile(r"^\(([01]+)\)x(\d+)$")


class ProgramError(ValueError):
    pass


@dataclass(frozen=True)
class BlockProgram:
    blocks: tuple[tuple[str, int], ...]
    precision: int = 53

    def __post_init__(self):
        blocks = tuple((str(w), int(c)) for w, c in self.blocks)
        if not blocks:
            raise ProgramError("block program needs at least one block")
        for word, count in blocks:
            if not word or set(word) - {"0", "1"}:
                raise ProgramError(f"bad block word {word!r}")
            if count < 1:
                raise ProgramError(f"block count must be >= 1, got {count}")
        if not 1 <= self.precision <= 63:
            raise ProgramError("precision must be in [1, 63] bits")
        object.__setattr__(self, "blocks", blocks)

    # -- text form -----------------------------------------------------
    def to_text(self) -> str:
        return ";".join(f"({w})x{c}" for w, c in self.blocks)

    @classmethod
    def from_text(cls, text: str, precision: int = 53) -> "BlockProgram":
        blocks = []
        for chunk in text.replace(" ", "").split(";"):
            if not chunk:
                continue
            mt = _BLOCK_RE.match(chunk)
            if mt is None:
                raise ProgramError(f"cannot parse block {chunk!r}; expected '(word)x(count)'")
            blocks.append((mt.group(1), int(mt.group(2))))
        return cls(tuple(blocks), precision)

    # -- sequence ------------------------------------------------------
    @property
    def finite_length(self) -> int:
        """Bits before the periodic tail starts."""
        return sum(len(w) * c for w, c in self.blocks)

    @property
    def tail_word(self) -> str:
        return self.blocks[-1][0]

    def bits(self, length: int) -> np.ndarray:
        """First ``length`` bits as a uint8 array."""
        parts = []
        have = 0
        for word, count in self.blocks:
            if have >= length:
                break
            w = np.frombuffer(word.encode(), dtype=np.uint8) - ord("0")
            reps = min(count, -(-(length - have) // len(w)))
            parts.append(np.tile(w, reps))
            have += reps * len(w)
        if have < length:
            w = np.frombuffer(self.tail_word.encode(), dtype=np.uint8) - ord("0")
            parts.append(np.tile(w, -(-(length - have) // len(w))))
        return np.concatenate(parts)[:length].astype(np.uint8)

    def shift(self, k: int) -> "BlockProgram":
        """Program for the sequence with its first ``k`` bits removed."""
        if k < 0:
            raise ProgramError("shift must be nonnegative")
        blocks = list(self.blocks)
        out: list[tuple[str, int]] = []
        i = 0
        while i < len(blocks):
            word, count = blocks[i]
            size = len(word) * count
            last = i == len(blocks) - 1
            if k == 0:
                out.extend(blocks[i:])
                break
            if last:
                r = k % len(word)
                rot = word[r:] + word[:r]
                full = min(k // len(word), count - 1)
                out.append((rot, count - full))
                k = 0
                break
            if k >= size:
                k -= size
                i += 1
                continue
            full, r = divmod(k, len(word))
            if r:
                out.append((word[r:], 1))
                full += 1
            if count - full > 0:
                out.append((word, count - full))
            out.extend(blocks[i + 1:])
            k = 0
            break
        return BlockProgram(tuple(out), self.precision)

    def points(self, n: int, start: int = 0) -> np.ndarray:
        """Real coordinates of the first ``n`` shifts, starting at ``start``.

        Point ``j`` is ``sum_{i<B} b[start+j+i] 2^-(i+1)`` with ``B`` the
        precision; exact in float64 for ``B <= 53``.
        """
        B = self.precision
        return window_points(self.bits(start + n + B)[start:], n, B)


def window_points(bits: np.ndarray, n: int, B: int = 53) -> np.ndarray:
    """``sum_{i<B} bits[j+i] 2^-(i+1)`` for ``j < n``; needs ``len(bits) >= n + B - 1``."""
    b = np.asarray(bits[:n + B - 1], dtype=np.uint64)
    if len(b) < n + B - 1:
        b = np.concatenate([b, np.zeros(n + B - 1 - len(b), dtype=np.uint64)])
    w = np.zeros(n, dtype=np.uint64)
    for i in range(B):
        w |= b[i:i + n] << np.uint64(B - 1 - i)
    return w.astype(np.float64) / float(2 ** B)
