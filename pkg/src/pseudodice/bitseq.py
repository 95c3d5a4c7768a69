"""0-1 sequences: binarization, sliding-window datasets, pattern census.

Positions are 1-indexed in every public signature.  Bit arrays are
numpy uint8 and immutable after construction; window datasets are
zero-copy views into their source sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .constdigits import DigitStream
from .errors import BoundsError, ConfigError, FormatError

MAX_CENSUS_LENGTH = 24  # census keeps a dense array of 2^L counters

_BIT_FILE_MAGIC = "#pseudodice-bits"
_LINE_WIDTH = 80


def _as_bits(values) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bit sequence must be one-dimensional")
    if arr.size and int(arr.max()) > 1:
        raise ValueError("bit values must be 0 or 1")
    return arr


@dataclass(frozen=True)
class BitSequence:
    """Immutable 0/1 sequence plus a short provenance token."""

    bits: np.ndarray
    source: str = "unknown"

    def __post_init__(self):
        arr = _as_bits(self.bits)
        arr.flags.writeable = False
        object.__setattr__(self, "bits", arr)

    @property
    def count(self) -> int:
        return int(self.bits.size)

    def __len__(self) -> int:
        return self.count

    def slice(self, start: int, length: int) -> "BitSequence":
        """Sub-sequence of `length` bits starting at 1-indexed `start`."""
        if start < 1 or length < 0 or start + length - 1 > self.count:
            raise BoundsError(
                f"slice [{start}, {start + length - 1}] outside sequence of length {self.count}"
            )
        return BitSequence(
            bits=self.bits[start - 1 : start - 1 + length],
            source=f"{self.source},slice={start}:{length}",
        )


@dataclass(frozen=True)
class WindowDataset:
    """Stride-1 (input, label) instances cut from a bit sequence.

    Instance i (1-indexed) is cut from source positions
    start+i-1 .. start+i-1+input_len: the first input_len bits are the
    input, the last bit is the label.
    """

    segment: np.ndarray  # bits start .. start+count+input_len-1
    start: int
    count: int
    input_len: int = 6
    source: str = "unknown"

    @property
    def inputs(self) -> np.ndarray:
        if self.count == 0:
            return np.zeros((0, self.input_len), dtype=np.uint8)
        return sliding_window_view(self.segment, self.input_len)[: self.count]

    @property
    def labels(self) -> np.ndarray:
        return self.segment[self.input_len : self.input_len + self.count]

    def __len__(self) -> int:
        return self.count

    def instance(self, i: int) -> tuple[np.ndarray, int]:
        """1-indexed (input, label) pair."""
        if not 1 <= i <= self.count:
            raise BoundsError(f"instance {i} outside dataset of {self.count} instances")
        return self.inputs[i - 1], int(self.labels[i - 1])

    def slice(self, offset: int, count: int) -> "WindowDataset":
        """Contiguous sub-dataset: `count` instances starting at 0-based `offset`."""
        if offset < 0 or count < 0 or offset + count > self.count:
            raise BoundsError(
                f"sub-dataset [{offset}, {offset + count}) outside {self.count} instances"
            )
        return WindowDataset(
            segment=self.segment[offset : offset + count + self.input_len],
            start=self.start + offset,
            count=count,
            input_len=self.input_len,
            source=self.source,
        )

    def window_values(self) -> np.ndarray:
        """Per-instance integer code of the (input_len+1)-bit window."""
        width = self.input_len + 1
        acc = np.zeros(self.count, dtype=np.int64)
        for j in range(width):
            acc = (acc << 1) | self.segment[j : j + self.count]
        return acc


@dataclass(frozen=True)
class PatternCensus:
    """Overlapping occurrence counts of every length-L bit string."""

    L: int
    n: int
    counts: np.ndarray  # int64, length 2^L, indexed by the string's binary value
    source: str = ""

    def __post_init__(self):
        arr = np.ascontiguousarray(self.counts, dtype=np.int64)
        if arr.size != 1 << self.L:
            raise ValueError(f"census needs {1 << self.L} counters, got {arr.size}")
        arr.flags.writeable = False
        object.__setattr__(self, "counts", arr)

    @property
    def window_count(self) -> int:
        return self.n - self.L + 1

    def pattern_string(self, value: int) -> str:
        return format(value, f"0{self.L}b")


# ---------------------------------------------------------------------------
# operations


def binarize_digits(stream: DigitStream, threshold: int = 5, inclusive: bool = True) -> BitSequence:
    """Map decimal digits to bits: 1 when digit >= threshold (or > when
    inclusive=False)."""
    digits = stream.digits
    bits = (digits >= threshold) if inclusive else (digits > threshold)
    op = ">=" if inclusive else ">"
    return BitSequence(
        bits=bits.astype(np.uint8),
        source=f"constant={stream.constant.value},threshold{op}{threshold}",
    )


def make_windows(bits: BitSequence, start: int, count: int, input_len: int = 6) -> WindowDataset:
    """Cut `count` stride-1 (input, label) instances starting at 1-indexed `start`."""
    if input_len < 1:
        raise ConfigError("input_len must be at least 1")
    if start < 1:
        raise BoundsError("start position is 1-indexed and must be >= 1")
    if count < 0:
        raise BoundsError("instance count must be non-negative")
    if count == 0:
        return WindowDataset(
            segment=np.zeros(0, dtype=np.uint8),
            start=start,
            count=0,
            input_len=input_len,
            source=bits.source,
        )
    needed = start + count + input_len - 1
    if needed > bits.count:
        raise BoundsError(
            f"{count} instances at position {start} require a sequence of at "
            f"least {needed} bits; have {bits.count}"
        )
    return WindowDataset(
        segment=bits.bits[start - 1 : needed],
        start=start,
        count=count,
        input_len=input_len,
        source=bits.source,
    )


def pattern_census(bits: BitSequence, n: int, L: int) -> PatternCensus:
    """Count every length-L string over the first n bits (overlapping)."""
    if L < 1:
        raise ConfigError("pattern length must be at least 1")
    if L > MAX_CENSUS_LENGTH:
        raise ConfigError(f"pattern length {L} exceeds the dense-census cap {MAX_CENSUS_LENGTH}")
    if n < L:
        raise BoundsError(f"census over {n} bits cannot hold a length-{L} pattern")
    if n > bits.count:
        raise BoundsError(f"census over {n} bits requested; sequence has {bits.count}")
    w = n - L + 1
    acc = np.zeros(w, dtype=np.int64)
    data = bits.bits
    for j in range(L):
        acc = (acc << 1) | data[j : j + w]
    counts = np.bincount(acc, minlength=1 << L)
    return PatternCensus(L=L, n=n, counts=counts, source=bits.source)


def dataset_census(dataset: WindowDataset) -> PatternCensus:
    """Census of the full windows of a dataset (L = input_len + 1).

    Equals pattern_census over the region the dataset was cut from.
    """
    width = dataset.input_len + 1
    if width > MAX_CENSUS_LENGTH:
        raise ConfigError(f"window width {width} exceeds the dense-census cap")
    counts = np.bincount(dataset.window_values(), minlength=1 << width)
    return PatternCensus(
        L=width,
        n=dataset.count + width - 1,
        counts=counts,
        source=dataset.source,
    )


def ones_frequency(bits: BitSequence, n: int) -> float:
    """Fraction of ones among the first n bits."""
    if n < 1 or n > bits.count:
        raise BoundsError(f"prefix length {n} outside sequence of {bits.count} bits")
    return int(bits.bits[:n].sum(dtype=np.int64)) / n


# ---------------------------------------------------------------------------
# files
#
#   #pseudodice-bits source=<token-without-spaces> count=<n>
#   <'0'/'1' characters, 80 per line>


def save_bit_file(bits: BitSequence, path) -> None:
    chars = (bits.bits + ord("0")).tobytes().decode("ascii")
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{_BIT_FILE_MAGIC} source={bits.source.replace(' ', '_')} count={bits.count}\n")
        for i in range(0, len(chars), _LINE_WIDTH):
            fh.write(chars[i : i + _LINE_WIDTH])
            fh.write("\n")


def load_bit_file(path) -> BitSequence:
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError(f"{path}: empty file")
    parts = lines[0].split(" ")
    if parts[0] != _BIT_FILE_MAGIC:
        raise FormatError(f"{path}:1: not a bit-sequence file (bad magic)")
    fields = dict(token.partition("=")[::2] for token in parts[1:])
    if "count" not in fields:
        raise FormatError(f"{path}:1: header missing 'count'")
    try:
        declared = int(fields["count"])
    except ValueError:
        raise FormatError(f"{path}:1: count is not an integer") from None
    chunks = []
    for lineno in range(1, len(lines)):
        arr = np.frombuffer(lines[lineno].encode("ascii"), dtype=np.uint8)
        bad = np.nonzero((arr != ord("0")) & (arr != ord("1")))[0]
        if bad.size:
            col = int(bad[0]) + 1
            raise FormatError(f"{path}:{lineno + 1}:{col}: invalid bit character")
        chunks.append(arr - ord("0"))
    data = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.uint8)
    if data.size != declared:
        raise FormatError(f"{path}: declared count {declared} but found {data.size} bits")
    return BitSequence(bits=data, source=fields.get("source", "file"))


def save_census_csv(census: PatternCensus, path) -> None:
    """CSV census export: pattern,count,frequency."""
    w = census.window_count
    with open(path, "w", encoding="ascii") as fh:
        fh.write("pattern,count,frequency\n")
        for value in range(1 << census.L):
            c = int(census.counts[value])
            fh.write(f"{census.pattern_string(value)},{c},{c / w!r}\n")
