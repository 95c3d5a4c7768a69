"""Fractional-part decimal digits of pi, e and sqrt(2) at scale.

Every constant is produced by exact integer arithmetic, scaled by a
power of ten: pi via the Chudnovsky series with binary splitting, e via
the factorial series with binary splitting, sqrt(2) via an adaptive
integer Newton square root.  Each constant also has a second, slower
algorithm that shares no series with the first (Machin arctangents,
direct factorial summation, digit-by-digit long square root); the two
must agree exactly and that agreement is the correctness oracle.

Big integers are gmpy2.mpz (GMP) when gmpy2 is importable and plain
Python ints otherwise.  The fallback is correct but only practical up
to ~10^6 digits.

Digits are the fractional part only (the leading 3/2/1 is excluded) and
positions are 1-indexed.
"""

from __future__ import annotations

import hashlib
import math
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import CapacityError, FormatError

try:
    import gmpy2

    _mpz = gmpy2.mpz
except ImportError:  # pragma: no cover - exercised only without gmpy2
    gmpy2 = None
    _mpz = int

MAX_DIGITS = 20_000_000
MAX_DIGITS_ALT = 1_000_000

_DIGIT_FILE_MAGIC = "#pseudodice-digits"
_LINE_WIDTH = 80


class Constant(Enum):
    PI = "pi"
    E = "e"
    SQRT2 = "sqrt2"


@dataclass(frozen=True)
class DigitStream:
    """Fractional-part decimal digits of one constant, 1-indexed."""

    constant: Constant
    digits: np.ndarray  # uint8 values in 0..9
    convention: str = "fractional"

    def __post_init__(self):
        arr = np.ascontiguousarray(self.digits, dtype=np.uint8)
        if arr.size and int(arr.max()) > 9:
            raise ValueError("digit values must be in 0..9")
        arr.flags.writeable = False
        object.__setattr__(self, "digits", arr)

    @property
    def count(self) -> int:
        return int(self.digits.size)

    def __len__(self) -> int:
        return self.count


# ---------------------------------------------------------------------------
# shared integer helpers


def _digits_str(x) -> str:
    """Decimal digits of a non-negative big integer, as a string."""
    if gmpy2 is not None:
        return gmpy2.mpz(x).digits(10)
    # CPython >= 3.10.7 caps int->str conversions; lift the cap lazily.
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    return str(x)


def _isqrt_newton(n):
    """Exact floor square root by adaptive-precision integer Newton.

    Precision roughly doubles per iteration; the loop invariant keeps
    ``a`` within one of the true root of the leading bits of ``n``, and
    the final conditional subtraction makes the result exact.
    """
    if n < 0:
        raise ValueError("square root of a negative integer")
    if n < 2:
        return n
    c = (n.bit_length() - 1) // 2
    a = _mpz(1)
    d = 0
    for s in reversed(range(c.bit_length())):
        e = d
        d = c >> s
        a = (a << (d - e - 1)) + (n >> (2 * c - e - d + 1)) // a
    return a - 1 if a * a > n else a


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _guard(n: int) -> int:
    return _ceil_div(n, 10) + 10


def _stable_digits(compute, n: int) -> str:
    """Run ``compute(total_digits)`` with guard digits and truncate to n.

    The guard region absorbs series truncation error.  A run of 0s or
    9s immediately after the cut is the only situation in which the
    retained digits could still be off, so on that sentinel the value
    is recomputed at doubled guard until two guard levels agree on the
    last five retained digits.
    """
    if n == 0:
        return ""
    g = _guard(n)
    s = compute(n + g)
    tail = s[n : n + 5]
    if tail != "00000" and tail != "99999":
        return s[:n]
    prev = s[:n]
    while True:
        g *= 2
        cur = compute(n + g)[:n]
        if cur[-5:] == prev[-5:]:
            return cur
        prev = cur


# ---------------------------------------------------------------------------
# pi, primary: Chudnovsky series with binary splitting
#
#   1/pi = 12 * sum_k (-1)^k (6k)! (13591409 + 545140134 k)
#                     / ((3k)! (k!)^3 640320^(3k + 3/2))
#
# P/Q/T over [a,b) combine as P=P1*P2, Q=Q1*Q2, T=Q2*T1+P1*T2 and give
#   pi = 426880 * sqrt(10005) * Q / T.

_CHUD_Q_FACTOR = 10939058860032000  # 640320^3 / 24
_CHUD_DIGITS_PER_TERM = 14  # safe underestimate of 14.1816


def _chud_split(a: int, b: int):
    if b - a == 1:
        if a == 0:
            return _mpz(1), _mpz(1), _mpz(13591409)
        k = _mpz(a)
        p = (6 * k - 5) * (2 * k - 1) * (6 * k - 1)
        q = k * k * k * _CHUD_Q_FACTOR
        t = p * (13591409 + 545140134 * k)
        return p, q, -t if a & 1 else t
    m = (a + b) // 2
    p1, q1, t1 = _chud_split(a, m)
    p2, q2, t2 = _chud_split(m, b)
    return p1 * p2, q1 * q2, q2 * t1 + p1 * t2


def _pi_chudnovsky(total: int) -> str:
    terms = total // _CHUD_DIGITS_PER_TERM + 2
    _, q, t = _chud_split(0, terms)
    root = _isqrt_newton(_mpz(10005) * _mpz(10) ** (2 * total))
    scaled = (426880 * q * root) // t
    s = _digits_str(scaled)
    if len(s) != total + 1 or s[0] != "3":
        raise ArithmeticError("pi series produced a malformed scaled value")
    return s[1:]


# ---------------------------------------------------------------------------
# e, primary: sum 1/k! with binary splitting; p/q over [a,b) satisfies
# p(a,b)/q(a,b) = sum_{k=a+1..b} 1/k! when combined as
# p = p1*q2 + p2, q = q1*q2 with leaf p=1, q=b.


def _e_split(a: int, b: int):
    if b - a == 1:
        return _mpz(1), _mpz(b)
    m = (a + b) // 2
    p1, q1 = _e_split(a, m)
    p2, q2 = _e_split(m, b)
    return p1 * q2 + p2, q1 * q2


def _e_terms(total: int) -> int:
    # smallest N with log10((N+1)!) comfortably above the working scale
    target = (total + 5) * math.log(10.0)
    lo, hi = 1, 2
    while math.lgamma(hi + 2) <= target:
        lo, hi = hi, hi * 2
    while lo < hi:
        mid = (lo + hi) // 2
        if math.lgamma(mid + 2) > target:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _e_factorial_split(total: int) -> str:
    n_terms = _e_terms(total)
    p, q = _e_split(0, n_terms)
    scaled = ((p - q) * _mpz(10) ** total) // q  # e - 2 = p/q - 1
    s = _digits_str(scaled)
    if len(s) != total or s[0] != "7":
        raise ArithmeticError("e series produced a malformed scaled value")
    return s


# ---------------------------------------------------------------------------
# sqrt(2), primary: digits of floor(sqrt(2 * 10^(2*total)))


def _sqrt2_newton(total: int) -> str:
    scaled = _isqrt_newton(_mpz(2) * _mpz(10) ** (2 * total))
    s = _digits_str(scaled)
    if len(s) != total + 1 or s[0] != "1":
        raise ArithmeticError("sqrt(2) root produced a malformed scaled value")
    return s[1:]


# ---------------------------------------------------------------------------
# alternates


def _arctan_inv_scaled(x: int, total: int):
    """floor-truncated arctan(1/x) * 10^total by the alternating series."""
    acc = _mpz(0)
    value = _mpz(10) ** total // x
    x2 = x * x
    k = 0
    while value:
        term = value // (2 * k + 1)
        acc = acc - term if k & 1 else acc + term
        value //= x2
        k += 1
    return acc


def _pi_machin(total: int) -> str:
    # pi = 16*arctan(1/5) - 4*arctan(1/239)
    scaled = 16 * _arctan_inv_scaled(5, total) - 4 * _arctan_inv_scaled(239, total)
    s = _digits_str(scaled)
    if len(s) != total + 1 or s[0] != "3":
        raise ArithmeticError("Machin series produced a malformed scaled value")
    return s[1:]


def _e_direct_sum(total: int) -> str:
    # term k carries floor-cascaded 10^total/k!; stops when the term
    # underflows, which bounds the truncated tail by one unit per term.
    term = _mpz(10) ** total
    acc = term
    k = 1
    while term:
        term //= k
        acc += term
        k += 1
    s = _digits_str(acc - 2 * _mpz(10) ** total)
    if len(s) != total or s[0] != "7":
        raise ArithmeticError("e summation produced a malformed scaled value")
    return s


def _sqrt2_long_division(n: int) -> str:
    """Digit-by-digit (pencil-and-paper) square root of 2.

    Maintains root^2 + remainder = 2 * 10^(2i) exactly, so every emitted
    digit is final and no guard digits are needed.
    """
    root = _mpz(1)
    rem = _mpz(1)
    out = []
    for _ in range(n):
        rem *= 100
        base = 20 * root
        lo, hi = 0, 9
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if (base + mid) * mid <= rem:
                lo = mid
            else:
                hi = mid - 1
        rem -= (base + lo) * lo
        root = root * 10 + lo
        out.append(chr(48 + lo))
    return "".join(out)


# ---------------------------------------------------------------------------
# public operations

_PRIMARY = {
    Constant.PI: _pi_chudnovsky,
    Constant.E: _e_factorial_split,
    Constant.SQRT2: _sqrt2_newton,
}

_ALTERNATE = {
    Constant.PI: _pi_machin,
    Constant.E: _e_direct_sum,
}


def _to_stream(constant: Constant, digit_chars: str) -> DigitStream:
    arr = np.frombuffer(digit_chars.encode("ascii"), dtype=np.uint8) - ord("0")
    return DigitStream(constant=constant, digits=arr)


def gen_digits(constant: Constant, n: int, max_digits: int = MAX_DIGITS) -> DigitStream:
    """First n fractional-part decimal digits by the primary algorithm."""
    if n < 0:
        raise ValueError("digit count must be non-negative")
    if n > max_digits:
        raise CapacityError(
            f"requested {n} digits of {constant.value}; configured maximum is {max_digits}"
        )
    return _to_stream(constant, _stable_digits(_PRIMARY[constant], n))


def gen_digits_alt(constant: Constant, n: int) -> DigitStream:
    """Same contract as gen_digits via the unrelated verification algorithm."""
    if n < 0:
        raise ValueError("digit count must be non-negative")
    if n > MAX_DIGITS_ALT:
        raise CapacityError(
            f"requested {n} digits of {constant.value}; the verification "
            f"algorithm is capped at {MAX_DIGITS_ALT}"
        )
    if constant is Constant.SQRT2:
        return _to_stream(constant, _sqrt2_long_division(n))
    return _to_stream(constant, _stable_digits(_ALTERNATE[constant], n))


# ---------------------------------------------------------------------------
# digit-cache files
#
#   #pseudodice-digits constant=pi count=1000 convention=fractional
#   <ASCII digits, 80 per line, last line may be short>
#   #sha256=<hex of the digit characters>


def save_digit_file(stream: DigitStream, path) -> None:
    chars = (stream.digits + ord("0")).tobytes().decode("ascii")
    sha = hashlib.sha256(chars.encode("ascii")).hexdigest()
    with open(path, "w", encoding="ascii") as fh:
        fh.write(
            f"{_DIGIT_FILE_MAGIC} constant={stream.constant.value} "
            f"count={stream.count} convention={stream.convention}\n"
        )
        for i in range(0, len(chars), _LINE_WIDTH):
            fh.write(chars[i : i + _LINE_WIDTH])
            fh.write("\n")
        fh.write(f"#sha256={sha}\n")


def _parse_header(path, line: str) -> dict:
    parts = line.rstrip("\n").split(" ")
    if parts[0] != _DIGIT_FILE_MAGIC:
        raise FormatError(f"{path}:1: not a digit-cache file (bad magic)")
    fields = {}
    for token in parts[1:]:
        key, sep, value = token.partition("=")
        if not sep:
            raise FormatError(f"{path}:1: malformed header token {token!r}")
        fields[key] = value
    for required in ("constant", "count", "convention"):
        if required not in fields:
            raise FormatError(f"{path}:1: header missing {required!r}")
    return fields


def load_digit_file(path) -> DigitStream:
    path = Path(path)
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError(f"{path}: empty file")
    fields = _parse_header(path, lines[0])
    try:
        constant = Constant(fields["constant"])
    except ValueError:
        raise FormatError(f"{path}:1: unknown constant {fields['constant']!r}") from None
    try:
        declared = int(fields["count"])
    except ValueError:
        raise FormatError(f"{path}:1: count is not an integer") from None
    if declared < 0:
        raise FormatError(f"{path}:1: negative count")

    sha_declared = None
    body_end = len(lines)
    if len(lines) > 1 and lines[-1].startswith("#sha256="):
        sha_declared = lines[-1][len("#sha256=") :]
        body_end = len(lines) - 1

    chunks = []
    for lineno in range(1, body_end):
        text = lines[lineno]
        if text.startswith("#"):
            raise FormatError(f"{path}:{lineno + 1}: unexpected comment line in digit body")
        arr = np.frombuffer(text.encode("ascii"), dtype=np.uint8)
        bad = np.nonzero((arr < ord("0")) | (arr > ord("9")))[0]
        if bad.size:
            col = int(bad[0]) + 1
            raise FormatError(
                f"{path}:{lineno + 1}:{col}: invalid digit character {text[col - 1]!r}"
            )
        chunks.append(arr - ord("0"))

    digits = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.uint8)
    if digits.size != declared:
        raise FormatError(
            f"{path}: declared count {declared} but found {digits.size} digit characters"
        )
    if sha_declared is not None:
        actual = hashlib.sha256((digits + ord("0")).tobytes()).hexdigest()
        if actual != sha_declared:
            raise FormatError(f"{path}: sha256 mismatch (file corrupt?)")
    stream = DigitStream(constant=constant, digits=digits, convention=fields["convention"])
    return stream
