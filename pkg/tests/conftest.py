"""Shared fixtures.

Real digit caches (pi and sqrt2 at 9e6 digits, e at 1e6) are built once
into tests/_digitcache and reused across runs; build wall-times are
recorded alongside for the runtime-budget assertions.
"""

import json
import time
from pathlib import Path

import pytest

from pseudodice.constdigits import Constant, gen_digits, load_digit_file, save_digit_file

CACHE_DIR = Path(__file__).parent / "_digitcache"

CACHE_SPEC = {
    "pi": (Constant.PI, 9_000_000),
    "sqrt2": (Constant.SQRT2, 9_000_000),
    "e": (Constant.E, 1_000_000),
}


def _ensure_cache() -> dict:
    CACHE_DIR.mkdir(exist_ok=True)
    meta_path = CACHE_DIR / "build_meta.json"
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    changed = False
    for name, (constant, count) in CACHE_SPEC.items():
        path = CACHE_DIR / f"{name}.txt"
        if path.exists() and meta.get(name, {}).get("count") == count:
            continue
        started = time.time()
        stream = gen_digits(constant, count)
        save_digit_file(stream, path)
        meta[name] = {"count": count, "build_seconds": time.time() - started}
        changed = True
    if changed:
        meta_path.write_text(json.dumps(meta, indent=2) + "\n")
    return meta


@pytest.fixture(scope="session")
def digit_cache_dir() -> Path:
    _ensure_cache()
    return CACHE_DIR


@pytest.fixture(scope="session")
def cache_build_meta() -> dict:
    return _ensure_cache()


@pytest.fixture(scope="session")
def pi_digits(digit_cache_dir):
    return load_digit_file(digit_cache_dir / "pi.txt")


@pytest.fixture(scope="session")
def sqrt2_digits(digit_cache_dir):
    return load_digit_file(digit_cache_dir / "sqrt2.txt")


@pytest.fixture(scope="session")
def e_digits(digit_cache_dir):
    return load_digit_file(digit_cache_dir / "e.txt")
