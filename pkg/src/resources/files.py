"""
File Helpers
Atomic writes and the plain-text key = value format
"""

import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterator, List, Tuple, Union

from src.errors import ParseError

PathLike = Union[str, Path]


@contextmanager
def atomic_write(path: PathLike, mode: str = "w") -> Iterator[IO]:
    """Open a temp file beside `path`; rename over `path` on success"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    encoding = None if "b" in mode else "utf-8"
    try:
        with os.fdopen(fd, mode, encoding=encoding) as handle:
            yield handle
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def parse_key_values(text: str, source: str = "") -> List[Tuple[int, str, str]]:
    """Split `key = value` lines into (line_number, key, value) triples"""
    entries = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", number, source)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError("missing key before '='", number, source)
        entries.append((number, key, value))
    return entries


def format_key_values(items: List[Tuple[str, object]]) -> str:
    """Render (key, value) pairs in the key = value format"""
    return "".join(f"{key} = {value}\n" for key, value in items)
