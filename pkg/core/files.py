import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import BinaryIO, Iterator, List, Sequence, Tuple, Union

from core.errors import OutputPathError

logger = logging.getLogger("core")

Payload = Union[bytes, str]


def _stage(target: Path, data: Payload) -> str:
    """Write `data` to a temp file next to `target` and return its name."""
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data.encode("utf-8") if isinstance(data, str) else data)
            fh.flush()
            os.fsync(fh.fileno())
    except BaseException:
        _unlink_quietly(tmp_name)
        raise
    return tmp_name


def _unlink_quietly(name) -> None:
    try:
        os.unlink(name)
    except OSError:
        pass


@contextmanager
def atomic_write(path: str | os.PathLike, mode: str = "wb") -> Iterator[BinaryIO]:
    """
    Write to a temp file in the target directory and rename it into place on
    success. On any exception the temp file is removed and `path` is untouched.
    """
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    except OSError as exc:
        raise OutputPathError(f"Cannot write {target}: {exc.strerror or exc}") from exc
    try:
        with os.fdopen(fd, mode) as fh:
            yield fh
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp_name, target)
    except BaseException as exc:
        _unlink_quietly(tmp_name)
        logger.warning("Discarded partial output for %s", target)
        if isinstance(exc, OSError):
            raise OutputPathError(f"Cannot write {target}: {exc.strerror or exc}") from exc
        raise


def write_bytes_atomic(path: str | os.PathLike, data: bytes) -> None:
    with atomic_write(path, "wb") as fh:
        fh.write(data)


def write_text_atomic(path: str | os.PathLike, text: str) -> None:
    with atomic_write(path, "w") as fh:
        fh.write(text)


def write_all_atomic(outputs: Sequence[Tuple[str | os.PathLike, Payload]]) -> None:
    """
    Write several files so that either all of them land or none do.

    Every payload is staged next to its target first; targets are only
    replaced once all staging succeeded. If a rename fails, the targets
    already placed by this call are removed again.
    """
    targets = [Path(p) for p, _ in outputs]
    if len({t.resolve() for t in targets}) != len(targets):
        raise OutputPathError(f"Output paths must be distinct, got {[str(t) for t in targets]}.")

    staged: List[Tuple[str, Path]] = []
    placed: List[Path] = []
    current = targets[0] if targets else None
    try:
        for target, (_, data) in zip(targets, outputs):
            current = target
            staged.append((_stage(target, data), target))
        for tmp_name, target in staged:
            current = target
            os.replace(tmp_name, target)
            placed.append(target)
    except BaseException as exc:
        for tmp_name, _ in staged:
            _unlink_quietly(tmp_name)
        for target in placed:
            _unlink_quietly(target)
        logger.warning("Discarded %d staged outputs after failing on %s", len(staged), current)
        if isinstance(exc, OSError):
            raise OutputPathError(f"Cannot write {current}: {exc.strerror or exc}") from exc
        raise
