import os
import re
from pathlib import Path
from tempfile import NamedTemporaryFile

_UNSAFE = re.compile(r"[^A-Za-z0-9_.-]")


def safe_name(*parts: object) -> str:
    """Join parts with '_' into a file name without path separators."""
    return _UNSAFE.sub("-", "_".join(str(p) for p in parts))


def put_file(data: bytes | str, path: Path) -> bool:
    """
    Write `data` to `path`, creating parent directories.

    The data goes to a temporary file next to `path` which is then renamed over it,
    so readers (e.g. convergence workers sharing an equilibrium cache) never see a
    partial file. The temporary file is removed on failure.
    """
    directory = os.path.dirname(os.path.abspath(path))
    tmp_name = None
    try:
        os.makedirs(directory, exist_ok=True)
        mode = "w" if isinstance(data, str) else "bw"
        with NamedTemporaryFile(mode, dir=directory, prefix=".tmp-", delete=False) as o_file:
            tmp_name = o_file.name
            o_file.write(data)
        os.replace(tmp_name, path)
    except OSError:
        if tmp_name is not None:
            try:
                os.remove(tmp_name)
            except OSError:
                pass
        return False
    return True


def try_read_file(path: Path) -> bytes | None:
    try:
        with open(path, "br") as i_file:
            return i_file.read()
    except OSError:
        return None
