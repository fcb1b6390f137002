import logging
import sys
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator

# label of the run currently being solved, e.g. "subcritical/gf_wb/p5/N100"
_RUN: ContextVar[str] = ContextVar("gfswe_run", default="")


class RunContextFilter(logging.Filter):
    """Stamps every record with the active run label as `record.run`."""

    def filter(self, record: logging.LogRecord) -> bool:
        label = _RUN.get()
        record.run = f"[{label}] " if label else ""
        return True


class LogFormatter(logging.Formatter):
    grey = "\x1b[38;20m"
    yellow = "\x1b[33;20m"
    green = "\033[92m"
    red = "\x1b[31;20m"
    bold_red = "\x1b[31;1m"
    reset = "\x1b[0m"
    _format = "%(levelname)s: %(asctime)s: %(run)s%(message)s"

    COLORS = {
        logging.DEBUG: grey,
        logging.INFO: green,
        logging.WARNING: yellow,
        logging.ERROR: red,
        logging.CRITICAL: bold_red,
    }

    def __init__(self, color: bool | None = None) -> None:
        super().__init__()
        self.color = color

    def format(self, record: logging.LogRecord) -> str:
        if not hasattr(record, "run"):
            record.run = ""
        color = sys.stderr.isatty() if self.color is None else self.color
        fmt = self.COLORS.get(record.levelno, "") + self._format + self.reset if color else self._format
        return logging.Formatter(fmt).format(record)


@contextmanager
def run_context(case: str, scheme: str, order: int, cells: int) -> Iterator[str]:
    """Tag the log records emitted inside the block with the run they belong to."""
    label = f"{case}/{scheme}/p{order}/N{cells}"
    token = _RUN.set(label)
    try:
        yield label
    finally:
        _RUN.reset(token)


LOG = logging.Logger("gfswe_logger")
LOG.addFilter(RunContextFilter())
if __name__ == "gfswe.util.log":
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(LogFormatter())
    handler.setLevel(logging.DEBUG)
    LOG.addHandler(handler)
    LOG.setLevel(logging.INFO)


def set_verbosity(verbose: bool) -> None:
    LOG.setLevel(logging.DEBUG if verbose else logging.INFO)
