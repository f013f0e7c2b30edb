"""Log sinks for experiment runs.

Every record under the ``qos_prediction`` logger reaches the run's log file;
only records flagged with :func:`console_kwargs` reach the console, which
keeps per-cell chatter in the file while stage summaries stay visible.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Any, Dict, MutableMapping, Optional, Tuple

ROOT_LOGGER = "qos_prediction"
CONSOLE_FLAG = "to_console"

FILE_FORMAT = "%(asctime)s %(levelname)-7s [%(threadName)s] %(name)s: %(message)s"
CONSOLE_FORMAT = "[%(levelname)s] %(message)s"


class _ConsoleOnly(logging.Filter):
    def filter(self, record: logging.LogRecord) -> bool:
        return bool(getattr(record, CONSOLE_FLAG, False))


class CellLoggerAdapter(logging.LoggerAdapter):
    """Prefixes messages with an experiment cell label such as ``fiemf@d0.05-s1``."""

    def process(
        self, msg: Any, kwargs: MutableMapping[str, Any]
    ) -> Tuple[Any, MutableMapping[str, Any]]:
        extra = dict(self.extra or {})
        extra.update(kwargs.get("extra") or {})
        kwargs["extra"] = extra
        return f"[{extra['cell']}] {msg}", kwargs


def cell_logger(logger: logging.Logger, label: str) -> CellLoggerAdapter:
    return CellLoggerAdapter(logger, {"cell": label})


def configure_logging(
    *,
    log_to_file: bool,
    log_file: Optional[Path],
    log_to_console: bool,
    verbose: bool = False,
) -> None:
    """Replace the package's handlers with a file sink and a filtered stderr sink.

    The level is DEBUG when ``verbose`` and INFO otherwise. Numba's compiler
    logging is held at WARNING either way.
    """
    package_logger = logging.getLogger(ROOT_LOGGER)
    package_logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    package_logger.propagate = False
    logging.getLogger("numba").setLevel(logging.WARNING)

    for handler in list(package_logger.handlers):
        package_logger.removeHandler(handler)
        handler.close()

    if log_to_file and log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
        package_logger.addHandler(file_handler)

    if log_to_console:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
        console_handler.addFilter(_ConsoleOnly())
        package_logger.addHandler(console_handler)

    if not package_logger.handlers:
        package_logger.addHandler(logging.NullHandler())


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """``qos_prediction`` or one of its children, e.g. ``get_logger("workflow.sweep")``."""
    return logging.getLogger(f"{ROOT_LOGGER}.{name}" if name else ROOT_LOGGER)


def console_kwargs() -> Dict[str, bool]:
    return {CONSOLE_FLAG: True}


__all__ = [
    "CellLoggerAdapter",
    "cell_logger",
    "configure_logging",
    "console_kwargs",
    "get_logger",
]
