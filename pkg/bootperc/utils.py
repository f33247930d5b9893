import logging
from logging.handlers import RotatingFileHandler

from .config import get_settings

_FORMAT = "timestamp=%(asctime)s level=%(levelname)s logger=%(name)s message=%(message)s"
_DATEFMT = "%Y-%m-%dT%H:%M:%S%z"

_root = logging.getLogger("bootperc")


def _configure_root() -> None:
    if _root.handlers:  # Prevent duplicate handlers with pytest reloads
        return
    settings = get_settings()
    _root.setLevel(getattr(logging, settings.log_level, logging.INFO))
    try:
        log_dir = settings.log_dir
        log_dir.mkdir(parents=True, exist_ok=True)
        handler: logging.Handler = RotatingFileHandler(
            log_dir / "bootperc.log", maxBytes=1_000_000, backupCount=3, encoding="utf-8"
        )
    except OSError:
        # read-only checkout
        handler = logging.NullHandler()
    handler.setFormatter(logging.Formatter(fmt=_FORMAT, datefmt=_DATEFMT))
    _root.addHandler(handler)


def get_logger(name: str) -> logging.Logger:
    """Return a logger under the ``bootperc`` hierarchy with file logging set up."""
    _configure_root()
    if not name.startswith("bootperc"):
        name = f"bootperc.{name}"
    return logging.getLogger(name)
