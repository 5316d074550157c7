import logging
import os
from typing import Optional

from dotenv import load_dotenv
from rich.logging import RichHandler

load_dotenv()

_CONFIGURED = False


def configure_logging(level: Optional[str] = None) -> None:
    """Install a RichHandler on the root logger once; NQK_LOG_LEVEL wins over the default."""
    global _CONFIGURED
    level = (level or os.getenv("NQK_LOG_LEVEL") or "INFO").upper()
    root = logging.getLogger()
    if not _CONFIGURED:
        handler = RichHandler(rich_tracebacks=True, show_path=False, markup=False)
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
        root.addHandler(handler)
        _CONFIGURED = True
    root.setLevel(level)


def progress_disabled(logger: logging.Logger) -> bool:
    """tqdm bars are only shown when INFO messages would be."""
    return not logger.isEnabledFor(logging.INFO)
