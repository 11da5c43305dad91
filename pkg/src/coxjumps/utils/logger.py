import logging
import sys
from datetime import datetime
from pathlib import Path

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(filename)s - ln %(lineno)d | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logger(
    log_level=logging.WARNING,
    log_to_file: bool = False,
    base_log_name: str = "coxjumps",
    log_dir: Path = None,
) -> None:
    """Configure the root logger.

    Records go to standard error, which keeps standard output free for CSV
    tables, and optionally to a timestamped file in `log_dir` (default
    ./logs).
    """
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_to_file:
        log_dir = Path("logs") if log_dir is None else Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        stamp = datetime.now().strftime("%Y_%m_%d_%H%M")
        handlers.append(logging.FileHandler(log_dir / f"{base_log_name}_{stamp}.log"))
    logging.basicConfig(
        level=log_level,
        format=LOG_FORMAT,
        datefmt=DATE_FORMAT,
        handlers=handlers,
        force=True,
    )
