"""Process-wide logging configuration for the command-line front end."""

import logging
import sys

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def setup_logging(verbosity: int = 0, log_file: str = None) -> logging.Logger:
    """
    Configures the root logger once.

    Args:
        verbosity (int): 0 for INFO, >= 1 for DEBUG, < 0 for WARNING.
        log_file (str, optional): Also append log records to this file.
    """
    if verbosity > 0:
        level = logging.DEBUG
    elif verbosity < 0:
        level = logging.WARNING
    else:
        level = logging.INFO

    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)
    return logging.getLogger("autogen")
