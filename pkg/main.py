#!/usr/bin/env python3
"""
main.py - command-line entrypoint with logging setup.

Configures logging to both console and a rotating file, installs an excepthook to
capture uncaught exceptions, and then dispatches to cli.commands.

Notes:
- LOG_LEVEL can be changed with environment variable GAUSSVD_LOG_LEVEL (defaults to INFO).
- Log file defaults to ~/.gaussvd/gaussvd.log (directory from GAUSSVD_LOG_DIR).
"""
import os
import sys
import logging
import warnings
from logging.handlers import RotatingFileHandler

# ---- Logging configuration ----
LOG_LEVEL = os.environ.get("GAUSSVD_LOG_LEVEL", "INFO").upper()
LOG_DIR = os.environ.get("GAUSSVD_LOG_DIR", os.path.join(os.path.expanduser("~"), ".gaussvd"))
LOG_FILE = os.path.join(LOG_DIR, "gaussvd.log")


def configure_logging() -> None:
    os.makedirs(LOG_DIR, exist_ok=True)

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)

    # Console handler
    ch = logging.StreamHandler(sys.stdout)
    ch.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))
    ch.setFormatter(logging.Formatter("%(asctime)s %(levelname)-7s %(name)s: %(message)s", "%Y-%m-%d %H:%M:%S"))
    root_logger.addHandler(ch)

    # Rotating file handler
    fh = RotatingFileHandler(LOG_FILE, maxBytes=5 * 1024 * 1024, backupCount=5, encoding="utf-8")
    fh.setLevel(logging.DEBUG)
    fh.setFormatter(
        logging.Formatter("%(asctime)s %(levelname)-7s %(name)s [%(threadName)s]: %(message)s", "%Y-%m-%d %H:%M:%S")
    )
    root_logger.addHandler(fh)

    # numpy/scipy warnings arrive through the warnings module
    logging.captureWarnings(True)
    warnings.simplefilter("default")


# Uncaught exception handler to log stack traces
def _handle_exception(exc_type, exc_value, exc_traceback):
    if issubclass(exc_type, KeyboardInterrupt):
        sys.__excepthook__(exc_type, exc_value, exc_traceback)
        return
    logging.critical("Uncaught exception", exc_info=(exc_type, exc_value, exc_traceback))


def main(argv) -> int:
    configure_logging()
    sys.excepthook = _handle_exception
    from cli.commands import main as run

    logging.debug("gaussvd invoked with %s", argv)
    exit_code = run(argv)
    logging.info("gaussvd exiting with code %s", exit_code)
    for h in logging.getLogger().handlers:
        try:
            h.flush()
        except Exception:
            pass
    return exit_code


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
