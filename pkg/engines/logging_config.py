import logging
import os
from logging.handlers import RotatingFileHandler


def setup_logger(name="dihedralis", log_file=None, console_level=logging.INFO):
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)

    if log_file is None:
        log_file = os.getenv("DIHEDRALIS_LOG_FILE", "dihedralis.log")

    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    if not logger.handlers:
        file_handler = RotatingFileHandler(log_file, maxBytes=5*1024*1024, backupCount=3)  # 5MB per log file
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)

        console_handler = logging.StreamHandler()
        console_handler.setLevel(console_level)
        console_handler.setFormatter(formatter)

        logger.addHandler(file_handler)
        logger.addHandler(console_handler)

    return logger


def set_console_level(level, name="dihedralis"):
    """Quiet the console handler, e.g. while the CLI writes JSON to stdout."""
    for handler in logging.getLogger(name).handlers:
        if not isinstance(handler, RotatingFileHandler):
            handler.setLevel(level)


def get_logger(module_name):
    # engines.quadform_engine -> dihedralis.quadform_engine
    return logging.getLogger(f"dihedralis.{module_name.rsplit('.', 1)[-1]}")


logger = setup_logger()
