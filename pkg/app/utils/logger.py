"""
Logging configuration for the application
"""
import logging
import sys
from typing import Optional

import structlog
from pythonjsonlogger import jsonlogger

from app.config import settings

_structlog_configured = False


def _configure_structlog():
    """Route structlog events through stdlib so they share the JSON handlers"""
    global _structlog_configured
    if _structlog_configured:
        return

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.stdlib.render_to_log_kwargs,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
    _structlog_configured = True


def setup_logging(name: str, log_file: Optional[str] = None) -> logging.Logger:
    """Setup structured logging"""

    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, settings.log_level.upper()))

    # Remove existing handlers
    logger.handlers = []

    json_formatter = jsonlogger.JsonFormatter(
        fmt="%(asctime)s %(name)s %(levelname)s %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    # stdout carries command results, so logs go to stderr
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG)
    console_handler.setFormatter(json_formatter)
    logger.addHandler(console_handler)

    log_file = log_file or settings.log_file
    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.INFO)
        file_handler.setFormatter(json_formatter)
        logger.addHandler(file_handler)

    _configure_structlog()
    return logger
