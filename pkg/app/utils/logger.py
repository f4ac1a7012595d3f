"""
Logging and monitoring utilities.

This module provides centralized logging configuration and helpers for
recording structured verification events. Console output goes to stderr
so that standard output stays reserved for machine-readable reports.
"""

import logging
import logging.handlers
import json
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Dict, Any, Optional

from app.config import settings


def setup_logging(
    log_level: Optional[str] = None,
    log_format: Optional[str] = None,
    log_file: Optional[str] = None
) -> None:
    """
    Setup centralized logging configuration.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL);
            defaults to ``settings.LOG_LEVEL``
        log_format: Custom log format string
        log_file: Path to log file; file handlers are only installed when
            this is given or ``settings.LOG_TO_FILE`` is set
    """
    if log_level is None:
        log_level = settings.LOG_LEVEL
    if log_format is None:
        log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    root = logging.getLogger()
    root.setLevel(getattr(logging, log_level.upper()))
    for handler in list(root.handlers):
        root.removeHandler(handler)

    # Console handler
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(logging.Formatter(log_format))
    root.addHandler(console_handler)

    if log_file is None and not settings.LOG_TO_FILE:
        return

    log_dir = Path(settings.LOG_DIR)
    log_dir.mkdir(parents=True, exist_ok=True)
    if log_file is None:
        log_file = log_dir / f"reconstruct_{datetime.now().strftime('%Y%m%d')}.log"

    file_handler = logging.handlers.RotatingFileHandler(
        log_file,
        maxBytes=10 * 1024 * 1024,  # 10MB
        backupCount=5
    )
    file_handler.setFormatter(logging.Formatter(log_format))
    root.addHandler(file_handler)

    # JSON handler for structured logging
    json_handler = logging.handlers.RotatingFileHandler(
        log_dir / f"reconstruct_structured_{datetime.now().strftime('%Y%m%d')}.json",
        maxBytes=10 * 1024 * 1024,
        backupCount=5
    )
    json_handler.setFormatter(JSONFormatter())
    root.addHandler(json_handler)

    logging.info("Logging system initialized")


_RESERVED_RECORD_KEYS = {
    'name', 'msg', 'args', 'levelname', 'levelno', 'pathname', 'filename',
    'module', 'lineno', 'funcName', 'created', 'msecs', 'relativeCreated',
    'thread', 'threadName', 'processName', 'process', 'getMessage',
    'exc_info', 'exc_text', 'stack_info', 'taskName',
}


class JSONFormatter(logging.Formatter):
    """JSON formatter for structured logging."""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON."""
        log_entry = {
            "timestamp": datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno
        }

        if record.exc_info:
            log_entry["exception"] = self.formatException(record.exc_info)

        for key, value in record.__dict__.items():
            if key not in _RESERVED_RECORD_KEYS:
                log_entry[key] = value

        return json.dumps(log_entry, default=str)


def log_event(
    event_type: str,
    details: Dict[str, Any],
    logger_name: str = "app.events",
    level: str = "INFO"
) -> None:
    """
    Log a structured event with details.

    Args:
        event_type: Type of event (e.g., 'verification', 'suite_result')
        details: Dictionary containing event details
        logger_name: Name of the logger to use
        level: Log level for the event
    """
    logger = logging.getLogger(logger_name)
    log_level = getattr(logging, level.upper())

    log_data = {
        "event_type": event_type,
        **details
    }

    logger.log(log_level, f"Event: {event_type}", extra=log_data)


def log_verification(
    command: str,
    status: str,
    witness_count: int = 0,
    request_data: Optional[Dict[str, Any]] = None,
    processing_time: Optional[float] = None
) -> None:
    """
    Log one CLI verification run.

    Args:
        command: Subcommand name
        status: Report status (verified, refuted, error)
        witness_count: Number of witnesses attached to the report
        request_data: Command arguments (sanitized before logging)
        processing_time: Time taken in seconds
    """
    details = {
        "command": command,
        "status": status,
        "witness_count": witness_count,
        "processing_time_seconds": processing_time
    }

    if request_data:
        details["request_data"] = _sanitize_details(request_data)

    level = "WARNING" if status != "verified" else "INFO"
    log_event("verification", details, "app.commands", level)


def log_suite_result(
    suite_id: str,
    cases: int,
    failures: int,
    processing_time: Optional[float] = None
) -> None:
    """
    Log the outcome of one acceptance suite.

    Args:
        suite_id: Suite identifier such as ``REL-1``
        cases: Number of cases evaluated
        failures: Number of failing cases
        processing_time: Time taken in seconds
    """
    details = {
        "suite_id": suite_id,
        "cases": cases,
        "failures": failures,
        "processing_time_seconds": processing_time
    }
    level = "ERROR" if failures else "INFO"
    log_event("suite_result", details, "app.suites", level)


def log_error(
    error: Exception,
    context: Optional[Dict[str, Any]] = None,
    logger_name: str = "app.errors"
) -> None:
    """
    Log error with context information.

    Args:
        error: Exception that occurred
        context: Additional context about when/where the error occurred
        logger_name: Name of the logger to use
    """
    logger = logging.getLogger(logger_name)

    error_details = {
        "error_type": type(error).__name__,
        "error_message": str(error),
        "context": context or {}
    }

    logger.error(f"Error occurred: {error}", extra=error_details, exc_info=True)


def _looks_like_path(value: str) -> bool:
    return any(sep in value for sep in {os.sep, "/"}) and bool(Path(value).suffix)


def _sanitize_details(data: Dict[str, Any]) -> Dict[str, Any]:
    """
    Reduce request data to loggable values.

    Paths are replaced by their file names and nested dictionaries are
    sanitized recursively. Command-line paths arrive as strings, so a
    string with a directory part and a file suffix counts as a path; inline
    ring names such as ``Z/3`` have no suffix and are kept.

    Args:
        data: Request data to sanitize

    Returns:
        Dict[str, Any]: Sanitized data
    """
    sanitized = {}

    for key, value in data.items():
        if isinstance(value, Path):
            sanitized[key] = value.name
        elif isinstance(value, str) and _looks_like_path(value):
            sanitized[key] = Path(value).name
        elif isinstance(value, dict):
            sanitized[key] = _sanitize_details(value)
        elif isinstance(value, (str, int, float, bool)) or value is None:
            sanitized[key] = value
        else:
            sanitized[key] = str(value)

    return sanitized
