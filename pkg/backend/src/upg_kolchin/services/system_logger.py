# services/system_logger.py - Structured logging for the UPG toolkit

import json
import logging
import sys
import time
import traceback
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from threading import Lock
from typing import Any, Dict, List, Optional, TextIO


class LogLevel(Enum):
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARN = "WARN"
    ERROR = "ERROR"
    PERFORMANCE = "PERFORMANCE"


_PYTHON_LEVELS = {
    LogLevel.DEBUG: logging.DEBUG,
    LogLevel.INFO: logging.INFO,
    LogLevel.WARN: logging.WARNING,
    LogLevel.ERROR: logging.ERROR,
    LogLevel.PERFORMANCE: logging.DEBUG,
}


class LogCategory(Enum):
    """One category per algorithmic area"""
    SYSTEM = "system"
    CONFIG = "config"
    CLI = "cli"
    WORDS = "words"
    SUBGROUPS = "subgroups"
    AUTOMORPHISMS = "automorphisms"
    GRAPHS = "graphs"
    TRIANGULAR = "triangular"
    FREE_FACTORS = "free_factors"
    TREES = "trees"
    GROWTH = "growth"
    DRIVER = "driver"
    ASSEMBLY = "assembly"


@dataclass
class LogEntry:
    """Structured payload attached to every record"""
    timestamp: str
    level: str
    category: str
    component: str
    message: str
    details: Dict[str, Any]
    duration: Optional[float] = None
    error_details: Optional[Dict] = None


@dataclass
class SearchTiming:
    """Wall time of one bounded search or pipeline stage"""
    category: LogCategory
    operation: str
    duration: float
    success: bool
    error: Optional[str] = None


ROOT_LOGGER_NAME = 'upg_kolchin'


class SystemLogger:
    """Structured logger shared by all toolkit components.

    Handlers write to stderr or a file. Standard output is reserved for
    reports.
    """

    def __init__(self, level: str = 'WARNING', json_logs: bool = False,
                 log_file: Optional[str] = None):
        self._lock = Lock()
        self.timings: List[SearchTiming] = []
        self.configure(level, json_logs, log_file)

    def configure(self, level: str = 'WARNING', json_logs: bool = False,
                  log_file: Optional[str] = None, stream: Optional[TextIO] = None):
        """(Re)build the handlers of the package logger tree"""
        self.logger = logging.getLogger(ROOT_LOGGER_NAME)
        self.logger.setLevel(logging.DEBUG)
        self.logger.propagate = False
        for handler in self.logger.handlers:
            handler.close()
        self.logger.handlers.clear()

        stream = stream or sys.stderr
        console = logging.StreamHandler(stream)
        console.setLevel(getattr(logging, level.upper(), logging.WARNING))
        if json_logs:
            console.setFormatter(JsonFormatter())
        else:
            console.setFormatter(ConsoleFormatter(color=_is_tty(stream)))
        self.logger.addHandler(console)

        if log_file:
            path = Path(log_file)
            path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(path)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(JsonFormatter())
            self.logger.addHandler(file_handler)

    def log(self, level: LogLevel, category: LogCategory, component: str,
            message: str, details: Dict[str, Any] = None, **kwargs):
        try:
            with self._lock:
                entry = LogEntry(
                    timestamp=datetime.now(timezone.utc).isoformat(),
                    level=level.value,
                    category=category.value,
                    component=component,
                    message=message,
                    details=details or {},
                    duration=kwargs.get('duration'),
                    error_details=kwargs.get('error_details'),
                )
                extra = {'log_entry': asdict(entry), 'category': category.value,
                         'component': component}
                self.logger.log(_PYTHON_LEVELS[level], message, extra=extra)
        except Exception as e:
            # Logging must never break a computation
            print(f"Logging error: {e}", file=sys.stderr)

    def info(self, category: LogCategory, component: str, message: str, **kwargs):
        self.log(LogLevel.INFO, category, component, message, **kwargs)

    def debug(self, category: LogCategory, component: str, message: str, **kwargs):
        self.log(LogLevel.DEBUG, category, component, message, **kwargs)

    def warning(self, category: LogCategory, component: str, message: str, **kwargs):
        self.log(LogLevel.WARN, category, component, message, **kwargs)

    def error(self, category: LogCategory, component: str, message: str,
              error: Exception = None, **kwargs):
        """Error with the exception type, message and traceback attached"""
        error_details = None
        if error is not None:
            error_details = {
                'exception_type': type(error).__name__,
                'exception_message': str(error),
                'traceback': traceback.format_exc(),
            }
        self.log(LogLevel.ERROR, category, component, message,
                 error_details=error_details, **kwargs)

    def timed(self, category: LogCategory, operation: str) -> 'TimedSection':
        return TimedSection(self, category, operation)

    def record_timing(self, timing: SearchTiming):
        with self._lock:
            self.timings.append(timing)
        self.log(LogLevel.PERFORMANCE, timing.category, timing.operation,
                 f"{timing.operation} took {timing.duration:.3f}s",
                 details={'success': timing.success, 'error': timing.error},
                 duration=timing.duration)


class TimedSection:
    """``with logger.timed(category, operation):`` records a SearchTiming"""

    def __init__(self, logger: SystemLogger, category: LogCategory, operation: str):
        self.logger = logger
        self.category = category
        self.operation = operation
        self.start = 0.0

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.logger.record_timing(SearchTiming(
            category=self.category,
            operation=self.operation,
            duration=time.perf_counter() - self.start,
            success=exc_type is None,
            error=type(exc_val).__name__ if exc_val is not None else None,
        ))
        return False


def _is_tty(stream) -> bool:
    try:
        return stream.isatty()
    except (AttributeError, ValueError):
        return False


class JsonFormatter(logging.Formatter):
    """One JSON object per line; the structured entry wins over record fields"""

    def format(self, record):
        data = {
            'timestamp': datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            'level': record.levelname,
            'message': record.getMessage(),
            'logger': record.name,
        }
        entry = getattr(record, 'log_entry', None)
        if entry:
            data.update({k: v for k, v in entry.items() if v is not None})
        if record.exc_info:
            data['exception'] = self.formatException(record.exc_info)
        return json.dumps(data, default=str, sort_keys=True)


class ConsoleFormatter(logging.Formatter):
    """``12:00:01 INFO    driver/bounce  generator 1: EnlargeFFS``"""

    COLORS = {
        'DEBUG': '\033[36m',
        'INFO': '\033[32m',
        'WARNING': '\033[33m',
        'ERROR': '\033[31m',
        'CRITICAL': '\033[35m',
    }
    RESET = '\033[0m'

    def __init__(self, color: bool = False):
        super().__init__()
        self.color = color

    def format(self, record):
        timestamp = datetime.fromtimestamp(record.created).strftime('%H:%M:%S')
        source = f"{getattr(record, 'category', 'general')}/{getattr(record, 'component', record.module)}"
        line = f"{timestamp} {record.levelname:<7} {source:<14} {record.getMessage()}"
        if record.exc_info:
            line += f"\n{self.formatException(record.exc_info)}"
        if self.color and record.levelname in self.COLORS:
            return f"{self.COLORS[record.levelname]}{line}{self.RESET}"
        return line


_system_logger: Optional[SystemLogger] = None


def get_logger() -> SystemLogger:
    global _system_logger
    if _system_logger is None:
        _system_logger = SystemLogger()
    return _system_logger


def setup_logging(level: str = 'WARNING', json_logs: bool = False,
                  log_file: Optional[str] = None) -> SystemLogger:
    """Configure the global logger from CLI options or settings"""
    logger = get_logger()
    logger.configure(level, json_logs, log_file)
    return logger


def log_bounce_step(generator: int, outcome: str, details: Dict = None):
    """One step of the bouncing sequence, at INFO"""
    get_logger().info(LogCategory.DRIVER, 'bounce', f"generator {generator}: {outcome}",
                      details=details or {})


def log_search(category: LogCategory, component: str, message: str, **details):
    """Debug-level trace for bounded searches"""
    get_logger().debug(category, component, message, details=details)
