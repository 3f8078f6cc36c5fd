#!/usr/bin/env python3
"""
Error Handling for the UPG toolkit

Provides:
- A single exception hierarchy for every analytic and certificate failure
- Error classification (category, severity, CLI exit code)
- Error tracking and reporting
- A CLI decorator that turns failures into structured reports
"""

import json
import threading
import traceback
from collections import defaultdict, deque
from datetime import datetime, timedelta
from enum import Enum
from functools import wraps
from typing import Any, Callable, Dict, Optional

import click
import typer

try:  # typer >= 0.26 vendors its own click; use the context stack it pushes
    from typer._click.globals import get_current_context
except ImportError:
    get_current_context = click.get_current_context

from ..services.system_logger import LogCategory, get_logger


class ErrorSeverity(Enum):
    """Error severity levels"""
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class ErrorCategory(Enum):
    """Error categories for classification"""
    INPUT = "input"              # malformed input, usage error
    CERTIFICATE = "certificate"  # a supplied certificate does not check
    ANALYTIC = "analytic"        # a bounded search or window was exhausted
    INTERNAL = "internal"        # an invariant that should always hold failed
    UNKNOWN = "unknown"


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ANALYTIC = 2


class KolchinError(Exception):
    """Base class for all structured failures raised by the toolkit."""

    category: ErrorCategory = ErrorCategory.ANALYTIC
    severity: ErrorSeverity = ErrorSeverity.MEDIUM

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    @property
    def code(self) -> str:
        return type(self).__name__

    @property
    def exit_code(self) -> int:
        return EXIT_USAGE if self.category == ErrorCategory.INPUT else EXIT_ANALYTIC

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error': self.code,
            'category': self.category.value,
            'severity': self.severity.value,
            'message': self.message,
            'details': _jsonable(self.details),
        }


def _jsonable(value: Any) -> Any:
    """Coerce detail payloads (words, fractions, tuples) into JSON values."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    return str(value)


# Input errors

class InputValidationError(KolchinError):
    category = ErrorCategory.INPUT
    severity = ErrorSeverity.LOW


class UnknownGeneratorError(KolchinError):
    category = ErrorCategory.INPUT
    severity = ErrorSeverity.LOW


class NonConcatenablePath(KolchinError):
    category = ErrorCategory.INPUT
    severity = ErrorSeverity.LOW


class NotClosedPath(KolchinError):
    category = ErrorCategory.INPUT
    severity = ErrorSeverity.LOW


class HostMismatch(KolchinError):
    category = ErrorCategory.INPUT
    severity = ErrorSeverity.LOW


# Certificate errors

class CompositionNotIdentity(KolchinError):
    category = ErrorCategory.CERTIFICATE


class NotABasis(KolchinError):
    category = ErrorCategory.CERTIFICATE


class NotUnipotent(KolchinError):
    category = ErrorCategory.CERTIFICATE


class NotUnipotentOnHomology(KolchinError):
    category = ErrorCategory.CERTIFICATE


class PrefixSuffixNotLower(KolchinError):
    category = ErrorCategory.CERTIFICATE


class NotClosed(KolchinError):
    category = ErrorCategory.CERTIFICATE


class VertexMoved(KolchinError):
    category = ErrorCategory.CERTIFICATE


class NotUR(KolchinError):
    category = ErrorCategory.CERTIFICATE


class ConjugatorMissing(KolchinError):
    category = ErrorCategory.CERTIFICATE


class RestrictionNotCertified(KolchinError):
    category = ErrorCategory.CERTIFICATE


class FewerThanTwoVertexGroups(KolchinError):
    category = ErrorCategory.INPUT
    severity = ErrorSeverity.LOW


# Analytic errors (bounded searches)

class NoSplitWithinBound(KolchinError):
    pass


class SupportIsWholeGroup(KolchinError):
    severity = ErrorSeverity.LOW


class NoPolynomialWithinWindow(KolchinError):
    pass


class HypothesisUnverified(KolchinError):
    pass


class SupportSearchExhausted(KolchinError):
    severity = ErrorSeverity.HIGH


class WindowExhausted(KolchinError):
    severity = ErrorSeverity.HIGH


class RealizationFailed(KolchinError):
    severity = ErrorSeverity.HIGH


# Internal errors

class WordNotRealizable(KolchinError):
    category = ErrorCategory.INTERNAL
    severity = ErrorSeverity.CRITICAL


class InvarianceViolation(KolchinError):
    category = ErrorCategory.INTERNAL
    severity = ErrorSeverity.HIGH


class ErrorTracker:
    """Track and analyze raised errors"""

    def __init__(self):
        self.errors = deque(maxlen=1000)  # Keep last 1000 errors
        self.error_counts = defaultdict(int)
        self.lock = threading.Lock()

    def record_error(self, error: Exception, category: ErrorCategory,
                     severity: ErrorSeverity, context: Dict[str, Any] = None):
        """Record an error occurrence"""
        with self.lock:
            error_data = {
                'timestamp': datetime.utcnow().isoformat(),
                'error_type': type(error).__name__,
                'error_message': str(error),
                'category': category.value,
                'severity': severity.value,
                'context': context or {},
                'traceback': traceback.format_exc()
            }
            self.errors.append(error_data)
            self.error_counts[f"{category.value}:{type(error).__name__}"] += 1

    def get_error_summary(self, hours: int = 24) -> Dict[str, Any]:
        """Get error summary for the specified time period"""
        cutoff = datetime.utcnow() - timedelta(hours=hours)

        recent_errors = [
            error for error in self.errors
            if datetime.fromisoformat(error['timestamp']) > cutoff
        ]

        by_category = defaultdict(int)
        by_severity = defaultdict(int)
        by_type = defaultdict(int)

        for error in recent_errors:
            by_category[error['category']] += 1
            by_severity[error['severity']] += 1
            by_type[error['error_type']] += 1

        return {
            'total_errors': len(recent_errors),
            'by_category': dict(by_category),
            'by_severity': dict(by_severity),
            'by_type': dict(by_type),
            'recent_errors': recent_errors[-10:] if recent_errors else []
        }

    def clear(self):
        with self.lock:
            self.errors.clear()
            self.error_counts.clear()


# Global error tracker instance
error_tracker = ErrorTracker()


def failure_report(error: KolchinError, command: str) -> Dict[str, Any]:
    """Structured failure report embedded in CLI output."""
    return {
        'schema': '1',
        'command': command,
        'status': 'failed',
        'failure': error.to_dict(),
    }


def handle_cli_errors(command: str):
    """Decorator converting KolchinError into a failure report and exit code.

    The output format is read from the command context (``ctx.obj["format"]``).
    """
    def decorator(func: Callable):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except KolchinError as e:
                error_tracker.record_error(e, e.category, e.severity, {'command': command})
                if e.category == ErrorCategory.INTERNAL:
                    get_logger().error(LogCategory.CLI, command, f"{e.code}: {e.message}", error=e)
                else:
                    get_logger().warning(LogCategory.CLI, command, f"{e.code}: {e.message}",
                                         details=e.to_dict()["details"])
                ctx = get_current_context(silent=True)
                fmt = 'json'
                if ctx is not None and isinstance(ctx.obj, dict):
                    fmt = ctx.obj.get('format', 'json')
                report = failure_report(e, command)
                if fmt == 'text':
                    typer.echo(f"{command}: FAILED {e.code}: {e.message}")
                    for key, value in report['failure']['details'].items():
                        typer.echo(f"  {key}: {value}")
                else:
                    typer.echo(json.dumps(report, sort_keys=True, indent=2))
                raise typer.Exit(e.exit_code)
        return wrapper
    return decorator


def safe_execute(func: Callable, fallback_result=None,
                 category: ErrorCategory = ErrorCategory.UNKNOWN) -> Optional[Any]:
    """Run an optional diagnostic; failures are recorded and swallowed."""
    try:
        return func()
    except KolchinError as e:
        error_tracker.record_error(e, e.category, ErrorSeverity.LOW)
        get_logger().debug(LogCategory.SYSTEM, "safe_execute", f"optional check skipped: {e.code}")
        return fallback_result
    except Exception as e:
        error_tracker.record_error(e, category, ErrorSeverity.MEDIUM)
        get_logger().error(LogCategory.SYSTEM, "safe_execute", "optional check crashed", error=e)
        return fallback_result
