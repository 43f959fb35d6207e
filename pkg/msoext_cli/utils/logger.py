"""
Logging system for the msoext solver toolkit.

This module provides:
- File logging with rotation, one file per solver component
- Crash logging drained by a background monitor thread
- An audit trail of accepting pre-evaluations, shapes and sigma tables
- Command execution records
"""

import logging
import logging.handlers
import queue
import sys
import threading
import traceback
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional


class SolverLogger:
    """Logging system for msoext runs."""

    def __init__(self, config_dir: str, log_level: str = "INFO"):
        """
        Initialize the logging system.

        Args:
            config_dir: Configuration directory where logs will be stored
            log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        """
        self.config_dir = Path(config_dir)
        self.log_level = getattr(logging, log_level.upper())
        self.log_dir = self.config_dir / "logs"
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self._handlers: List[logging.Handler] = []

        self._setup_loggers()
        self._setup_crash_logging()

        self.error_count = 0
        self.crash_count = 0
        self.audit_count = 0

        self.error_queue: "queue.Queue[Optional[Dict[str, Any]]]" = queue.Queue()
        self._start_error_monitor()

    def _setup_loggers(self):
        """Setup all loggers with proper handlers."""
        self.app_logger = logging.getLogger("msoext_cli")
        self.nd_logger = logging.getLogger("msoext_cli.nd")
        self.tw_logger = logging.getLogger("msoext_cli.tw")
        self.csp_logger = logging.getLogger("msoext_cli.csp")
        self.command_logger = logging.getLogger("msoext_cli.commands")
        self.audit_logger = logging.getLogger("msoext_cli.audit")
        for lg in (self.app_logger, self.nd_logger, self.tw_logger,
                   self.csp_logger, self.command_logger, self.audit_logger):
            lg.setLevel(self.log_level)

        self._setup_file_handlers()
        self._setup_console_handlers()

    def _rotating(self, filename: str, max_bytes: int, backup_count: int) -> logging.Handler:
        handler = logging.handlers.RotatingFileHandler(
            self.log_dir / filename,
            maxBytes=max_bytes,
            backupCount=backup_count
        )
        handler.setFormatter(self._get_formatter())
        self._handlers.append(handler)
        return handler

    def _setup_file_handlers(self):
        """Setup file handlers with rotation."""
        self.app_logger.addHandler(self._rotating("msoext.log", 10*1024*1024, 5))
        self.nd_logger.addHandler(self._rotating("nd.log", 5*1024*1024, 3))
        self.tw_logger.addHandler(self._rotating("tw.log", 5*1024*1024, 3))
        self.csp_logger.addHandler(self._rotating("csp.log", 5*1024*1024, 3))
        self.command_logger.addHandler(self._rotating("commands.log", 5*1024*1024, 3))
        self.audit_logger.addHandler(self._rotating("audit.log", 2*1024*1024, 3))

    def _setup_console_handlers(self):
        """Console handler on stderr; stdout carries the JSON report."""
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(self._get_console_formatter())
        console_handler.setLevel(logging.WARNING if self.log_level > logging.DEBUG else logging.DEBUG)
        self._handlers.append(console_handler)
        self.app_logger.addHandler(console_handler)

    def _get_formatter(self):
        """Get detailed formatter for file logging."""
        return logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s'
        )

    def _get_console_formatter(self):
        """Get simple formatter for console output."""
        return logging.Formatter('%(levelname)s: %(message)s')

    def _setup_crash_logging(self):
        """Setup crash logging system."""
        self.crash_logger = logging.getLogger("msoext_cli.crash")
        self.crash_logger.setLevel(logging.ERROR)

        # Crash log handler (no rotation for crash logs)
        crash_handler = logging.FileHandler(self.log_dir / "crashes.log")
        crash_handler.setFormatter(self._get_formatter())
        self._handlers.append(crash_handler)
        self.crash_logger.addHandler(crash_handler)

    def _start_error_monitor(self):
        """Start background error monitoring thread."""
        def error_monitor():
            while True:
                try:
                    error_info = self.error_queue.get(timeout=1)
                    if error_info is None:  # Shutdown signal
                        break
                    self._process_error(error_info)
                except queue.Empty:
                    continue
                except Exception as e:
                    self.crash_logger.error(f"Error in error monitor: {str(e)}")

        self.error_monitor_thread = threading.Thread(target=error_monitor, daemon=True)
        self.error_monitor_thread.start()

    def _process_error(self, error_info: Dict[str, Any]):
        """Process and categorize errors."""
        error_msg = error_info.get('message', '')
        error_traceback = error_info.get('traceback', '')
        context = error_info.get('context', '')

        if error_info.get('type') == 'crash':
            self.crash_count += 1
            self.crash_logger.error(
                f"CRASH - {error_msg}\n"
                f"Context: {context}\n"
                f"Traceback: {error_traceback}"
            )
        else:
            self.error_count += 1
            self.app_logger.error(f"ERROR - {error_msg} ({context})")

    def log_crash(self, error: Exception, context: str = ""):
        """Log a crash with full context."""
        self.error_queue.put({
            'type': 'crash',
            'message': str(error),
            'traceback': traceback.format_exc(),
            'context': context,
            'timestamp': datetime.now().isoformat()
        })

    def log_error(self, error: Exception, context: str = ""):
        """Log a handled error (bad input, resource limit)."""
        self.error_queue.put({
            'type': 'error',
            'message': f"{type(error).__name__}: {error}",
            'context': context,
            'timestamp': datetime.now().isoformat()
        })

    def log_audit(self, message: str):
        """Record an accepting certificate (pre-evaluation, shape, sigma) or a discrepancy."""
        self.audit_count += 1
        self.audit_logger.info(message)

    def log_command_execution(self, command: str, args: List[str], success: bool,
                              duration: float, verdict: str = ""):
        """Log command execution details."""
        status = "SUCCESS" if success else "FAILED"
        self.command_logger.info(
            f"Command: {command} {args} - {status} "
            f"(duration: {duration:.2f}s, verdict: {verdict or '-'})"
        )

    def get_log_summary(self) -> Dict[str, Any]:
        """Get a summary of all logging activity."""
        return {
            'error_count': self.error_count,
            'crash_count': self.crash_count,
            'audit_count': self.audit_count,
            'log_files': {
                'main': str(self.log_dir / "msoext.log"),
                'nd': str(self.log_dir / "nd.log"),
                'tw': str(self.log_dir / "tw.log"),
                'csp': str(self.log_dir / "csp.log"),
                'commands': str(self.log_dir / "commands.log"),
                'audit': str(self.log_dir / "audit.log"),
                'crashes': str(self.log_dir / "crashes.log"),
            },
        }

    def cleanup(self):
        """Cleanup logging resources."""
        self.error_queue.put(None)
        if hasattr(self, 'error_monitor_thread'):
            self.error_monitor_thread.join(timeout=5)

        summary = self.get_log_summary()
        self.app_logger.debug(f"Logging session ended. Summary: {summary}")

        # Detach handlers so repeated runs in one process do not stack them
        for lg in (self.app_logger, self.nd_logger, self.tw_logger, self.csp_logger,
                   self.command_logger, self.audit_logger, self.crash_logger):
            for handler in list(lg.handlers):
                if handler in self._handlers:
                    lg.removeHandler(handler)
        for handler in self._handlers:
            handler.close()
        self._handlers.clear()


# Global logger instance
_global_logger: Optional[SolverLogger] = None


def get_logger() -> SolverLogger:
    """Get the global logger instance."""
    if _global_logger is None:
        raise RuntimeError("Logger not initialized. Call setup_logging() first.")
    return _global_logger


def setup_logging(config_dir: str, log_level: str = "INFO") -> SolverLogger:
    """Setup the global logging system."""
    global _global_logger
    _global_logger = SolverLogger(config_dir, log_level)
    return _global_logger


def log_crash(error: Exception, context: str = ""):
    """Log a crash using the global logger."""
    get_logger().log_crash(error, context)


def log_audit(message: str):
    """Audit through the global logger when one is set up, else the module logger."""
    if _global_logger is None:
        logging.getLogger("msoext_cli.audit").info(message)
    else:
        _global_logger.log_audit(message)
