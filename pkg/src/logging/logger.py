"""
Logger Module
Handles application logging with file and console output
"""

import logging
import sys
from pathlib import Path
from typing import Dict, Optional


class AppLogger:
    """Application logger with file and console handlers"""

    def __init__(self, log_file: Optional[Path] = None, verbose: bool = False):
        self._logger = logging.getLogger("StereoNav")
        self._logger.setLevel(logging.DEBUG)

        # Clear existing handlers
        self._logger.handlers.clear()

        # Console handler; stdout belongs to subcommand results
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(logging.DEBUG if verbose else logging.INFO)
        console_format = logging.Formatter('[%(levelname)s] %(message)s')
        console_handler.setFormatter(console_format)
        self._logger.addHandler(console_handler)

        # File handler
        if log_file:
            log_file.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_file, encoding='utf-8')
            file_handler.setLevel(logging.DEBUG)
            file_format = logging.Formatter(
                '[%(asctime)s.%(msecs)03d] [%(levelname)s] %(message)s',
                datefmt='%Y-%m-%d %H:%M:%S'
            )
            file_handler.setFormatter(file_format)
            self._logger.addHandler(file_handler)

        # warnings.warn(...) from the pipeline ends up in the same handlers
        logging.captureWarnings(True)
        warnings_logger = logging.getLogger("py.warnings")
        warnings_logger.handlers = list(self._logger.handlers)
        warnings_logger.propagate = False

    def info(self, message: str) -> None:
        """Log info message"""
        self._logger.info(message)

    def debug(self, message: str) -> None:
        """Log debug message"""
        self._logger.debug(message)

    def warning(self, message: str) -> None:
        """Log warning message"""
        self._logger.warning(message)

    def error(self, message: str) -> None:
        """Log error message"""
        self._logger.error(message)

    def log_stage(self, stage: str, detail: str = "") -> None:
        """Log pipeline stage"""
        msg = f"[STAGE] {stage}"
        if detail:
            msg += f" - {detail}"
        self.info(msg)

    def log_timing(self, stage: str, elapsed_ms: float) -> None:
        """Log stage timing"""
        self.debug(f"[TIMING] {stage} {elapsed_ms:.1f} ms")

    def log_config(self, key: str, value: object) -> None:
        """Log effective configuration value"""
        self.debug(f"[CONFIG] {key} = {value}")

    def log_decision(self, t: float, vision: Optional[str], final: str) -> None:
        """Log navigation decision; vision is None on ticks without a frame"""
        if vision is None:
            log = self.info if final == "Stop" else self.debug
            log(f"[DECISION] t={t:.1f}s {final} (no frame)")
        elif vision == final:
            self.debug(f"[DECISION] t={t:.1f}s {final}")
        else:
            self.info(f"[DECISION] t={t:.1f}s {vision} overridden -> {final}")

    def log_collision(self, t: float, x: float, y: float) -> None:
        """Log body/box contact"""
        self.error(f"[COLLISION] t={t:.1f}s at ({x:.3f}, {y:.3f})")

    def log_summary(self, ticks: int, collisions: int, decisions: Dict[str, int]) -> None:
        """Log simulation summary"""
        counts = ", ".join(f"{k}: {v}" for k, v in sorted(decisions.items()))
        self.info(f"[SUMMARY] ticks: {ticks}, collisions: {collisions}, {counts}")

    def close(self) -> None:
        """Close all handlers and release file locks"""
        for handler in self._logger.handlers[:]:
            handler.close()
            self._logger.removeHandler(handler)
        logging.getLogger("py.warnings").handlers = []
        logging.captureWarnings(False)
