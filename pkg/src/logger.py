"""Operation logging for experiment runs."""

import hashlib
import json
import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Any

import numpy as np

LOGGER_NAME = "SphereRigidity"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _console_logger() -> logging.Logger:
    root = logging.getLogger(LOGGER_NAME)
    if not root.handlers:
        console = logging.StreamHandler()
        console.setLevel(logging.WARNING)
        console.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(console)
    return root


class ExperimentLogger:
    """
    Operation log of one output directory.

    Every operation becomes one JSONL record in ``operations_<timestamp>.jsonl``.
    Human-readable lines go to ``sphere_rigidity.log`` through a child of the
    "SphereRigidity" logger owned by this directory, so two runs writing to
    different output roots never share a text log. Warnings and errors also
    reach the console handler on the parent logger.
    """

    def __init__(self, log_dir: Path, level: int = logging.INFO):
        self.log_dir = Path(log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)

        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.operation_log = self.log_dir / f"operations_{timestamp}.jsonl"

        _console_logger()
        key = hashlib.sha1(str(self.log_dir.resolve()).encode()).hexdigest()[:10]
        self.logger = logging.getLogger(f"{LOGGER_NAME}.{key}")
        self.logger.setLevel(level)
        if not self.logger.handlers:
            file_handler = logging.FileHandler(self.log_dir / "sphere_rigidity.log", encoding="utf-8")
            file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
            self.logger.addHandler(file_handler)

    def log_operation(
        self,
        operation_type: str,
        params: dict[str, Any],
        result: Any = None,
        error: str | None = None,
        elapsed: float | None = None,
    ) -> None:
        log_entry = {
            "timestamp": datetime.now().isoformat(),
            "operation": operation_type,
            "params": self._serialize_result(params),
            "result": self._serialize_result(result),
            "error": error,
            "success": error is None,
        }
        if elapsed is not None:
            log_entry["elapsed_s"] = round(elapsed, 6)

        with open(self.operation_log, "a", encoding="utf-8") as f:
            f.write(json.dumps(log_entry, ensure_ascii=False) + "\n")

        timing = f" in {elapsed:.3f}s" if elapsed is not None else ""
        if error:
            self.logger.error(f"{operation_type} failed{timing}: {error}")
        else:
            self.logger.info(f"{operation_type} completed{timing}")

    @contextmanager
    def timed(self, operation_type: str, params: dict[str, Any]) -> Iterator[dict[str, Any]]:
        """Log one operation with its wall time.

        The caller fills the yielded dict with the operation's result. An
        exception is logged as the operation's error and re-raised.
        """
        result: dict[str, Any] = {}
        start = time.perf_counter()
        try:
            yield result
        except Exception as e:
            self.log_operation(operation_type, params, result or None, str(e), time.perf_counter() - start)
            raise
        self.log_operation(operation_type, params, result, elapsed=time.perf_counter() - start)

    def _serialize_result(self, result: Any) -> Any:
        """Convert numpy and path values into JSON-compatible ones"""
        if result is None or isinstance(result, str | bool | int | float):
            return result
        if isinstance(result, np.generic):
            return result.item()
        if isinstance(result, np.ndarray):
            return result.tolist()
        if isinstance(result, dict):
            return {str(k): self._serialize_result(v) for k, v in result.items()}
        if isinstance(result, list | tuple):
            return [self._serialize_result(v) for v in result]
        if isinstance(result, Path):
            return str(result)
        return str(result)
