"""
File handler for the blow-up laboratory.
Provides the output directory operations: CSV and JSON emission and reading back a run directory.
"""

import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from blowup_lab.core.integrator import Trajectory
from blowup_lab.utils.config import Config
from blowup_lab.utils.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

OUT_ENV = "BLOWUP_LAB_OUT"
CONFIG_NAME = "config.ini"


def _clean(value: Any) -> Any:
    """Make a value JSON-safe; NaN and infinities become null."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def resolve_output_dir(config: Config, override: Optional[str] = None) -> Path:
    """
    The output directory: ``--out`` over $BLOWUP_LAB_OUT over ``output.dir``.

    Args:
        config: The experiment configuration.
        override: Command-line value, if any.

    Returns:
        The directory path (not yet created).
    """
    if override:
        return Path(override)
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env)
    return Path(config.get("output.dir", "blowup_out"))


class OutputHandler:
    """
    Handles the files of one output directory.
    """

    def __init__(self, directory: Union[str, Path], formats: Sequence[str] = ("csv", "json")):
        """
        Initialize the output handler.

        Args:
            directory: The output directory; created on first write.
            formats: Enabled formats; writes in other formats are skipped.
        """
        self.current_directory = Path(directory)
        self.formats = set(formats)
        self.written_files: List[Path] = []

    def write_csv(self, filename: str, rows: Union[pd.DataFrame, Iterable[Dict[str, Any]]], columns: Sequence[str]) -> Optional[Path]:
        """
        Write rows as CSV with exactly the given columns.

        Args:
            filename: Name inside the output directory.
            rows: A DataFrame or an iterable of mappings.
            columns: Header, in order.

        Returns:
            The path written, or None when CSV output is disabled.
        """
        if "csv" not in self.formats:
            return None
        frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows), columns=list(columns))
        filepath = self._prepare(filename)
        frame.to_csv(filepath, columns=list(columns), index=False, float_format="%.17g")
        self._add_written_file(filepath)
        return filepath

    def write_json(self, filename: str, data: Dict[str, Any]) -> Optional[Path]:
        """
        Write a mapping as JSON.

        Args:
            filename: Name inside the output directory.
            data: The object; NaN and infinities are written as null.

        Returns:
            The path written, or None when JSON output is disabled.
        """
        if "json" not in self.formats:
            return None
        filepath = self._prepare(filename)
        filepath.write_text(json.dumps(_clean(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        self._add_written_file(filepath)
        return filepath

    def write_config(self, config: Config) -> Path:
        """Store the configuration next to the results so a run directory is self-describing."""
        filepath = self._prepare(CONFIG_NAME)
        config.save(filepath)
        self._add_written_file(filepath)
        return filepath

    def write_trajectory(self, traj: Trajectory) -> None:
        """Dump the series as ``trajectory.csv`` and every snapshot as ``snap_<index>.csv``."""
        self.write_csv(
            "trajectory.csv",
            pd.DataFrame({"t": traj.t, "u_max": traj.u_max, "argmax": traj.argmax}),
            ["t", "u_max", "argmax"],
        )
        for index, snap in enumerate(traj.snapshots):
            self.write_csv(
                f"snap_{index:03d}.csv",
                pd.DataFrame({"x": snap.grid.nodes, "u": snap.values}),
                ["x", "u"],
            )

    def read_json(self, filename: str) -> Dict[str, Any]:
        """
        Read a JSON file of the output directory.

        Raises:
            InvalidArgumentError: When the file is missing.
        """
        filepath = self._get_filepath(filename)
        if not filepath.exists():
            raise InvalidArgumentError(f"{filepath} not found; run the producing command first")
        return json.loads(filepath.read_text(encoding="utf-8"))

    def read_csv(self, filename: str) -> pd.DataFrame:
        filepath = self._get_filepath(filename)
        if not filepath.exists():
            raise InvalidArgumentError(f"{filepath} not found; run the producing command first")
        return pd.read_csv(filepath, float_precision="round_trip")

    def exists(self, filename: str) -> bool:
        return self._get_filepath(filename).exists()

    def list_files(self) -> List[Dict[str, Any]]:
        """
        List the files of the output directory.

        Returns:
            A list of dictionaries containing file information.
        """
        if not self.current_directory.is_dir():
            return []
        return [
            {"name": item.name, "path": str(item), "size": item.stat().st_size}
            for item in sorted(self.current_directory.iterdir())
            if item.is_file()
        ]

    def _prepare(self, filename: str) -> Path:
        filepath = self._get_filepath(filename)
        filepath.parent.mkdir(parents=True, exist_ok=True)
        return filepath

    def _add_written_file(self, filepath: Path) -> None:
        if filepath not in self.written_files:
            self.written_files.append(filepath)
        logger.debug("wrote %s", filepath)

    def _get_filepath(self, filename: str) -> Path:
        """
        Get the full path of a file.

        Args:
            filename: The name of the file.

        Returns:
            The path inside the output directory, or the name itself when absolute.
        """
        path = Path(filename)
        return path if path.is_absolute() else self.current_directory / path
