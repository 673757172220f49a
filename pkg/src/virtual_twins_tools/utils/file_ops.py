"""File operations utilities for writing result artifacts."""

import json
from pathlib import Path
from typing import Any, Union

from ..exceptions import OutputError


def ensure_directory_exists(directory: Union[str, Path]) -> Path:
    """
    Ensure an output directory exists, creating it if necessary.

    Args:
        directory: Path to the directory (string or Path object)

    Returns:
        Path: The directory path as a Path object

    Raises:
        OutputError: If the directory cannot be created

    Example:
        >>> ensure_directory_exists("results/trees")
        PosixPath('results/trees')
    """
    dir_path = Path(directory)
    try:
        dir_path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"Cannot create output directory {dir_path}: {e}", path=str(dir_path)) from e
    return dir_path


def write_file_safe(filepath: Union[str, Path], content: str, encoding: str = "utf-8") -> Path:
    """
    Write text to a file, creating parent directories if needed.

    Content is written with '\\n' line endings on every platform so that result
    tables are byte-identical across machines.

    Args:
        filepath: Path to the file to write (string or Path object)
        content: Text to write
        encoding: File encoding (default: utf-8)

    Returns:
        Path: The file path as a Path object

    Raises:
        OutputError: If the file cannot be written

    Example:
        >>> write_file_safe("results/results.md", "# Results")
        PosixPath('results/results.md')
    """
    file_path = Path(filepath)

    if file_path.parent != Path("."):
        ensure_directory_exists(file_path.parent)

    try:
        with open(file_path, "w", encoding=encoding, newline="\n") as handle:
            handle.write(content)
    except OSError as e:
        raise OutputError(f"Cannot write {file_path}: {e}", path=str(file_path)) from e

    return file_path


def write_json(filepath: Union[str, Path], payload: Any) -> Path:
    """
    Write a JSON document with stable key order and indentation.

    Args:
        filepath: Destination path
        payload: JSON-serializable object

    Returns:
        Path: The file path as a Path object
    """
    return write_file_safe(filepath, json.dumps(payload, indent=2) + "\n")
