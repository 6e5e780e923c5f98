"""
Color definitions for the blow-up laboratory.
Shared by the console report and the report viewer.
"""

from typing import Dict

COLORS: Dict[str, str] = {
    "primary": "#3498db",
    "surface": "#2a2a3c",
    "border": "#3c3c4c",
    "text": "#ecf0f1",
    "text-muted": "#95a5a6",

    # Verdicts
    "success": "#2ecc71",
    "warning": "#f39c12",
    "error": "#e74c3c",
    "info": "#3498db",
}

THEME_COLORS: Dict[str, str] = {
    "status.background": COLORS["surface"],
    "status.text": COLORS["text"],
    "check.pass": COLORS["success"],
    "check.fail": COLORS["error"],
    "check.none": COLORS["text-muted"],
    "table.header": COLORS["primary"],
}


def get_color(name: str) -> str:
    """
    Get a color by name.

    Args:
        name: A theme key such as ``check.pass`` or a palette key.

    Returns:
        The color value.
    """
    return THEME_COLORS.get(name, COLORS.get(name, "#ffffff"))
