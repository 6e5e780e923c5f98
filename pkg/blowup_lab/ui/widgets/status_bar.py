"""
Status bar widget for the report viewer.
Shows the current table, the check verdicts and the results directory.
"""

from typing import Dict, Optional

from textual.app import ComposeResult
from textual.containers import Horizontal
from textual.widgets import Static


class StatusBar(Horizontal):
    """Status bar widget showing the view and the check verdicts."""

    DEFAULT_CSS = """
    StatusBar {
        dock: bottom;
        height: 1;
        background: $boost;
        color: $text;
    }

    StatusBar > Static {
        padding: 0 1;
    }

    StatusBar #checks {
        width: auto;
        color: $success;
    }

    StatusBar #checks.failed {
        color: $error;
    }
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._status = ""
        self.checks: Dict[str, bool] = {}

    def compose(self) -> ComposeResult:
        """Compose the status bar."""
        yield Static(id="status-mode")
        yield Static(id="checks")
        yield Static(id="status-dir")

    def update(self, status: str) -> None:
        """Update the status text."""
        self._status = status
        self.query_one("#status-mode", Static).update(status)

    def update_checks(self, checks: Optional[Dict[str, bool]]) -> None:
        """Show how many checks passed; the widget turns red when any failed."""
        self.checks = dict(checks or {})
        widget = self.query_one("#checks", Static)
        if not self.checks:
            widget.update("no checks")
            widget.set_class(False, "failed")
            return

        failed = [name for name, passed in self.checks.items() if not passed]
        text = f"checks {len(self.checks) - len(failed)}/{len(self.checks)}"
        if failed:
            text += " failed: " + ", ".join(failed)
        widget.update(text)
        widget.set_class(bool(failed), "failed")

    def update_directory(self, directory: str) -> None:
        """Update the results directory display."""
        self.query_one("#status-dir", Static).update(f"Dir: {directory}")
