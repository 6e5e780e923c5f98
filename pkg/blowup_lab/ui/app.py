"""
Report viewer for the blow-up laboratory.
Browses the run, sweep and energy tables of an output directory.
"""

from typing import Dict, List, Sequence, Tuple

from textual.app import App, ComposeResult
from textual.binding import Binding
from textual.reactive import reactive
from textual.widgets import DataTable, Footer, Header
from typing_extensions import TypeAlias

from blowup_lab.handlers.experiment_handler import ReportData
from blowup_lab.ui.widgets.status_bar import StatusBar

TableRows: TypeAlias = Tuple[Sequence[str], List[Sequence[str]]]


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.8g}"
    return str(value)


def collect_views(data: ReportData) -> Dict[str, TableRows]:
    """
    Tables available in the report data, keyed by view name.

    Returns:
        Mapping of view name to (columns, rows) in display order: sweep, energy, run.
    """
    views: Dict[str, TableRows] = {}
    if data.sweep_rows is not None:
        frame = data.sweep_rows
        views["sweep"] = (list(frame.columns), [[_fmt(v) for v in row] for row in frame.itertuples(index=False)])
    if data.energy_rows is not None:
        frame = data.energy_rows
        views["energy"] = (list(frame.columns), [[_fmt(v) for v in row] for row in frame.itertuples(index=False)])
    if data.run is not None:
        views["run"] = (["key", "value"], [[key, _fmt(value)] for key, value in sorted(data.run.items())])
    return views


class ReportViewer(App):
    """
    Report viewer application.
    Shows one results table at a time; ``t`` cycles through them.
    """

    TITLE = "blowup-lab report"

    current_view = reactive("")

    BINDINGS = [
        Binding("q", "quit", "Quit", key_display="Q"),
        Binding("t", "next_table", "Next table", key_display="T"),
    ]

    def __init__(self, data: ReportData, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.data = data
        self.views = collect_views(data)

    def compose(self) -> ComposeResult:
        yield Header()
        yield DataTable(id="rows", zebra_stripes=True)
        yield StatusBar()
        yield Footer()

    def on_mount(self) -> None:
        self.sub_title = str(self.data.directory)
        status_bar = self.query_one(StatusBar)
        status_bar.update_directory(str(self.data.directory))
        status_bar.update_checks(self.data.sweep_summary["checks"] if self.data.sweep_summary else None)
        if self.views:
            self.current_view = next(iter(self.views))
        else:
            status_bar.update("No tables")

    def watch_current_view(self, view: str) -> None:
        if not view:
            return
        columns, rows = self.views[view]
        table = self.query_one("#rows", DataTable)
        table.clear(columns=True)
        table.add_columns(*columns)
        for row in rows:
            table.add_row(*row)
        self.query_one(StatusBar).update(f"{view} ({len(rows)} rows)")

    def action_next_table(self) -> None:
        """Show the next available table."""
        names = list(self.views)
        if len(names) < 2:
            return
        self.current_view = names[(names.index(self.current_view) + 1) % len(names)]
