"""CSV writers and readers for run artifacts.

Files are plain comma-separated text with a header row, ``.`` decimal
separator, LF line endings, and fixed column orders. Floats are written
with ``repr`` (shortest lossless form) so that identical runs produce
byte-identical files; absent values (unfinished arrivals, no-data edges,
undefined percentages) are written as ``NA``.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

from .metrics import PercentChangeRow, SummaryRow

if TYPE_CHECKING:
    from .engine import SimulationOutput

NA = "NA"


def _num(value: float | int | None) -> str:
    if value is None:
        return NA
    if isinstance(value, int):
        return str(value)
    return repr(value)


def _pct(value: float | None) -> str:
    return NA if value is None else f"{value:.2f}"


def _write(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", newline="\n")


def write_trips_csv(path: str | Path, output: SimulationOutput) -> None:
    lines = ["vehicle_id,class,depart,origin,destination,insert,arrival,travel_time,distance,finished"]
    for t in output.trips:
        travel = None if t.arrival_time is None else t.arrival_time - t.depart_time
        lines.append(
            ",".join(
                [
                    str(t.vehicle_id),
                    t.vehicle_class.value,
                    _num(t.depart_time),
                    str(t.origin),
                    str(t.destination),
                    _num(t.insert_time),
                    _num(t.arrival_time),
                    _num(travel),
                    _num(t.distance),
                    "1" if t.finished else "0",
                ]
            )
        )
    _write(Path(path), lines)


def write_edge_speeds_csv(path: str | Path, output: SimulationOutput) -> None:
    network = output.network
    lines = ["edge,from_x,from_y,to_x,to_y,mean_speed,samples"]
    for edge in sorted(network.edges, key=lambda e: e.id):
        a = network.node(edge.from_node)
        b = network.node(edge.to_node)
        mean = output.edge_speeds.mean(edge.id)
        lines.append(
            ",".join(
                [
                    str(edge.id),
                    _num(a.x),
                    _num(a.y),
                    _num(b.x),
                    _num(b.y),
                    _num(mean),
                    str(output.edge_speeds.count(edge.id)),
                ]
            )
        )
    _write(Path(path), lines)


def write_summary_csv(path: str | Path, summary: SummaryRow) -> None:
    lines = [
        "mean_travel_time,fuel,co2,ttc_events,pet_events,finished,unfinished",
        ",".join(
            [
                _num(summary.mean_travel_time),
                _num(summary.fuel),
                _num(summary.co2),
                str(summary.ttc_events),
                str(summary.pet_events),
                str(summary.finished),
                str(summary.unfinished),
            ]
        ),
    ]
    _write(Path(path), lines)


def read_summary_csv(path: str | Path) -> SummaryRow:
    lines = Path(path).read_text().splitlines()
    fields = lines[1].split(",")
    return SummaryRow(
        mean_travel_time=None if fields[0] == NA else float(fields[0]),
        fuel=float(fields[1]),
        co2=float(fields[2]),
        ttc_events=int(fields[3]),
        pet_events=int(fields[4]),
        finished=int(fields[5]),
        unfinished=int(fields[6]),
    )


def write_safety_csv(path: str | Path, output: SimulationOutput) -> None:
    lines = ["time,kind,vehicle_id,other_id,class,value"]
    for event in output.safety_events:
        lines.append(
            ",".join(
                [
                    _num(event.time),
                    event.kind,
                    str(event.vehicle_id),
                    str(event.other_id),
                    event.vehicle_class.value,
                    _num(event.value),
                ]
            )
        )
    _write(Path(path), lines)


def write_table_csv(path: str | Path, rows: list[tuple[str, SummaryRow | PercentChangeRow]]) -> None:
    """Comparison table: one absolute baseline row, percent-change rows after."""
    lines = ["case,kind,mean_travel_time,fuel,co2,ttc_events"]
    for label, row in rows:
        if isinstance(row, SummaryRow):
            lines.append(
                ",".join(
                    [label, "absolute", _num(row.mean_travel_time), _num(row.fuel), _num(row.co2), str(row.ttc_events)]
                )
            )
        else:
            lines.append(
                ",".join(
                    [
                        label,
                        "percent_change",
                        _pct(row.mean_travel_time),
                        _pct(row.fuel),
                        _pct(row.co2),
                        _pct(row.ttc_events),
                    ]
                )
            )
    _write(Path(path), lines)


def write_sweep_csv(path: str | Path, points: list[tuple[float, SummaryRow]]) -> None:
    lines = ["penetration,mean_travel_time,fuel,co2,ttc_events"]
    for penetration, summary in points:
        lines.append(
            ",".join(
                [
                    _num(penetration),
                    _num(summary.mean_travel_time),
                    _num(summary.fuel),
                    _num(summary.co2),
                    str(summary.ttc_events),
                ]
            )
        )
    _write(Path(path), lines)


def read_edge_speeds_csv(path: str | Path) -> list[dict]:
    """Rows of edge_speeds.csv as dicts; mean_speed is None for no-data edges."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "edge,from_x,from_y,to_x,to_y,mean_speed,samples":
        raise ValueError(f"{path}: not an edge_speeds.csv file")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 7:
            raise ValueError(f"{path}:{lineno}: expected 7 fields, got {len(fields)}")
        try:
            records.append(
                {
                    "edge": int(fields[0]),
                    "from_x": float(fields[1]),
                    "from_y": float(fields[2]),
                    "to_x": float(fields[3]),
                    "to_y": float(fields[4]),
                    "mean_speed": None if fields[5] == NA else float(fields[5]),
                    "samples": int(fields[6]),
                }
            )
        except ValueError:
            raise ValueError(f"{path}:{lineno}: bad numeric field") from None
    return records


def write_heatmap_csv(path: str | Path, records: list[dict]) -> None:
    """Per-edge midpoint + mean speed, ready for plotting by external tools."""
    lines = ["edge,mid_x,mid_y,mean_speed,samples"]
    for rec in records:
        mid_x = (rec["from_x"] + rec["to_x"]) / 2.0
        mid_y = (rec["from_y"] + rec["to_y"]) / 2.0
        lines.append(
            ",".join(
                [str(rec["edge"]), _num(mid_x), _num(mid_y), _num(rec["mean_speed"]), str(rec["samples"])]
            )
        )
    _write(Path(path), lines)


def write_run_outputs(out_dir: str | Path, output: SimulationOutput, summary: SummaryRow) -> dict[str, Path]:
    """The standard per-run artifact set: trips, edge speeds, summary, safety."""
    out = Path(out_dir)
    paths = {
        "trips": out / "trips.csv",
        "edge_speeds": out / "edge_speeds.csv",
        "summary": out / "summary.csv",
        "safety": out / "safety.csv",
    }
    write_trips_csv(paths["trips"], output)
    write_edge_speeds_csv(paths["edge_speeds"], output)
    write_summary_csv(paths["summary"], summary)
    write_safety_csv(paths["safety"], output)
    return paths
