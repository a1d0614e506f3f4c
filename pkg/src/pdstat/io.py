"""File formats and deterministic serialization.

Diagrams are text files with one `birth,death` pair per line; `#` starts a
comment and blank lines are ignored.  A diagram set is either several files
or one file with `--- diagram <i>` separator lines.  Vineyards live in a
directory of `frame_<index>_diagram_<i>.csv` files plus `times.csv`, or in a
single JSON bundle.  All floats are rendered with 17 significant digits, which
round-trips doubles bit-exactly, and JSON key order is fixed, so identical
inputs always produce identical bytes.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .diagrams import Diagram, DiagramSet
from .grouping import Grouping, grouping_from_lists, grouping_to_lists
from .pfm import DiagramMeasure, MeasureAtom
from .vineyard import Vineyard


def format_float(x: float) -> str:
    return f"{x:.17g}"


def _render(obj) -> str:
    """JSON with explicit float rendering and stable key order."""
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(k)}: {_render(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_render(v) for v in obj) + "]"
    raise TypeError(f"cannot render {type(obj)}")


def dumps(obj) -> str:
    return _render(obj) + "\n"


# ---------------------------------------------------------------------------
# diagrams


class FormatError(ValueError):
    """Malformed input file."""


def parse_diagram(text: str) -> Diagram:
    points = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.replace(",", " ").split()]
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected 'birth,death', got {raw!r}")
        try:
            birth, death = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
        if not (math.isfinite(birth) and math.isfinite(death)):
            raise FormatError(f"line {lineno}: non-finite coordinates")
        if death < birth:
            raise FormatError(f"line {lineno}: death {death} < birth {birth}")
        points.append((birth, death))
    return Diagram(points)


def render_diagram(d: Diagram, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.extend(f"{format_float(p.birth)},{format_float(p.death)}" for p in d)
    return "\n".join(lines) + "\n"


def read_diagram(path) -> Diagram:
    return parse_diagram(Path(path).read_text())


def write_diagram(path, d: Diagram, comment: str | None = None) -> None:
    Path(path).write_text(render_diagram(d, comment))


def parse_diagram_set(text: str) -> DiagramSet:
    """One file holding several diagrams separated by `--- diagram <i>` lines."""
    chunks: list[list[str]] = []
    current: list[str] | None = None
    for raw in text.splitlines():
        if raw.strip().startswith("--- diagram"):
            current = []
            chunks.append(current)
            continue
        if current is None:
            if raw.split("#", 1)[0].strip():
                raise FormatError("content before the first '--- diagram' separator")
            continue
        current.append(raw)
    if not chunks:
        raise FormatError("no '--- diagram <i>' separators found")
    return DiagramSet([parse_diagram("\n".join(c)) for c in chunks])


def render_diagram_set(x: DiagramSet) -> str:
    parts = []
    for i, d in enumerate(x):
        parts.append(f"--- diagram {i}\n")
        parts.append(render_diagram(d))
    return "".join(parts)


def read_diagram_set(paths) -> DiagramSet:
    """A diagram set from several single-diagram files, or from one file with
    separators."""
    paths = [Path(p) for p in paths]
    if len(paths) == 1:
        text = paths[0].read_text()
        if "--- diagram" in text:
            return parse_diagram_set(text)
    return DiagramSet([read_diagram(p) for p in paths])


# ---------------------------------------------------------------------------
# groupings and measures


def diagram_to_obj(d: Diagram) -> list[list[float]]:
    return [[p.birth, p.death] for p in d]


def diagram_from_obj(obj) -> Diagram:
    return Diagram([(float(b), float(dd)) for b, dd in obj])


def measure_to_obj(m: DiagramMeasure) -> dict:
    obj = {
        "alpha": m.alpha,
        "draws": m.draws,
        "seed": m.seed,
        "atoms": [
            {
                "weight": a.weight,
                "grouping": grouping_to_lists(a.grouping)
                if a.grouping is not None
                else None,
                "diagram": diagram_to_obj(a.diagram),
            }
            for a in m.atoms
        ],
    }
    if m.exact is not None:
        obj["exact"] = m.exact
    return obj


def measure_from_obj(obj) -> DiagramMeasure:
    try:
        atoms = tuple(
            MeasureAtom(
                float(a["weight"]),
                diagram_from_obj(a["diagram"]),
                grouping_from_lists(a["grouping"]) if a.get("grouping") is not None else None,
            )
            for a in obj["atoms"]
        )
        return DiagramMeasure(
            atoms,
            alpha=obj.get("alpha"),
            draws=obj.get("draws"),
            seed=obj.get("seed"),
            exact=obj.get("exact"),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed measure JSON: {exc}") from None


def read_measure(path) -> DiagramMeasure:
    return measure_from_obj(json.loads(Path(path).read_text()))


def write_measure(path, m: DiagramMeasure) -> None:
    Path(path).write_text(dumps(measure_to_obj(m)))


def grouping_to_json(g: Grouping) -> str:
    return dumps(grouping_to_lists(g))


def grouping_from_json(text: str) -> Grouping:
    return grouping_from_lists(json.loads(text))


# ---------------------------------------------------------------------------
# vineyards


def vineyard_to_obj(v: Vineyard) -> dict:
    return {
        "times": list(v.times),
        "frames": [[diagram_to_obj(d) for d in frame] for frame in v.frames],
    }


def vineyard_from_obj(obj) -> Vineyard:
    try:
        frames = [
            DiagramSet([diagram_from_obj(d) for d in frame]) for frame in obj["frames"]
        ]
        return Vineyard(obj["times"], frames)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed vineyard JSON: {exc}") from None


def read_vineyard(path) -> Vineyard:
    """A vineyard from a JSON bundle or from a directory of
    frame_<index>_diagram_<i>.csv files plus times.csv."""
    path = Path(path)
    if path.is_dir():
        times_file = path / "times.csv"
        if not times_file.exists():
            raise FormatError(f"{path} has no times.csv")
        times = [
            float(line.split("#", 1)[0].strip())
            for line in times_file.read_text().splitlines()
            if line.split("#", 1)[0].strip()
        ]
        frames = []
        for idx in range(len(times)):
            files = sorted(
                path.glob(f"frame_{idx}_diagram_*.csv"),
                key=lambda p: int(p.stem.rsplit("_", 1)[1]),
            )
            if not files:
                raise FormatError(f"no diagrams for frame {idx} in {path}")
            frames.append(DiagramSet([read_diagram(f) for f in files]))
        return Vineyard(times, frames)
    return vineyard_from_obj(json.loads(path.read_text()))


def write_vineyard_dir(path, v: Vineyard) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    (path / "times.csv").write_text(
        "".join(format_float(t) + "\n" for t in v.times)
    )
    for idx, frame in enumerate(v.frames):
        for i, d in enumerate(frame):
            write_diagram(path / f"frame_{idx}_diagram_{i}.csv", d)
