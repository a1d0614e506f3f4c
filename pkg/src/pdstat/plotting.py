"""Visualization of diagram measures and continuity reports.

The stacked-weight chart follows the convention that the height of the stack
above a point equals the summed weight of the atoms whose diagram contains
that point, so a full-height stack means the point appears in every diagram
of the measure.  The SVG emitter is hand-rolled (byte-deterministic, no
plotting dependency); the report figures use matplotlib and are rendered to
files next to the delimited output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .pfm import DiagramMeasure

MERGE_TOL = 1e-9
FULL_WEIGHT_TOL = 1e-9


def stack_heights(measure: DiagramMeasure, tol: float = MERGE_TOL):
    """(birth, death, summed weight) per distinct mean-diagram point.

    Points are merged when both coordinates agree within tol; each atom
    contributes its weight once per matching point (with multiplicity)."""
    stacks: list[list[float]] = []  # [birth, death, weight]
    for atom in measure.atoms:
        for p in atom.diagram:
            for s in stacks:
                if abs(s[0] - p.birth) <= tol and abs(s[1] - p.death) <= tol:
                    s[2] += atom.weight
                    break
            else:
                stacks.append([p.birth, p.death, atom.weight])
    stacks.sort(key=lambda s: (s[0], s[1]))
    return [(s[0], s[1], s[2]) for s in stacks]


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def emit_stack_plot(measure: DiagramMeasure, out=None) -> str:
    """Birth/death scatter with a vertical stack per point whose height is the
    point's summed weight.  Full-weight stacks are drawn in a distinct color.
    Returns the SVG text; writes it to `out` when given."""
    stacks = stack_heights(measure)
    width, height = 640.0, 480.0
    margin = 56.0
    coords = [c for s in stacks for c in s[:2]] or [0.0, 1.0]
    lo = min(coords + [0.0])
    hi = max(coords) if max(coords) > lo else lo + 1.0
    span = (hi - lo) * 1.15 + 1e-12
    lo -= (hi - lo) * 0.05

    def sx(x: float) -> float:
        return margin + (x - lo) / span * (width - 2 * margin)

    def sy(y: float) -> float:
        return height - margin - (y - lo) / span * (height - 2 * margin)

    stack_px = 90.0  # stack of weight 1 rises this many pixels
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        # axes
        f'<line x1="{_fmt(margin)}" y1="{_fmt(height - margin)}" '
        f'x2="{_fmt(width - margin)}" y2="{_fmt(height - margin)}" stroke="black"/>',
        f'<line x1="{_fmt(margin)}" y1="{_fmt(height - margin)}" '
        f'x2="{_fmt(margin)}" y2="{_fmt(margin)}" stroke="black"/>',
        f'<text x="{_fmt(width / 2)}" y="{_fmt(height - 12)}" '
        f'text-anchor="middle" font-size="14">birth</text>',
        f'<text x="16" y="{_fmt(height / 2)}" text-anchor="middle" '
        f'font-size="14" transform="rotate(-90 16 {_fmt(height / 2)})">death</text>',
        # the diagonal
        f'<line x1="{_fmt(sx(lo))}" y1="{_fmt(sy(lo))}" '
        f'x2="{_fmt(sx(lo + span))}" y2="{_fmt(sy(lo + span))}" '
        f'stroke="gray" stroke-dasharray="4 3"/>',
    ]
    for birth, death, weight in stacks:
        x, y = sx(birth), sy(death)
        full = weight >= 1.0 - FULL_WEIGHT_TOL
        color = "#d62728" if full else "#1f77b4"
        top = y - weight * stack_px
        cls = "stack-full" if full else "stack"
        parts.append(
            f'<g class="{cls}"><title>({format(birth, ".6g")}, '
            f'{format(death, ".6g")}) weight {format(weight, ".6g")}</title>'
            f'<line x1="{_fmt(x)}" y1="{_fmt(y)}" x2="{_fmt(x)}" y2="{_fmt(top)}" '
            f'stroke="{color}" stroke-width="4"/>'
            f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3.5" fill="{color}"/>'
            f"</g>"
        )
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"
    if out is not None:
        Path(out).write_text(svg)
    return svg


def render_stacks_csv(measure: DiagramMeasure) -> str:
    """Delimited companion to the stack plot: birth,death,weight per stack."""
    lines = ["birth,death,weight"]
    for birth, death, weight in stack_heights(measure):
        lines.append(f"{birth:.17g},{death:.17g},{weight:.17g}")
    return "\n".join(lines) + "\n"


def save_stack_figure(measure: DiagramMeasure, out) -> None:
    """Matplotlib version of the stacked-weight chart (3D stems)."""
    stacks = stack_heights(measure)
    fig = plt.figure(figsize=(7, 5))
    ax = fig.add_subplot(projection="3d")
    for birth, death, weight in stacks:
        full = weight >= 1.0 - FULL_WEIGHT_TOL
        color = "#d62728" if full else "#1f77b4"
        ax.plot([birth, birth], [death, death], [0.0, weight], color=color, lw=2)
        ax.scatter([birth], [death], [weight], color=color, s=12)
    coords = [c for s in stacks for c in s[:2]] or [0.0, 1.0]
    lo, hi = min(coords + [0.0]), max(coords)
    ax.plot([lo, hi], [lo, hi], [0.0, 0.0], color="gray", ls="--", lw=1)
    ax.set_xlabel("birth")
    ax.set_ylabel("death")
    ax.set_zlabel("weight")
    ax.set_zlim(0, 1.05)
    fig.savefig(out, dpi=150)
    plt.close(fig)


def save_diagram_figure(diagrams, out, labels=None) -> None:
    """Overlay scatter of one or more diagrams above the diagonal."""
    diagrams = list(diagrams)
    fig, ax = plt.subplots(figsize=(6, 6))
    coords = [0.0]
    for idx, d in enumerate(diagrams):
        xs = [p.birth for p in d]
        ys = [p.death for p in d]
        coords += xs + ys
        label = labels[idx] if labels else f"diagram {idx}"
        ax.scatter(xs, ys, s=22, alpha=0.8, label=label)
    lo, hi = min(coords), max(coords) or 1.0
    pad = (hi - lo) * 0.05 + 1e-9
    ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad], color="gray", ls="--", lw=1)
    ax.set_xlabel("birth")
    ax.set_ylabel("death")
    if len(diagrams) > 1:
        ax.legend(fontsize=8)
    fig.savefig(out, dpi=150)
    plt.close(fig)


def save_continuity_figure(report, times, out) -> None:
    """Per-step measure distances against the Holder bound."""
    mids = [(times[i] + times[i + 1]) / 2 for i in range(len(times) - 1)]
    measured = [s.measure_distance for s in report.steps]
    bounds = [s.bound + s.slack for s in report.steps]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(mids, measured, "o-", label="measure step", color="#1f77b4")
    ax.plot(mids, bounds, "s--", label="bound + slack", color="#d62728")
    ax.set_xlabel("time")
    ax.set_ylabel("distance")
    ax.set_yscale("log")
    title = "per-step continuity"
    if report.exponent is not None:
        title += f" (fitted exponent {report.exponent:.2f})"
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def render_continuity_csv(report, times) -> str:
    """Delimited continuity report, one row per step."""
    lines = ["t0,t1,dt,set_step,measure_step,bound,slack,within_bound"]
    for i, s in enumerate(report.steps):
        lines.append(
            f"{times[i]:.17g},{times[i + 1]:.17g},{s.dt:.17g},"
            f"{s.set_distance:.17g},{s.measure_distance:.17g},"
            f"{s.bound:.17g},{s.slack:.17g},{int(s.within_bound)}"
        )
    return "\n".join(lines) + "\n"
