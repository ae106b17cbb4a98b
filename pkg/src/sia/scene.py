"""On-the-fly 3D scene assembly.

A composition request names places and periods; every non-archived 3D
model record matching a (place, period) pair becomes one named X3D group
that inlines the model file and carries a period color swatch. Colors
come from a fixed palette cycled over the requested periods in
chronological order, so the earliest period always gets the first entry.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass

from .errors import EmptyComposition, UnknownPeriod
from .model import Period, place_descendants
from .store import Store
from .xmlio import format_float, serialize_tree

Color = tuple[float, float, float]

# Cycled per period, chronologically; the first two entries follow the
# site convention of yellow for the oldest phase shown, pink for the next.
DEFAULT_PALETTE: tuple[Color, ...] = (
    (1.0, 0.9, 0.0),  # yellow
    (1.0, 0.6, 0.75),  # pink
    (0.2, 0.4, 0.9),  # blue
    (0.2, 0.7, 0.3),  # green
    (1.0, 0.55, 0.1),  # orange
    (0.6, 0.35, 0.8),  # purple
    (0.1, 0.65, 0.65),  # teal
    (0.85, 0.2, 0.2),  # red
    (0.55, 0.4, 0.25),  # brown
    (0.5, 0.8, 1.0),  # sky
    (0.55, 0.6, 0.2),  # olive
    (0.85, 0.3, 0.65),  # magenta
)


@dataclass(frozen=True)
class CompositionRequest:
    places: tuple[str, ...]
    periods: tuple[str, ...]


@dataclass(frozen=True)
class SceneGroup:
    name: str
    place_id: str
    period_id: str
    record_id: str
    color: Color
    inline_url: str
    translation: tuple[float, float, float] | None = None


@dataclass(frozen=True)
class Scene:
    groups: tuple[SceneGroup, ...]
    legend: tuple[tuple[str, Color], ...]  # (periodId, color), chronological
    warnings: tuple[str, ...]


def format_color(color: Color) -> str:
    return " ".join(f"{channel:g}" for channel in color)


def period_colors(
    period_ids: tuple[str, ...], periods: list[Period], palette: tuple[Color, ...] = DEFAULT_PALETTE
) -> dict[str, Color]:
    """Assign palette entries to the given periods in chronological order
    (start year, end year, id), cycling when the palette runs out."""
    by_id = {p.id: p for p in periods}
    unknown = [pid for pid in period_ids if pid not in by_id]
    if unknown:
        raise UnknownPeriod(f"period {unknown[0]!r} does not exist")
    distinct = sorted(set(period_ids), key=lambda pid: (by_id[pid].start_year, by_id[pid].end_year, pid))
    return {pid: palette[i % len(palette)] for i, pid in enumerate(distinct)}


def compose_model(
    store: Store, request: CompositionRequest, palette: tuple[Color, ...] = DEFAULT_PALETTE
) -> Scene:
    if not request.places or not request.periods:
        raise EmptyComposition("a model composition needs at least one place and one period")
    places = store.places()
    scopes = {place_id: place_descendants(place_id, places) for place_id in request.places}
    colors = period_colors(request.periods, store.periods(), palette)

    view = store.index_view()
    candidates = [
        row for row in view.rows.values() if row.kind == "model3d" and not row.archived
    ]
    groups: list[SceneGroup] = []
    warnings: list[str] = []
    for place_id in sorted(set(request.places)):
        for period_id in sorted(set(request.periods)):
            matched = [
                row
                for row in candidates
                if scopes[place_id].intersection(view.places.get(row.id, ()))
                and period_id in view.periods.get(row.id, ())
            ]
            if not matched:
                warnings.append(f"no 3D model covers place {place_id!r} in period {period_id!r}")
                continue
            for row in matched:
                record = store.read(row.id)
                groups.append(
                    SceneGroup(
                        name=f"{place_id}-{period_id}-{row.id}",
                        place_id=place_id,
                        period_id=period_id,
                        record_id=row.id,
                        color=colors[period_id],
                        inline_url=row.content_href,
                        translation=record.coordinates,
                    )
                )
    if not groups:
        raise EmptyComposition("no 3D model matches the requested places and periods")
    groups.sort(key=lambda g: (g.place_id, g.period_id, g.record_id))
    by_id = {p.id: p for p in store.periods()}
    legend = tuple(
        (pid, colors[pid])
        for pid in sorted(colors, key=lambda pid: (by_id[pid].start_year, by_id[pid].end_year, pid))
    )
    return Scene(groups=tuple(groups), legend=legend, warnings=tuple(warnings))


def scene_element(scene: Scene) -> ET.Element:
    root = ET.Element("X3D", {"profile": "Interchange", "version": "3.2"})
    scene_el = ET.SubElement(root, "Scene")
    for group in scene.groups:
        group_el = ET.SubElement(scene_el, "Group", {"DEF": group.name})
        shape = ET.SubElement(group_el, "Shape")
        appearance = ET.SubElement(shape, "Appearance")
        ET.SubElement(appearance, "Material", {"diffuseColor": format_color(group.color)})
        url = f'"{group.inline_url}"'
        if group.translation is not None:
            translation = " ".join(format_float(v) for v in group.translation)
            transform = ET.SubElement(group_el, "Transform", {"translation": translation})
            ET.SubElement(transform, "Inline", {"url": url})
        else:
            ET.SubElement(group_el, "Inline", {"url": url})
    return root


def serialize_x3d(scene: Scene) -> bytes:
    return serialize_tree(scene_element(scene))
