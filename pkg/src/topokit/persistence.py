"""0-dimensional sublevel-set persistence of 2D grids.

Pixels are inserted in increasing value order (ties broken by row-major
index) into a union-find forest. When an inserted pixel joins two or more
live components, the elder rule keeps the component with the smaller
(birth value, birth pixel) and kills the others; the inserted pixel is
recorded as the death pixel of every killed component. The one component
that never dies is reported as the essential dot with death pinned at 1.0.

The superlevel direction runs the same algorithm on 1 - v and reports
births and deaths in original value coordinates, so a superlevel dot has
birth >= death and the essential death is 0.0. Critical pixels always
carry the exact source grid value.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .grid import (
    DIRECTIONS,
    SUBLEVEL,
    SUPERLEVEL,
    _STRUCTURE,
    GridFormatError,
    as_likelihood,
    format_real,
)

ORACLE_PIXEL_LIMIT = 400

DIAGRAM_CSV_HEADER = ["birth", "death", "birth_px", "death_px", "essential"]


@dataclass(frozen=True)
class PersistentDot:
    """One connected-component feature: birth/death values and critical pixels.

    birth_pixel is the component's minimum; death_pixel is the pixel whose
    insertion merged it away (absent for the essential dot). The grid value
    at each critical pixel equals the stored birth/death exactly.
    """

    birth: float
    death: float
    birth_pixel: int
    death_pixel: int | None = None
    essential: bool = False

    @property
    def persistence(self) -> float:
        """Life span |death - birth| (death - birth for sublevel diagrams)."""
        return abs(self.death - self.birth)

    def pair(self) -> tuple[float, float]:
        return (self.birth, self.death)


@dataclass(frozen=True)
class PersistenceDiagram:
    """Dots plus the source grid dimensions (0 x 0 when loaded from CSV)."""

    dots: tuple[PersistentDot, ...]
    height: int
    width: int

    def __len__(self) -> int:
        return len(self.dots)

    def pairs(self) -> list[tuple[float, float]]:
        return [d.pair() for d in self.dots]

    @property
    def essential_dot(self) -> PersistentDot | None:
        for dot in self.dots:
            if dot.essential:
                return dot
        return None


def compute_diagram(grid, direction: str = SUBLEVEL, connectivity: int = 4) -> PersistenceDiagram:
    """Union-find persistence of the grid's threshold filtration.

    Finite dots are emitted in merge (death) order; the essential dot comes
    last. Deterministic: all ties are broken by row-major pixel index.
    """
    values = as_likelihood(grid)
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity!r}")
    h, w = values.shape
    n = h * w
    flat = values.ravel()
    work = (1.0 - flat) if direction == SUPERLEVEL else flat
    order = np.argsort(work, kind="stable").tolist()
    work_l = work.tolist()
    flat_l = flat.tolist()
    parent = [-1] * n  # -1 marks a pixel not yet inserted
    birth_px = [0] * n  # valid at root indices only
    diagonal = connectivity == 8
    dots: list[PersistentDot] = []

    for px in order:
        r, c = px // w, px % w
        nbrs = []
        if r:
            nbrs.append(px - w)
        if r + 1 < h:
            nbrs.append(px + w)
        if c:
            nbrs.append(px - 1)
        if c + 1 < w:
            nbrs.append(px + 1)
        if diagonal:
            if r and c:
                nbrs.append(px - w - 1)
            if r and c + 1 < w:
                nbrs.append(px - w + 1)
            if r + 1 < h and c:
                nbrs.append(px + w - 1)
            if r + 1 < h and c + 1 < w:
                nbrs.append(px + w + 1)
        roots = []
        for q in nbrs:
            if parent[q] >= 0:
                while parent[q] != q:  # find with path halving
                    parent[q] = parent[parent[q]]
                    q = parent[q]
                if q not in roots:
                    roots.append(q)
        if not roots:
            parent[px] = px
            birth_px[px] = px
            continue
        elder = roots[0]
        if len(roots) > 1:
            eb, ep = work_l[birth_px[elder]], birth_px[elder]
            for q in roots[1:]:
                qb, qp = work_l[birth_px[q]], birth_px[q]
                if qb < eb or (qb == eb and qp < ep):
                    elder, eb, ep = q, qb, qp
            for q in roots:
                if q != elder:
                    bp = birth_px[q]
                    dots.append(PersistentDot(flat_l[bp], flat_l[px], bp, px))
                    parent[q] = elder
        parent[px] = elder

    ess_px = order[0]  # global minimum under the tie-broken order never dies
    ess_death = 0.0 if direction == SUPERLEVEL else 1.0
    dots.append(PersistentDot(flat_l[ess_px], ess_death, ess_px, None, essential=True))
    return PersistenceDiagram(tuple(dots), h, w)


def betti_curve(diagram: PersistenceDiagram, c: float) -> int:
    """Number of components of the sublevel mask at threshold c.

    Counts dots alive at c (birth <= c < death); the essential dot counts
    whenever birth <= c, which also covers c = 1. Sublevel diagrams only.
    """
    c = float(c)
    count = 0
    for dot in diagram.dots:
        if dot.essential:
            if dot.birth <= c:
                count += 1
        elif dot.birth <= c < dot.death:
            count += 1
    return count


def oracle_diagram(grid, connectivity: int = 4) -> PersistenceDiagram:
    """Slow reference diagram via from-scratch relabeling (sublevel only).

    Replays the tie-broken filtration one pixel at a time, recomputing
    connected components of the inserted set with scipy labeling at every
    step and reading off birth and merge events. Independent of the
    union-find implementation; guarded to grids of at most 400 pixels.
    """
    values = as_likelihood(grid)
    if values.size > ORACLE_PIXEL_LIMIT:
        raise ValueError(f"oracle limited to {ORACLE_PIXEL_LIMIT} pixels, got {values.size}")
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity!r}")
    structure = _STRUCTURE[connectivity]
    h, w = values.shape
    flat = values.ravel()
    order = np.argsort(flat, kind="stable").tolist()
    mask = np.zeros((h, w), dtype=bool)
    comps: dict[int, float] = {}  # birth pixel -> birth value
    dots: list[PersistentDot] = []

    for px in order:
        mask.flat[px] = True
        labeled, _ = ndimage.label(mask, structure=structure)
        lab = labeled.ravel()
        groups: dict[int, list[int]] = {}
        for bp in comps:
            groups.setdefault(int(lab[bp]), []).append(bp)
        for members in (m for _, m in sorted(groups.items()) if len(m) > 1):
            elder = min(members, key=lambda bp: (comps[bp], bp))
            for bp in members:
                if bp != elder:
                    dots.append(PersistentDot(comps[bp], float(flat[px]), bp, px))
                    del comps[bp]
        if int(lab[px]) not in groups:
            comps[px] = float(flat[px])

    (ess_px, ess_birth), = comps.items()
    dots.append(PersistentDot(ess_birth, 1.0, ess_px, None, essential=True))
    return PersistenceDiagram(tuple(dots), h, w)


# ---------------------------------------------------------------------------
# diagram CSV: birth,death,birth_px,death_px,essential
# ---------------------------------------------------------------------------

def save_diagram_csv(diagram: PersistenceDiagram, path) -> None:
    lines = [",".join(DIAGRAM_CSV_HEADER)]
    for dot in diagram.dots:
        death_px = "" if dot.death_pixel is None else str(dot.death_pixel)
        lines.append(
            f"{format_real(dot.birth)},{format_real(dot.death)},"
            f"{dot.birth_pixel},{death_px},{1 if dot.essential else 0}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def load_diagram_csv(path) -> PersistenceDiagram:
    """Read a diagram CSV; source dimensions are not stored, so they load as 0."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != DIAGRAM_CSV_HEADER:
        raise GridFormatError(f"{path}: missing diagram header {','.join(DIAGRAM_CSV_HEADER)!r}")
    dots = []
    for ln, row in enumerate(rows[1:], start=2):
        if len(row) != 5:
            raise GridFormatError(f"{path}: line {ln}: expected 5 columns, got {len(row)}")
        try:
            birth, death = float(row[0]), float(row[1])
            birth_px = int(row[2])
            death_px = None if row[3] == "" else int(row[3])
            essential = bool(int(row[4]))
        except ValueError:
            raise GridFormatError(f"{path}: line {ln}: unparseable diagram row") from None
        if essential != (death_px is None):
            raise GridFormatError(f"{path}: line {ln}: essential flag and death_px disagree")
        dots.append(PersistentDot(birth, death, birth_px, death_px, essential))
    return PersistenceDiagram(tuple(dots), 0, 0)
