"""Pixel losses, topological losses, analytic gradients, and a gradient check.

The topological losses compare the student likelihood against a fixed
teacher likelihood through their persistence diagrams:

* signal consistency: student dots with persistence above the threshold are
  matched to the teacher's signal dots (exact 2-Wasserstein matching) and
  their birth/death values, which live at the student's critical pixels,
  are pulled toward the matched targets; a diagonal match pulls a dot
  toward its own diagonal projection ((b+d)/2, (b+d)/2),
* noise removal: student dots at or below the threshold have their critical
  values pushed toward zero (default), or collapsed onto the diagonal when
  noise_mode="diagonal".

Essential dots carry no death pixel and contribute only their birth term.
Gradients are exact partial derivatives with respect to the student values,
supported only on critical pixels; contributions at a shared pixel add up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagram import DEFAULT_PHI, DecomposedDiagram, decompose
from .grid import SUBLEVEL, as_likelihood, as_mask
from .matching import DIAGONAL, DiagramMatching, match_diagrams
from .persistence import compute_diagram

CE_CLAMP = 1e-7
DICE_EPS = 1e-6
NOISE_SQUARED = "squared-values"
NOISE_DIAGONAL = "diagonal"
NOISE_MODES = (NOISE_SQUARED, NOISE_DIAGONAL)


@dataclass(frozen=True)
class TopoLossReport:
    """Loss values plus the structures they were computed from."""

    cons_loss: float
    rem_loss: float
    topo_loss: float
    matching: DiagramMatching
    student_decomposition: DecomposedDiagram
    teacher_decomposition: DecomposedDiagram


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def cross_entropy_loss(prediction, target) -> float:
    """Mean binary cross entropy; prediction clamped to [1e-7, 1 - 1e-7]."""
    pred = as_likelihood(prediction)
    tgt = as_likelihood(target)
    _check_same_shape(pred, tgt)
    s = np.clip(pred, CE_CLAMP, 1.0 - CE_CLAMP)
    return float(np.mean(-(tgt * np.log(s) + (1.0 - tgt) * np.log1p(-s))))


def cross_entropy_gradient(prediction, target) -> np.ndarray:
    """d(mean CE)/d(prediction); zero wherever the clamp is active."""
    pred = as_likelihood(prediction)
    tgt = as_likelihood(target)
    _check_same_shape(pred, tgt)
    s = np.clip(pred, CE_CLAMP, 1.0 - CE_CLAMP)
    inside = (pred > CE_CLAMP) & (pred < 1.0 - CE_CLAMP)
    grad = (s - tgt) / (s * (1.0 - s)) / pred.size
    return np.where(inside, grad, 0.0)


def dice_loss(prediction, target_mask) -> float:
    """Soft Dice loss 1 - (2|P.T| + eps) / (|P| + |T| + eps), eps = 1e-6."""
    pred = as_likelihood(prediction)
    mask = as_mask(target_mask).astype(np.float64)
    _check_same_shape(pred, mask)
    inter = float((pred * mask).sum())
    return float(1.0 - (2.0 * inter + DICE_EPS) / (pred.sum() + mask.sum() + DICE_EPS))


def dice_gradient(prediction, target_mask) -> np.ndarray:
    pred = as_likelihood(prediction)
    mask = as_mask(target_mask).astype(np.float64)
    _check_same_shape(pred, mask)
    denom = pred.sum() + mask.sum() + DICE_EPS
    numer = 2.0 * float((pred * mask).sum()) + DICE_EPS
    return -(2.0 * mask * denom - numer) / (denom * denom)


def supervised_loss(prediction, target_mask, w1: float = 0.5, w2: float = 0.5) -> float:
    """w1 * cross entropy + w2 * Dice against a binary mask."""
    mask = as_mask(target_mask)
    return w1 * cross_entropy_loss(prediction, mask.astype(np.float64)) + \
        w2 * dice_loss(prediction, mask)


def supervised_gradient(prediction, target_mask, w1: float = 0.5, w2: float = 0.5) -> np.ndarray:
    mask = as_mask(target_mask)
    return w1 * cross_entropy_gradient(prediction, mask.astype(np.float64)) + \
        w2 * dice_gradient(prediction, mask)


def topo_loss_and_gradient(student, teacher, phi: float = DEFAULT_PHI,
                           direction: str = SUBLEVEL, connectivity: int = 4,
                           noise_mode: str = NOISE_SQUARED):
    """One shared pass returning (TopoLossReport, gradient grid)."""
    s = as_likelihood(student)
    t = as_likelihood(teacher)
    _check_same_shape(s, t)
    if noise_mode not in NOISE_MODES:
        raise ValueError(f"noise_mode must be one of {NOISE_MODES}, got {noise_mode!r}")
    dec_s = decompose(compute_diagram(s, direction, connectivity), phi)
    dec_t = decompose(compute_diagram(t, direction, connectivity), phi)
    matching = match_diagrams(dec_s.signal, dec_t.signal, p=2.0)
    grad = np.zeros_like(s)
    gflat = grad.ravel()

    cons = 0.0
    target_of = {li: ri for li, ri in matching.pairs if li != DIAGONAL}
    for i, dot in enumerate(dec_s.signal.dots):
        ri = target_of[i]
        if ri == DIAGONAL:
            tb = td = 0.5 * (dot.birth + dot.death)
        else:
            tdot = dec_t.signal.dots[ri]
            tb, td = tdot.birth, tdot.death
        db = dot.birth - tb
        cons += db * db
        gflat[dot.birth_pixel] += 2.0 * db
        if dot.death_pixel is not None:
            dd = dot.death - td
            cons += dd * dd
            gflat[dot.death_pixel] += 2.0 * dd

    rem = 0.0
    for dot in dec_s.noise.dots:
        if noise_mode == NOISE_SQUARED:
            rem += dot.birth * dot.birth
            gflat[dot.birth_pixel] += 2.0 * dot.birth
            if dot.death_pixel is not None:
                rem += dot.death * dot.death
                gflat[dot.death_pixel] += 2.0 * dot.death
        else:
            gap = dot.death - dot.birth  # death is a constant for essential dots
            rem += 0.5 * gap * gap
            gflat[dot.birth_pixel] -= gap
            if dot.death_pixel is not None:
                gflat[dot.death_pixel] += gap

    report = TopoLossReport(cons, rem, cons + rem, matching, dec_s, dec_t)
    return report, grad


def topo_consistency_loss(student, teacher, phi: float = DEFAULT_PHI,
                          direction: str = SUBLEVEL, connectivity: int = 4,
                          noise_mode: str = NOISE_SQUARED) -> TopoLossReport:
    report, _ = topo_loss_and_gradient(student, teacher, phi, direction, connectivity, noise_mode)
    return report


def topo_consistency_gradient(student, teacher, phi: float = DEFAULT_PHI,
                              direction: str = SUBLEVEL, connectivity: int = 4,
                              noise_mode: str = NOISE_SQUARED) -> np.ndarray:
    _, grad = topo_loss_and_gradient(student, teacher, phi, direction, connectivity, noise_mode)
    return grad


def finite_difference_check(student, teacher, phi: float = DEFAULT_PHI,
                            h: float = 1e-5, direction: str = SUBLEVEL,
                            connectivity: int = 4,
                            noise_mode: str = NOISE_SQUARED) -> float:
    """Max relative error between central differences and the analytic gradient.

    Probes every critical pixel of the student diagram. h must be small
    enough that perturbing any single pixel by +-h cannot reorder pixel
    values or push them out of [0, 1]; otherwise the critical pixels would
    move and the comparison would be meaningless.
    """
    s = as_likelihood(student)
    t = as_likelihood(teacher)
    _check_same_shape(s, t)
    h = float(h)
    if h <= 0.0:
        raise ValueError(f"step h must be positive, got {h}")
    uniq = np.unique(s.ravel())
    min_gap = float(np.diff(uniq).min()) if uniq.size > 1 else np.inf
    if uniq.size < s.size:
        min_gap = 0.0
    if h >= 0.5 * min_gap:
        raise ValueError(
            f"h={h} too large for this grid: smallest value gap is {min_gap}"
        )
    if float(s.min()) < h or float(s.max()) > 1.0 - h:
        raise ValueError(f"h={h} too large: values within h of the [0, 1] boundary")

    report, grad = topo_loss_and_gradient(s, t, phi, direction, connectivity, noise_mode)
    critical: set[int] = set()
    for side in (report.student_decomposition.signal, report.student_decomposition.noise):
        for dot in side.dots:
            critical.add(dot.birth_pixel)
            if dot.death_pixel is not None:
                critical.add(dot.death_pixel)

    def loss_at(values: np.ndarray) -> float:
        rep, _ = topo_loss_and_gradient(values, t, phi, direction, connectivity, noise_mode)
        return rep.topo_loss

    max_err = 0.0
    for px in sorted(critical):
        plus = s.copy()
        plus.flat[px] += h
        minus = s.copy()
        minus.flat[px] -= h
        fd = (loss_at(plus) - loss_at(minus)) / (2.0 * h)
        an = float(grad.flat[px])
        err = abs(fd - an) / max(abs(fd), abs(an), 1e-6)
        max_err = max(max_err, err)
    return max_err
