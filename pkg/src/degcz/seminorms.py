"""Sampling-based estimators of local BMO seminorms and Muckenhoupt constants.

All estimators report sampled lower bounds: the supremum over balls is
discretized by an explicit, disclosed ball family.  Per-ball means integrate
over the intersection with the domain ball but normalize by the full ball
volume.  Enlarging a family can only increase an estimate, which the family
refinement helpers preserve by returning supersets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calibration import CALIBRATED
from .weight_algebra import (
    Ball,
    DEFAULT_QUAD,
    MatrixField,
    QuadratureSpec,
    ScalarField,
    ScalarWeightField,
    WeightField,
    ball_nodes,
    log_mean_matrix,
    log_mean_scalar,
    spectral_norm_sym,
)

__all__ = [
    "BallFamily",
    "BmoEstimate",
    "ApEstimate",
    "bmo_scalar",
    "bmo_matrix",
    "muckenhoupt_ap",
    "PropSmallReport",
    "prop_small_check",
    "SmallScalarReport",
    "small_scalar_checks",
    "standard_family",
]

#: per-ball values larger than this are treated as numeric blow-up
OVERFLOW_GUARD = 1e12
#: quadrature-refinement growth above this flags a non-integrable integrand
STABILITY_GUARD = 1.10


@dataclass(frozen=True)
class BallFamily:
    """A finite, ordered family of sample balls inside a domain ball."""

    balls: tuple[Ball, ...]
    strategy: str
    domain: Ball
    meta: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if not self.balls:
            raise ValueError("ball family must contain at least one ball")
        dom_c = np.asarray(self.domain.center)
        for b in self.balls:
            if np.linalg.norm(np.asarray(b.center) - dom_c) > self.domain.radius:
                raise ValueError("family ball center lies outside the domain ball")
            if b.radius > self.domain.radius * (1 + 1e-12):
                raise ValueError("family ball radius exceeds the domain radius")

    @property
    def count(self) -> int:
        return len(self.balls)

    def union(self, other: "BallFamily") -> "BallFamily":
        return BallFamily(
            self.balls + other.balls, f"{self.strategy}+{other.strategy}", self.domain
        )

    # -- constructors --------------------------------------------------------

    @staticmethod
    def dyadic(domain: Ball, levels: int, max_per_level: int = 256) -> "BallFamily":
        """Dyadic radii with center grids of matching spacing."""
        if levels < 1:
            raise ValueError("need at least one dyadic level")
        center = np.asarray(domain.center)
        r0 = domain.radius
        balls: list[Ball] = []
        for lev in range(1, levels + 1):
            r = r0 * 2.0 ** (-lev)
            k = min(2 ** lev, int(math.sqrt(max_per_level)))
            axes = [np.linspace(-r0 + r, r0 - r, 2 * k + 1) for _ in range(domain.dim)]
            grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, domain.dim)
            keep = np.linalg.norm(grid, axis=-1) <= r0 - r + 1e-12
            for off in grid[keep]:
                balls.append(Ball(tuple(center + off), r))
        return BallFamily(tuple(balls), "dyadic-grid", domain, (("levels", float(levels)),))

    @staticmethod
    def random(
        domain: Ball, count: int, r_min: float, r_max: float, seed: int
    ) -> "BallFamily":
        rng = np.random.default_rng(seed)
        center = np.asarray(domain.center)
        balls = []
        while len(balls) < count:
            g = rng.standard_normal(domain.dim)
            g /= np.linalg.norm(g)
            c = center + g * domain.radius * rng.random() ** (1.0 / domain.dim)
            r = math.exp(rng.uniform(math.log(r_min), math.log(r_max)))
            balls.append(Ball(tuple(c), min(r, domain.radius)))
        return BallFamily(tuple(balls), "random", domain, (("seed", float(seed)),))

    @staticmethod
    def origin_ladder(
        domain: Ball, levels: int, scale: float = 1e-4, offsets: bool = True
    ) -> "BallFamily":
        """Balls shrinking geometrically toward the domain center.

        Power-type blow-up is logarithmically slow in the radius, so each
        ladder level divides the radius by 1/scale (default 1e4) to make
        growth visible within a couple of levels.
        """
        if not (0 < scale < 1):
            raise ValueError("scale must lie in (0, 1)")
        center = np.asarray(domain.center)
        balls = []
        for lev in range(levels + 1):
            r = domain.radius * scale ** lev
            balls.append(Ball(tuple(center), r))
            if offsets and domain.dim == 2:
                for dx, dy in ((0.5, 0.0), (-0.5, 0.0), (0.0, 0.5), (0.0, -0.5)):
                    balls.append(Ball(tuple(center + r * np.array([dx, dy])), r))
        return BallFamily(
            tuple(balls), "origin-ladder", domain,
            (("levels", float(levels)), ("scale", scale)),
        )

    def refined(self) -> "BallFamily":
        """A strictly larger family (superset), for stability studies."""
        meta = dict(self.meta)
        if self.strategy == "dyadic-grid":
            extra = BallFamily.dyadic(self.domain, int(meta.get("levels", 3)) + 1)
        elif self.strategy == "origin-ladder":
            extra = BallFamily.origin_ladder(
                self.domain, int(meta.get("levels", 2)) + 1, meta.get("scale", 1e-4)
            )
        else:
            seed = int(meta.get("seed", 0))
            radii = [b.radius for b in self.balls]
            extra = BallFamily.random(
                self.domain, self.count, min(radii), max(radii), seed + 1
            )
        return self.union(extra)


def standard_family(domain: Ball, levels: int = 3) -> BallFamily:
    """The default dyadic-grid family used by the weight diagnostics."""
    return BallFamily.dyadic(domain, levels)


# ---------------------------------------------------------------------------
# BMO estimators
# ---------------------------------------------------------------------------

@dataclass
class BmoEstimate:
    """Sampled lower bound of a local BMO seminorm over a disclosed family."""

    value: float
    attaining_ball: Ball
    ball_count: int
    quadrature: QuadratureSpec
    rows: list[tuple[int, float, float, float, float, float]] = field(default_factory=list)
    # rows: (index, cx, cy, radius, per-ball value, running max)


def bmo_scalar(
    f: ScalarField | ScalarWeightField, fam: BallFamily, quad: QuadratureSpec = DEFAULT_QUAD
) -> BmoEstimate:
    """Max over the family of the per-ball mean oscillation of a scalar field."""
    best_val, best_ball, rows = _bmo_impl(f, fam, quad)
    return BmoEstimate(best_val, best_ball, fam.count, quad, rows)


def bmo_matrix(
    H: MatrixField | WeightField, fam: BallFamily, quad: QuadratureSpec = DEFAULT_QUAD
) -> BmoEstimate:
    """As :func:`bmo_scalar` with spectral-norm oscillation of a matrix field."""
    best_val, best_ball, rows = _bmo_impl(H, fam, quad)
    return BmoEstimate(best_val, best_ball, fam.count, quad, rows)


def _bmo_impl(f, fam, quad):
    sing = np.atleast_2d(
        np.asarray(getattr(f, "singular_points", ()) or ()).reshape(-1, fam.domain.dim)
    )
    rows = []
    best_val, best_ball, running = -1.0, fam.balls[0], 0.0
    for idx, ball in enumerate(fam.balls):
        pts, w = ball_nodes(ball, quad, clip=fam.domain, singular=sing)
        if len(w) == 0:
            val = 0.0
        else:
            vals = f.evaluate(pts)
            mean = np.tensordot(w, vals, axes=(0, 0)) / w.sum()
            dev = vals - mean
            osc = np.abs(dev) if dev.ndim == 1 else spectral_norm_sym(dev)
            val = float(np.sum(w * osc) / ball.volume)
        running = max(running, val)
        if val > best_val:
            best_val, best_ball = val, ball
        c = ball.center
        rows.append((idx, c[0], c[1] if len(c) > 1 else 0.0, ball.radius, val, running))
    return best_val, best_ball, rows


# ---------------------------------------------------------------------------
# Muckenhoupt constants
# ---------------------------------------------------------------------------

@dataclass
class ApEstimate:
    """Sampled multiplicative Muckenhoupt constant, or a divergence signal."""

    value: float | None
    divergent: bool
    p: float
    witness_ball: Ball | None
    ball_count: int
    rows: list[tuple[int, float, float, float, float]] = field(default_factory=list)


def _ball_power_mean(field, ball, quad, expo, sing):
    pts, w = ball_nodes(ball, quad, singular=sing)
    vals = field.evaluate(pts)
    return float(np.sum(w * vals ** expo) / w.sum())


def muckenhoupt_ap(
    omega: ScalarWeightField,
    p: float,
    fam: BallFamily,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> ApEstimate:
    """Max over the family of (mean w^p)^(1/p) (mean w^-p')^(1/p').

    A per-ball value is declared divergent when it fails to stabilize under a
    4x radial quadrature refinement or exceeds the overflow guard, which is
    how a non-integrable negative power announces itself.
    """
    if not (1.0 < p < math.inf):
        raise ValueError("p must lie in (1, inf)")
    pc = p / (p - 1.0)
    sing = np.atleast_2d(np.asarray(omega.singular_points or ()).reshape(-1, fam.domain.dim))
    fine = quad.refined(4)
    best, witness, rows = 0.0, None, []
    divergent, div_ball = False, None
    for idx, ball in enumerate(fam.balls):
        m_pos = _ball_power_mean(omega, ball, quad, p, sing)
        m_neg = _ball_power_mean(omega, ball, quad, -pc, sing)
        val = m_pos ** (1.0 / p) * m_neg ** (1.0 / pc)
        m_pos_f = _ball_power_mean(omega, ball, fine, p, sing)
        m_neg_f = _ball_power_mean(omega, ball, fine, -pc, sing)
        val_f = m_pos_f ** (1.0 / p) * m_neg_f ** (1.0 / pc)
        if val_f > OVERFLOW_GUARD or val_f > val * STABILITY_GUARD:
            divergent, div_ball = True, ball
        c = ball.center
        rows.append((idx, c[0], c[1] if len(c) > 1 else 0.0, ball.radius, val_f))
        if val_f > best:
            best, witness = val_f, ball
    if divergent:
        return ApEstimate(None, True, p, div_ball, fam.count, rows)
    return ApEstimate(best, False, p, witness, fam.count, rows)


# ---------------------------------------------------------------------------
# oscillation / smallness reports
# ---------------------------------------------------------------------------

@dataclass
class PropSmallReport:
    """q-mean relative oscillation around the logarithmic mean, vs q * BMO."""

    lhs: float
    bmo: float
    q: float
    ratio: float
    ball: Ball


def prop_small_check(
    field: WeightField | ScalarWeightField,
    ball: Ball,
    q: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
    fam: BallFamily | None = None,
) -> PropSmallReport:
    """lhs = (mean (|W - W_B| / |W_B|)^q)^(1/q) against q * |log W|_BMO(ball).

    The reported ratio lhs / (q bmo) tracks the oscillation constant
    empirically; nothing is asserted about its value here.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    fam = fam or standard_family(ball, levels=3)
    matrix_valued = isinstance(field, WeightField)
    sing = np.atleast_2d(np.asarray(field.singular_points or ()).reshape(-1, ball.dim))
    pts, w = ball_nodes(ball, quad, singular=sing)
    if matrix_valued:
        center = log_mean_matrix(field, ball, quad)
        dev = field.evaluate(pts) - center
        rel = spectral_norm_sym(dev) / spectral_norm_sym(center[None])[0]
        bmo = bmo_matrix(field.log(), fam, quad).value
    else:
        center = log_mean_scalar(field, ball, quad)
        rel = np.abs(field.evaluate(pts) - center) / center
        bmo = bmo_scalar(field.log(), fam, quad).value
    lhs = float((np.sum(w * rel ** q) / w.sum()) ** (1.0 / q))
    ratio = lhs / (q * bmo) if bmo > 0 else (0.0 if lhs == 0.0 else math.inf)
    return PropSmallReport(lhs, bmo, q, ratio, ball)


@dataclass
class SmallScalarReport:
    """Two-sided power-mean bounds around the logarithmic mean."""

    s: float
    bmo_log: float
    condition_met: bool          # bmo_log <= gamma / s for the calibrated gamma
    log_mean: float
    mean_pos: float              # (mean w^s)^(1/s)
    mean_neg: float              # (mean w^-s)^(1/s)
    divergent: bool
    margin_pos: float            # 2 log_mean - mean_pos
    margin_neg: float            # 2 / log_mean - mean_neg
    margin_product: float        # 4 - mean_pos * mean_neg
    gamma: float

    @property
    def holds(self) -> bool:
        return (
            not self.divergent
            and self.margin_pos >= 0
            and self.margin_neg >= 0
            and self.margin_product >= 0
        )


def small_scalar_checks(
    omega: ScalarWeightField,
    ball: Ball,
    s: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
    gamma: float = CALIBRATED.gamma_small,
    fam: BallFamily | None = None,
) -> SmallScalarReport:
    """Check the factor-2 power-mean bounds that smallness of log w buys."""
    if s < 1:
        raise ValueError("s must be at least 1")
    fam = fam or standard_family(ball, levels=3)
    sing = np.atleast_2d(np.asarray(omega.singular_points or ()).reshape(-1, ball.dim))
    bmo_log = bmo_scalar(omega.log(), fam, quad).value
    lm = log_mean_scalar(omega, ball, quad)
    fine = quad.refined(4)
    mean_pos = _ball_power_mean(omega, ball, quad, s, sing) ** (1.0 / s)
    mean_neg = _ball_power_mean(omega, ball, quad, -s, sing) ** (1.0 / s)
    mean_pos_f = _ball_power_mean(omega, ball, fine, s, sing) ** (1.0 / s)
    mean_neg_f = _ball_power_mean(omega, ball, fine, -s, sing) ** (1.0 / s)
    divergent = (
        max(mean_pos_f, mean_neg_f) > OVERFLOW_GUARD
        or mean_pos_f > mean_pos * STABILITY_GUARD
        or mean_neg_f > mean_neg * STABILITY_GUARD
    )
    return SmallScalarReport(
        s=s,
        bmo_log=bmo_log,
        condition_met=bmo_log <= gamma / s,
        log_mean=lm,
        mean_pos=mean_pos_f,
        mean_neg=mean_neg_f,
        divergent=divergent,
        margin_pos=2.0 * lm - mean_pos_f,
        margin_neg=2.0 / lm - mean_neg_f,
        margin_product=4.0 - mean_pos_f * mean_neg_f,
        gamma=gamma,
    )
