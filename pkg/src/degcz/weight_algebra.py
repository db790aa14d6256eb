"""SPD matrix calculus, ball quadrature, and logarithmic means of weight fields.

Matrix functions are computed by symmetric eigendecomposition, which stays
robust for the nearly degenerate weights this package targets.  All field
evaluators are batched: they map an ``(m, n)`` array of points to ``(m,)``
scalars or ``(m, n, n)`` matrices, and they must be stateless.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np

__all__ = [
    "NotSymmetricError",
    "NotPositiveDefiniteError",
    "QuadratureFailureError",
    "SYMMETRY_RTOL",
    "symmetrize",
    "spd_exp",
    "spd_log",
    "condition_number",
    "sym_exp_batched",
    "sym_log_batched",
    "spectral_norm_sym",
    "Ball",
    "QuadratureSpec",
    "DEFAULT_QUAD",
    "MEAN_QUAD",
    "ball_nodes",
    "ScalarField",
    "MatrixField",
    "ScalarWeightField",
    "WeightField",
    "log_mean_scalar",
    "log_mean_matrix",
    "SandwichReport",
    "sandwich_check",
    "constant_weight",
    "identity_weight",
    "weight_from_config",
    "scalar_weight_from_config",
    "WEIGHT_KINDS",
    "SCALAR_WEIGHT_KINDS",
]

SYMMETRY_RTOL = 1e-12


class NotSymmetricError(ValueError):
    """Raised when a matrix argument is not symmetric within tolerance."""


class NotPositiveDefiniteError(ValueError):
    """Raised when a matrix argument has a non-positive eigenvalue."""


class QuadratureFailureError(RuntimeError):
    """Raised when a quadrature rule cannot avoid the singular points."""


# ---------------------------------------------------------------------------
# pointwise SPD matrix functions
# ---------------------------------------------------------------------------

def _check_symmetric(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {m.shape}")
    asym = np.abs(m - m.T)
    scale = 1.0 + np.abs(m)
    if np.any(asym > SYMMETRY_RTOL * scale):
        raise NotSymmetricError("matrix is not symmetric within 1e-12 relative tolerance")
    return 0.5 * (m + m.T)


def symmetrize(m: np.ndarray, warn: bool = True) -> np.ndarray:
    """Return ``(m + m.T) / 2``, warning if the defect exceeds tolerance."""
    m = np.asarray(m, dtype=float)
    asym = np.abs(m - m.T)
    if warn and np.any(asym > SYMMETRY_RTOL * (1.0 + np.abs(m))):
        warnings.warn("symmetrizing a matrix with defect above 1e-12", stacklevel=2)
    return 0.5 * (m + m.T)


def spd_exp(h: np.ndarray) -> np.ndarray:
    """Matrix exponential of a symmetric matrix via eigendecomposition.

    The result is symmetric positive definite.
    """
    h = _check_symmetric(h)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(w)) @ v.T


def spd_log(m: np.ndarray) -> np.ndarray:
    """Matrix logarithm of a symmetric positive definite matrix.

    Inverse of :func:`spd_exp`; ``spd_log(inv(M)) == -spd_log(M)``.
    """
    m = _check_symmetric(m)
    w, v = np.linalg.eigh(m)
    if w.min() <= 0.0:
        raise NotPositiveDefiniteError(f"matrix has eigenvalue {w.min():g} <= 0")
    return (v * np.log(w)) @ v.T


def condition_number(m: np.ndarray) -> float:
    """Spectral condition number lambda_max / lambda_min of an SPD matrix."""
    m = _check_symmetric(m)
    w = np.linalg.eigvalsh(m)
    if w.min() <= 0.0:
        raise NotPositiveDefiniteError(f"matrix has eigenvalue {w.min():g} <= 0")
    return float(w.max() / w.min())


# ---------------------------------------------------------------------------
# batched symmetric matrix functions (2x2 closed form, eigh otherwise)
# ---------------------------------------------------------------------------

def _sym_apply_2x2(s: np.ndarray, fn) -> np.ndarray:
    a = s[..., 0, 0]
    b = 0.5 * (s[..., 0, 1] + s[..., 1, 0])
    d = s[..., 1, 1]
    mean = 0.5 * (a + d)
    disc = np.sqrt(np.maximum(0.25 * (a - d) ** 2 + b * b, 0.0))
    lo, hi = mean - disc, mean + disc
    flo, fhi = fn(lo), fn(hi)
    out = np.empty_like(s)
    # spectral projection: S = lo*P_lo + hi*P_hi with P_hi = (S - lo*I)/(hi - lo)
    sep = disc > 1e-14 * (1.0 + np.abs(mean))
    denom = np.where(sep, hi - lo, 1.0)
    coef = np.where(sep, (fhi - flo) / denom, 0.0)
    base = np.where(sep, flo - coef * lo, 0.5 * (flo + fhi))
    out[..., 0, 0] = base + coef * a
    out[..., 0, 1] = coef * b
    out[..., 1, 0] = coef * b
    out[..., 1, 1] = base + coef * d
    return out


def _sym_eigvals(s: np.ndarray) -> np.ndarray:
    """Eigenvalues of a stack of symmetric matrices, ascending."""
    if s.shape[-1] == 2:
        a = s[..., 0, 0]
        b = 0.5 * (s[..., 0, 1] + s[..., 1, 0])
        d = s[..., 1, 1]
        mean = 0.5 * (a + d)
        disc = np.sqrt(np.maximum(0.25 * (a - d) ** 2 + b * b, 0.0))
        return np.stack([mean - disc, mean + disc], axis=-1)
    return np.linalg.eigvalsh(s)


def _sym_apply(s: np.ndarray, fn) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.shape[-1] == 2:
        return _sym_apply_2x2(s, fn)
    w, v = np.linalg.eigh(s)
    return np.einsum("...ik,...k,...jk->...ij", v, fn(w), v)


def sym_exp_batched(h: np.ndarray) -> np.ndarray:
    """Exponential of a stack ``(..., n, n)`` of symmetric matrices."""
    return _sym_apply(h, np.exp)


def sym_log_batched(m: np.ndarray) -> np.ndarray:
    """Logarithm of a stack of SPD matrices; raises on non-positive spectra."""
    m = np.asarray(m, dtype=float)
    w = _sym_eigvals(m)
    wmin = w.min()
    if wmin <= 0.0:
        raise NotPositiveDefiniteError(f"batch contains eigenvalue {wmin:g} <= 0")
    return _sym_apply(m, np.log)


def spectral_norm_sym(s: np.ndarray) -> np.ndarray:
    """Spectral norm of a stack of symmetric matrices."""
    return np.abs(_sym_eigvals(np.asarray(s, dtype=float))).max(axis=-1)


# ---------------------------------------------------------------------------
# balls and quadrature
# ---------------------------------------------------------------------------

def _unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


@dataclass(frozen=True)
class Ball:
    """Open ball given by its center and radius."""

    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return _unit_ball_volume(self.dim) * self.radius ** self.dim

    def scaled(self, factor: float) -> "Ball":
        return Ball(self.center, self.radius * factor)

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.linalg.norm(pts - np.asarray(self.center), axis=-1) < self.radius


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature rule on a ball.

    ``polar-midpoint`` uses midpoint nodes in radius and angle (never placing
    a node at the ball center), ``monte-carlo`` uses seeded uniform sampling.
    ``resolution`` is either a total point count or a (radial, angular) pair.
    """

    scheme: str = "polar-midpoint"
    resolution: int | tuple[int, int] = (64, 32)
    seed: int | None = None

    def __post_init__(self):
        if self.scheme not in ("polar-midpoint", "monte-carlo"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if isinstance(self.resolution, tuple):
            total = self.resolution[0] * self.resolution[1]
            object.__setattr__(self, "resolution", tuple(int(r) for r in self.resolution))
        else:
            total = int(self.resolution)
            object.__setattr__(self, "resolution", total)
        if total < 16:
            raise ValueError("quadrature resolution must be at least 16 nodes")
        if self.scheme == "monte-carlo" and self.seed is None:
            raise ValueError("monte-carlo quadrature requires a seed")

    def counts(self) -> tuple[int, int]:
        if isinstance(self.resolution, tuple):
            return self.resolution
        n_ang = 32
        return max(2, int(self.resolution) // n_ang), n_ang

    def refined(self, factor: int = 4) -> "QuadratureSpec":
        if isinstance(self.resolution, tuple):
            res = (self.resolution[0] * factor, self.resolution[1])
        else:
            res = int(self.resolution) * factor
        return replace(self, resolution=res)


#: default rule for BMO / Muckenhoupt sampling
DEFAULT_QUAD = QuadratureSpec("polar-midpoint", (64, 32))
#: high radial resolution default for logarithmic means (log-singular radial
#: integrands need ~500 radial cells for 1e-6 accuracy)
MEAN_QUAD = QuadratureSpec("polar-midpoint", (512, 32))


def _fibonacci_sphere(count: int) -> np.ndarray:
    k = np.arange(count, dtype=float)
    z = 1.0 - (2.0 * k + 1.0) / count
    phi = k * math.pi * (3.0 - math.sqrt(5.0))
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def _polar_nodes(ball: Ball, nr: int, na: int) -> tuple[np.ndarray, np.ndarray]:
    n = ball.dim
    rho = (np.arange(nr) + 0.5) * (ball.radius / nr)
    dr = ball.radius / nr
    if n == 2:
        theta = (np.arange(na) + 0.5) * (2.0 * math.pi / na)
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        pts = rho[:, None, None] * dirs[None, :, :]
        w = (rho[:, None] * dr * (2.0 * math.pi / na)) * np.ones((1, na))
    elif n == 3:
        dirs = _fibonacci_sphere(na)
        pts = rho[:, None, None] * dirs[None, :, :]
        w = (rho[:, None] ** 2 * dr * (4.0 * math.pi / na)) * np.ones((1, na))
    else:
        raise ValueError("polar-midpoint quadrature supports dimensions 2 and 3")
    pts = pts.reshape(-1, n) + np.asarray(ball.center)
    return pts, w.reshape(-1)


def ball_nodes(
    ball: Ball,
    quad: QuadratureSpec = DEFAULT_QUAD,
    clip: Ball | None = None,
    singular: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and absolute weights for integration over a ball.

    Weights sum to (approximately) the ball volume.  Nodes outside ``clip``
    are dropped, which turns the rule into one for the intersection.  Nodes
    falling onto a singular point are dropped (polar) or resampled
    (monte-carlo).
    """
    sing = None
    if singular is not None and len(singular):
        sing = np.atleast_2d(np.asarray(singular, dtype=float))
    if quad.scheme == "polar-midpoint":
        nr, na = quad.counts()
        pts, w = _polar_nodes(ball, nr, na)
        if sing is not None:
            d = np.linalg.norm(pts[:, None, :] - sing[None, :, :], axis=-1).min(axis=1)
            keep = d > 1e-13 * ball.radius
            pts, w = pts[keep], w[keep]
    else:
        rng = np.random.default_rng(quad.seed)
        count = quad.resolution if isinstance(quad.resolution, int) else (
            quad.resolution[0] * quad.resolution[1]
        )
        n = ball.dim
        pts = np.empty((count, n))
        filled = 0
        for _ in range(100):
            need = count - filled
            if need == 0:
                break
            g = rng.standard_normal((need, n))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            rad = ball.radius * rng.random(need) ** (1.0 / n)
            cand = np.asarray(ball.center) + g * rad[:, None]
            if sing is not None:
                d = np.linalg.norm(cand[:, None, :] - sing[None, :, :], axis=-1).min(axis=1)
                cand = cand[d > 1e-13 * ball.radius]
            take = min(len(cand), need)
            pts[filled:filled + take] = cand[:take]
            filled += take
        if filled < count:
            raise QuadratureFailureError("monte-carlo sampler kept hitting singular points")
        w = np.full(count, ball.volume / count)
    if clip is not None:
        keep = clip.contains(pts)
        pts, w = pts[keep], w[keep]
    return pts, w


# ---------------------------------------------------------------------------
# weight fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarField:
    """Plain scalar field on a ball-shaped domain (no sign requirement)."""

    dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    singular_points: tuple[tuple[float, ...], ...] = ()

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.atleast_2d(np.asarray(points, dtype=float))), dtype=float)


@dataclass(frozen=True)
class MatrixField:
    """Symmetric-matrix-valued field (no definiteness requirement)."""

    dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    singular_points: tuple[tuple[float, ...], ...] = ()

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.atleast_2d(np.asarray(points, dtype=float))), dtype=float)


@dataclass(frozen=True)
class ScalarWeightField:
    """Positive scalar weight, either standalone or derived from a matrix weight."""

    dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    singular_points: tuple[tuple[float, ...], ...] = ()
    provenance: str = "standalone"
    log_fn: Callable[[np.ndarray], np.ndarray] | None = None

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        vals = np.asarray(self.fn(np.atleast_2d(np.asarray(points, dtype=float))), dtype=float)
        return vals

    def log(self) -> ScalarField:
        if self.log_fn is not None:
            fn = self.log_fn
        else:
            base = self.fn
            fn = lambda pts: np.log(base(pts))
        return ScalarField(self.dim, fn, f"log({self.label})", self.singular_points)

    def inverse(self) -> "ScalarWeightField":
        base, logf = self.fn, self.log_fn
        return ScalarWeightField(
            self.dim,
            lambda pts: 1.0 / base(pts),
            f"1/({self.label})",
            self.singular_points,
            self.provenance,
            (lambda pts: -logf(pts)) if logf is not None else None,
        )

    def scaled(self, t: float) -> "ScalarWeightField":
        if t <= 0:
            raise ValueError("scale factor must be positive")
        base, logf = self.fn, self.log_fn
        return ScalarWeightField(
            self.dim,
            lambda pts: t * base(pts),
            f"{t:g}*({self.label})",
            self.singular_points,
            self.provenance,
            (lambda pts: math.log(t) + logf(pts)) if logf is not None else None,
        )


@dataclass(frozen=True)
class WeightField:
    """Position-dependent SPD matrix weight with bounded condition number."""

    dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    singular_points: tuple[tuple[float, ...], ...] = ()
    cond_bound: float | None = None
    log_fn: Callable[[np.ndarray], np.ndarray] | None = None

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.atleast_2d(np.asarray(points, dtype=float))), dtype=float)

    def omega(self) -> ScalarWeightField:
        """Derived scalar weight: the spectral norm of the matrix weight."""
        base = self.fn
        logf = self.log_fn
        # |exp(H)| = exp(lambda_max(H)), so log omega = lambda_max(log M)
        log_fn = (lambda pts: _sym_eigvals(logf(pts)).max(axis=-1)) if logf is not None else None
        return ScalarWeightField(
            self.dim,
            lambda pts: spectral_norm_sym(base(pts)),
            f"|{self.label}|",
            self.singular_points,
            "derived",
            log_fn,
        )

    def squared(self) -> "WeightField":
        base, logf = self.fn, self.log_fn
        return WeightField(
            self.dim,
            lambda pts: np.einsum("...ij,...jk->...ik", base(pts), base(pts)),
            f"({self.label})^2",
            self.singular_points,
            self.cond_bound ** 2 if self.cond_bound is not None else None,
            (lambda pts: 2.0 * logf(pts)) if logf is not None else None,
        )

    def inverse(self) -> "WeightField":
        base, logf = self.fn, self.log_fn
        return WeightField(
            self.dim,
            lambda pts: np.linalg.inv(base(pts)),
            f"({self.label})^-1",
            self.singular_points,
            self.cond_bound,
            (lambda pts: -logf(pts)) if logf is not None else None,
        )

    def scaled(self, t: float) -> "WeightField":
        if t <= 0:
            raise ValueError("scale factor must be positive")
        base, logf = self.fn, self.log_fn
        dim = self.dim
        return WeightField(
            self.dim,
            lambda pts: t * base(pts),
            f"{t:g}*({self.label})",
            self.singular_points,
            self.cond_bound,
            (lambda pts: logf(pts) + math.log(t) * np.eye(dim)) if logf is not None else None,
        )

    def log(self) -> MatrixField:
        if self.log_fn is not None:
            fn = self.log_fn
        else:
            base = self.fn
            fn = lambda pts: sym_log_batched(base(pts))
        return MatrixField(self.dim, fn, f"log({self.label})", self.singular_points)

    def measured_condition(self, points: np.ndarray) -> float:
        w = _sym_eigvals(self.evaluate(points))
        if w.min() <= 0:
            raise NotPositiveDefiniteError("weight field is not positive definite at a sample")
        return float((w.max(axis=-1) / w.min(axis=-1)).max())


# ---------------------------------------------------------------------------
# logarithmic means
# ---------------------------------------------------------------------------

def log_mean_scalar(
    omega: ScalarWeightField, ball: Ball, quad: QuadratureSpec = MEAN_QUAD
) -> float:
    """exp of the ball average of log(omega): the multiplicative mean."""
    pts, w = ball_nodes(ball, quad, singular=np.asarray(omega.singular_points))
    if omega.log_fn is not None:
        logs = omega.log_fn(pts)
    else:
        vals = omega.evaluate(pts)
        if np.any(vals <= 0.0):
            raise NotPositiveDefiniteError("scalar weight is not positive at a quadrature node")
        logs = np.log(vals)
    return float(np.exp(np.sum(w * logs) / np.sum(w)))


def log_mean_matrix(
    M: WeightField, ball: Ball, quad: QuadratureSpec = MEAN_QUAD
) -> np.ndarray:
    """exp of the ball average of log(M); commutes with pointwise inversion."""
    pts, w = ball_nodes(ball, quad, singular=np.asarray(M.singular_points))
    if M.log_fn is not None:
        logs = M.log_fn(pts)
    else:
        logs = sym_log_batched(M.evaluate(pts))
    mean = np.einsum("m,mij->ij", w, logs) / np.sum(w)
    return spd_exp(symmetrize(mean, warn=False))


@dataclass(frozen=True)
class SandwichReport:
    """Eigenvalue margins of Lambda^-1 * omega_B * I <= M_B <= omega_B * I."""

    holds: bool
    lower_margin: float
    upper_margin: float
    matrix_mean: np.ndarray
    scalar_mean: float


def sandwich_check(
    M: WeightField, ball: Ball, quad: QuadratureSpec = MEAN_QUAD
) -> SandwichReport:
    """Check the two-sided comparison of the matrix log-mean with the scalar one."""
    if M.cond_bound is None:
        raise ValueError("sandwich_check requires the field's condition bound")
    m_b = log_mean_matrix(M, ball, quad)
    omega_b = log_mean_scalar(M.omega(), ball, quad)
    w = np.linalg.eigvalsh(m_b)
    lower = float(w.min() - omega_b / M.cond_bound)
    upper = float(omega_b - w.max())
    tol = 1e-10 * omega_b
    return SandwichReport(lower >= -tol and upper >= -tol, lower, upper, m_b, omega_b)


# ---------------------------------------------------------------------------
# registry of named analytic weight families
# ---------------------------------------------------------------------------

def constant_weight(matrix: np.ndarray, label: str = "constant") -> WeightField:
    m = _check_symmetric(matrix)
    w = np.linalg.eigvalsh(m)
    if w.min() <= 0:
        raise NotPositiveDefiniteError("constant weight must be positive definite")
    logm = spd_log(m)
    return WeightField(
        m.shape[0],
        lambda pts: np.broadcast_to(m, pts.shape[:1] + m.shape).copy(),
        label,
        (),
        float(w.max() / w.min()),
        lambda pts: np.broadcast_to(logm, pts.shape[:1] + logm.shape).copy(),
    )


def identity_weight(dim: int) -> WeightField:
    return constant_weight(np.eye(dim), "identity")


def _log_normal_weight(dim: int, seed: int, sigma: float, modes: int) -> WeightField:
    rng = np.random.default_rng(seed)
    mats = rng.standard_normal((modes, dim, dim))
    mats = 0.5 * (mats + np.swapaxes(mats, -1, -2)) * (sigma / math.sqrt(modes))
    waves = rng.integers(-2, 3, size=(modes, dim)).astype(float)
    phases = rng.random(modes) * 2.0 * math.pi

    def log_fn(pts: np.ndarray) -> np.ndarray:
        osc = np.cos(2.0 * math.pi * pts @ waves.T + phases)  # (m, modes)
        return np.einsum("mk,kij->mij", osc, mats)

    norm_sum = float(np.abs(np.linalg.eigvalsh(mats)).max(axis=-1).sum())
    return WeightField(
        dim,
        lambda pts: sym_exp_batched(log_fn(pts)),
        f"log-normal(seed={seed})",
        (),
        math.exp(2.0 * norm_sum),
        log_fn,
    )


def weight_from_config(cfg: Mapping) -> WeightField:
    """Build a matrix weight from a structured config mapping.

    Supported kinds: ``constant``, ``identity``, ``rank-one-radial``
    (the bounded Meyers-type weight), ``power-radial`` (its degenerate
    power-singular variant), and ``log-normal`` (seeded random field).
    """
    kind = cfg.get("kind")
    if kind in ("rank-one-radial", "power-radial"):
        from . import exact_examples

        ex = exact_examples.MeyersExample(
            n=int(cfg.get("n", 2)),
            eps=float(cfg["eps"]),
            variant="plain" if kind == "rank-one-radial" else "degenerate",
        )
        return ex.weight_field()
    if kind == "constant":
        return constant_weight(np.asarray(cfg["matrix"], dtype=float))
    if kind == "identity":
        return identity_weight(int(cfg.get("n", 2)))
    if kind == "log-normal":
        return _log_normal_weight(
            int(cfg.get("n", 2)),
            int(cfg["seed"]),
            float(cfg.get("sigma", 0.3)),
            int(cfg.get("modes", 4)),
        )
    raise KeyError(f"unknown weight kind {kind!r}; known kinds: {sorted(WEIGHT_KINDS)}")


def scalar_weight_from_config(cfg: Mapping) -> ScalarWeightField:
    """Build a scalar weight: ``constant``, ``power`` (|x|^a), or matrix-derived."""
    kind = cfg.get("kind")
    if kind == "constant":
        c = float(cfg.get("value", 1.0))
        if c <= 0:
            raise NotPositiveDefiniteError("constant scalar weight must be positive")
        dim = int(cfg.get("n", 2))
        return ScalarWeightField(
            dim,
            lambda pts: np.full(pts.shape[0], c),
            f"constant({c:g})",
            (),
            "standalone",
            lambda pts: np.full(pts.shape[0], math.log(c)),
        )
    if kind == "power":
        a = float(cfg["exponent"])
        dim = int(cfg.get("n", 2))
        origin = (0.0,) * dim
        return ScalarWeightField(
            dim,
            lambda pts: np.linalg.norm(pts, axis=-1) ** a,
            f"|x|^{a:g}",
            (origin,),
            "standalone",
            lambda pts: a * np.log(np.linalg.norm(pts, axis=-1)),
        )
    return weight_from_config(cfg).omega()


WEIGHT_KINDS = ("constant", "identity", "rank-one-radial", "power-radial", "log-normal")
SCALAR_WEIGHT_KINDS = ("constant", "power") + WEIGHT_KINDS[1:]
