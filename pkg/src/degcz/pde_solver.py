"""P1 finite-element energy minimization for matrix-weighted p-Laplace problems.

One-point (barycenter) quadrature makes the nonlinearity pointwise per cell:
with piecewise-linear trial functions the gradient is cell-constant, so the
assembled energy, residual, and Hessian are exact for the discrete integrand.
For p = 2 the solve is a single SPD sparse solve; otherwise a damped Newton
iteration runs on a regularized energy with a geometric continuation of the
regularization parameter.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dataclass_field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .meshing import Mesh, cells_in_ball
from .nfunctions import a_map
from .weight_algebra import Ball, ScalarWeightField, WeightField

__all__ = [
    "NonconvergenceError",
    "DiscreteField",
    "WeakProblem",
    "SolverConfig",
    "SolveResult",
    "interpolate",
    "energy",
    "weak_residual",
    "solve",
    "weighted_lp_norm",
    "weighted_h1_error",
]


class NonconvergenceError(RuntimeError):
    """Raised when the damped Newton iteration stalls; carries the trace."""

    def __init__(self, message: str, trace: list[dict]):
        super().__init__(message)
        self.trace = trace


@dataclass
class DiscreteField:
    """Nodal scalar field on a mesh."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.num_vertices,):
            raise ValueError("value count must equal the vertex count")

    def cell_gradients(self) -> np.ndarray:
        return self.mesh.cell_gradients(self.values)

    def cell_values(self) -> np.ndarray:
        return self.mesh.cell_values(self.values)


def interpolate(mesh: Mesh, fn: Callable[[np.ndarray], np.ndarray]) -> DiscreteField:
    return DiscreteField(mesh, np.asarray(fn(mesh.vertices), dtype=float))


@dataclass
class WeakProblem:
    """Weighted p-Laplace problem with divergence-form data.

    ``data`` maps points to the vector field G (None means zero);
    ``dirichlet`` maps boundary points to trace values.  When ``frozen`` is
    set, the variable weight is replaced by that constant SPD matrix.
    """

    weight: WeightField
    p: float = 2.0
    data: Callable[[np.ndarray], np.ndarray] | None = None
    dirichlet: Callable[[np.ndarray], np.ndarray] | None = None
    frozen: np.ndarray | None = None

    def __post_init__(self):
        if not (1.0 < self.p < math.inf):
            raise ValueError("p must lie in (1, inf)")

    def weight_at(self, points: np.ndarray, scale: np.ndarray | None = None) -> np.ndarray:
        """Weight at quadrature points; a point sitting exactly on a singular
        point is shifted by 1e-12 of the local length scale."""
        if self.frozen is not None:
            m = np.asarray(self.frozen, dtype=float)
            return np.broadcast_to(m, (len(points),) + m.shape)
        pts = np.asarray(points, dtype=float)
        sing = np.asarray(self.weight.singular_points or ()).reshape(-1, pts.shape[-1])
        if len(sing):
            d = np.linalg.norm(pts[:, None, :] - sing[None, :, :], axis=-1).min(axis=1)
            hit = d < 1e-250
            if hit.any():
                warnings.warn("weight evaluated at a singular barycenter; shifting the point")
                h = scale[hit] if scale is not None else np.ones(hit.sum())
                pts = pts.copy()
                pts[hit, 0] += 1e-12 * h
        return self.weight.evaluate(pts)

    def data_at(self, points: np.ndarray) -> np.ndarray:
        if self.data is None:
            return np.zeros((len(points), 2))
        return np.asarray(self.data(points), dtype=float)


@dataclass
class SolverConfig:
    tolerance: float = 1e-10
    max_iterations: int = 60
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40
    eps_start: float = 1e-1
    eps_end: float = 1e-8
    eps_factor: float = 0.1


@dataclass
class SolveResult:
    field: DiscreteField
    trace: list[dict] = dataclass_field(default_factory=list)
    converged: bool = True
    residual: float = math.nan


# ---------------------------------------------------------------------------
# assembled quantities
# ---------------------------------------------------------------------------

def _cell_data(prob: WeakProblem, mesh: Mesh):
    """Per-cell weight, weighted hat gradients, and data in the M-applied frame.

    Since M is symmetric, (M A(M xi)) . grad(lambda) = A(M xi) . (M grad(lambda)),
    so assembly works entirely with M-applied vectors.
    """
    M = prob.weight_at(mesh.barycenters, np.sqrt(mesh.areas))  # (nc, 2, 2)
    Mgrads = np.einsum("cab,clb->cla", M, mesh.hat_gradients)  # (nc, 3, 2)
    G = prob.data_at(mesh.barycenters)
    MG = np.einsum("cab,cb->ca", M, G)
    aG = a_map(prob.p, MG)                                   # A(M G)
    return M, Mgrads, MG, aG


def energy(prob: WeakProblem, u: DiscreteField, eps: float = 0.0) -> float:
    """Dirichlet p-energy minus the data coupling, barycenter quadrature."""
    mesh = u.mesh
    M, _, MG, _ = _cell_data(prob, mesh)
    q = np.einsum("cab,cb->ca", M, u.cell_gradients())
    q2 = (q * q).sum(axis=1) + eps * eps
    bulk = q2 ** (prob.p / 2.0) / prob.p
    data = np.einsum("ca,ca->c", a_map(prob.p, MG), q)
    return float(np.sum(mesh.areas * (bulk - data)))


def _gradient_hessian(prob, mesh, M, Mgrads, aG, u_values, eps):
    """Nodal gradient and sparse Hessian of the regularized energy."""
    p = prob.p
    grads = np.einsum("cld,cl->cd", mesh.hat_gradients, u_values[mesh.cells])
    q = np.einsum("cab,cb->ca", M, grads)                    # (nc, 2)
    q2 = (q * q).sum(axis=1) + eps * eps
    kappa = q2 ** ((p - 2.0) / 2.0)
    flux = kappa[:, None] * q - aG                           # (nc, 2)
    r_cells = np.einsum("cla,ca,c->cl", Mgrads, flux, mesh.areas)  # (nc, 3)
    r = np.zeros(mesh.num_vertices)
    np.add.at(r, mesh.cells, r_cells)

    kprime = (p - 2.0) * q2 ** ((p - 4.0) / 2.0)
    h_cells = np.einsum(
        "c,cla,cma,c->clm", kappa, Mgrads, Mgrads, mesh.areas
    ) + np.einsum("c,cl,cm,c->clm",
                  kprime,
                  np.einsum("cla,ca->cl", Mgrads, q),
                  np.einsum("cma,ca->cm", Mgrads, q),
                  mesh.areas)
    rows = np.repeat(mesh.cells, 3, axis=1).reshape(-1)
    cols = np.tile(mesh.cells, (1, 3)).reshape(-1)
    H = sp.coo_matrix(
        (h_cells.reshape(-1), (rows, cols)),
        shape=(mesh.num_vertices, mesh.num_vertices),
    ).tocsr()
    return r, H


def _stiffness(mesh: Mesh, Mgrads: np.ndarray) -> sp.csr_matrix:
    k_cells = np.einsum("cla,cma,c->clm", Mgrads, Mgrads, mesh.areas)
    rows = np.repeat(mesh.cells, 3, axis=1).reshape(-1)
    cols = np.tile(mesh.cells, (1, 3)).reshape(-1)
    return sp.coo_matrix(
        (k_cells.reshape(-1), (rows, cols)),
        shape=(mesh.num_vertices, mesh.num_vertices),
    ).tocsr()


def weak_residual(
    prob: WeakProblem, u: DiscreteField, fixed_mask: np.ndarray | None = None
) -> tuple[float, np.ndarray]:
    """First-order-condition residual against the free hat functions.

    Returns the residual measured in the discrete dual norm of the weighted
    energy space, sqrt(r K^-1 r) with K the weighted quadratic stiffness,
    plus the raw per-vertex residual vector (zero on constrained rows).
    The dual norm vanishes under refinement for consistent interpolants of a
    weak solution but stays bounded below when the flux has a genuinely
    nonzero divergence, which a pointwise-scaled norm cannot distinguish.
    """
    mesh = u.mesh
    if fixed_mask is None:
        fixed_mask = mesh.boundary_mask
    M, Mgrads, _, aG = _cell_data(prob, mesh)
    q = np.einsum("cab,cb->ca", M, u.cell_gradients())
    flux = a_map(prob.p, q) - aG
    r_cells = np.einsum("cla,ca,c->cl", Mgrads, flux, mesh.areas)
    r = np.zeros(mesh.num_vertices)
    np.add.at(r, mesh.cells, r_cells)
    r[fixed_mask] = 0.0
    free = np.where(~fixed_mask)[0]
    if len(free) == 0:
        return 0.0, r
    K = _stiffness(mesh, Mgrads)
    z = spla.spsolve(K[free][:, free].tocsc(), r[free])
    norm = math.sqrt(max(float(r[free] @ z), 0.0))
    return norm, r


# ---------------------------------------------------------------------------
# solvers
# ---------------------------------------------------------------------------

def _dirichlet_values(prob: WeakProblem, mesh: Mesh, fixed_mask: np.ndarray) -> np.ndarray:
    values = np.zeros(mesh.num_vertices)
    if prob.dirichlet is not None:
        idx = np.where(fixed_mask)[0]
        values[idx] = np.asarray(prob.dirichlet(mesh.vertices[idx]), dtype=float)
    return values


def _linear_solve(prob: WeakProblem, mesh: Mesh, fixed_mask, values0) -> DiscreteField:
    _, Mgrads, _, aG = _cell_data(prob, mesh)
    K = _stiffness(mesh, Mgrads)
    rhs_cells = np.einsum("cla,ca,c->cl", Mgrads, aG, mesh.areas)
    rhs = np.zeros(mesh.num_vertices)
    np.add.at(rhs, mesh.cells, rhs_cells)
    values = values0.copy()
    free = np.where(~fixed_mask)[0]
    fixed = np.where(fixed_mask)[0]
    rhs_i = rhs[free] - K[free][:, fixed] @ values[fixed]
    values[free] = spla.spsolve(K[free][:, free].tocsc(), rhs_i)
    return DiscreteField(mesh, values)


def solve(
    prob: WeakProblem,
    mesh: Mesh,
    cfg: SolverConfig = SolverConfig(),
    fixed_mask: np.ndarray | None = None,
    fixed_values: np.ndarray | None = None,
) -> SolveResult:
    """Minimize the discrete energy subject to the Dirichlet data.

    For p = 2 this is a single SPD solve.  Otherwise a damped Newton method
    with Armijo line search runs through a geometric continuation of the
    regularization parameter; the reported residual is always measured on
    the unregularized problem.  ``fixed_mask`` generalizes the constraint set
    beyond the mesh boundary (used by the frozen replacement problem).
    """
    if fixed_mask is None:
        fixed_mask = mesh.boundary_mask
    if fixed_values is None:
        values0 = _dirichlet_values(prob, mesh, fixed_mask)
    else:
        values0 = np.where(fixed_mask, fixed_values, 0.0)
    if prob.p == 2.0:
        u = _linear_solve(prob, mesh, fixed_mask, values0)
        res = _constrained_residual(prob, u, fixed_mask)
        trace = [{"iteration": 0, "eps": 0.0, "energy": energy(prob, u),
                  "residual": res, "step": 1.0}]
        return SolveResult(u, trace, res <= max(cfg.tolerance, 1e-8), res)

    # warm start from the linear problem with the same weight
    lin = WeakProblem(prob.weight, 2.0, prob.data, prob.dirichlet, prob.frozen)
    values = _linear_solve(lin, mesh, fixed_mask, values0).values.copy()
    interior = np.where(~fixed_mask)[0]
    M, Mgrads, _, aG = _cell_data(prob, mesh)

    eps_list: list[float] = []
    e = cfg.eps_start
    while e > cfg.eps_end:
        eps_list.append(e)
        e *= cfg.eps_factor
    eps_list.append(cfg.eps_end)

    trace: list[dict] = []
    it_total = 0
    for stage, eps in enumerate(eps_list):
        last_stage = stage == len(eps_list) - 1
        stage_tol = cfg.tolerance if last_stage else max(cfg.tolerance, eps * 1e-2)
        for _ in range(cfg.max_iterations):
            r, H = _gradient_hessian(prob, mesh, M, Mgrads, aG, values, eps)
            rn = float(np.linalg.norm(r[interior]))
            scale = 1.0 + float(np.abs(values).max())
            if rn <= stage_tol * scale:
                break
            step = np.zeros_like(values)
            step[interior] = spla.spsolve(
                H[interior][:, interior].tocsc(), -r[interior]
            )
            if not np.all(np.isfinite(step)):
                raise NonconvergenceError("Newton step is not finite", trace)
            e0 = _energy_from_values(prob, mesh, M, aG, values, eps)
            slope = float(r[interior] @ step[interior])
            t = 1.0
            for _bt in range(cfg.max_backtracks):
                cand = values + t * step
                e1 = _energy_from_values(prob, mesh, M, aG, cand, eps)
                if e1 <= e0 + cfg.armijo_c * t * slope:
                    break
                t *= cfg.backtrack
            else:
                raise NonconvergenceError(
                    f"line search failed at eps={eps:g}", trace
                )
            values = values + t * step
            it_total += 1
            trace.append(
                {"iteration": it_total, "eps": eps, "energy": e1,
                 "residual": rn, "step": t}
            )
    u = DiscreteField(mesh, values)
    res = _constrained_residual(prob, u, fixed_mask)
    trace.append({"iteration": it_total, "eps": 0.0,
                  "energy": energy(prob, u), "residual": res, "step": 0.0})
    converged = res <= cfg.tolerance * (1.0 + float(np.abs(values).max()))
    if not converged:
        raise NonconvergenceError(
            f"final residual {res:g} above tolerance {cfg.tolerance:g}", trace
        )
    return SolveResult(u, trace, True, res)


def _constrained_residual(prob: WeakProblem, u: DiscreteField, fixed_mask: np.ndarray) -> float:
    return weak_residual(prob, u, fixed_mask)[0]


def _energy_from_values(prob, mesh, M, aG, values, eps):
    p = prob.p
    grads = np.einsum("cld,cl->cd", mesh.hat_gradients, values[mesh.cells])
    q = np.einsum("cab,cb->ca", M, grads)
    q2 = (q * q).sum(axis=1) + eps * eps
    # data term written against grad u via the assembled weighted flux
    data = np.einsum("ca,ca->c", aG, q)
    return float(np.sum(mesh.areas * (q2 ** (p / 2.0) / p - data)))


# ---------------------------------------------------------------------------
# weighted norms and errors
# ---------------------------------------------------------------------------

def weighted_lp_norm(
    u: DiscreteField, omega: ScalarWeightField, rho: float, region: Ball
) -> float:
    """(mean over the region of (|grad u| omega)^rho)^(1/rho).

    Cells belong to the region when their barycenter does; the mean is taken
    against the covered area.
    """
    if rho < 1:
        raise ValueError("rho must be at least 1")
    mesh = u.mesh
    mask = cells_in_ball(mesh, region.center, region.radius)
    if not mask.any():
        raise ValueError("region contains no cell barycenters")
    grads = np.linalg.norm(u.cell_gradients()[mask], axis=1)
    w = omega.evaluate(mesh.barycenters[mask])
    areas = mesh.areas[mask]
    return float((np.sum((grads * w) ** rho * areas) / areas.sum()) ** (1.0 / rho))


def weighted_h1_error(
    u: DiscreteField,
    exact_grad: Callable[[np.ndarray], np.ndarray],
    omega: ScalarWeightField | None = None,
) -> float:
    """Weighted H1 seminorm distance (mean of (|grad(u - u_exact)| omega)^2)^(1/2)."""
    mesh = u.mesh
    diff = u.cell_gradients() - np.asarray(exact_grad(mesh.barycenters), dtype=float)
    mag = np.linalg.norm(diff, axis=1)
    if omega is not None:
        mag = mag * omega.evaluate(mesh.barycenters)
    return float(math.sqrt(np.sum(mag ** 2 * mesh.areas) / mesh.areas.sum()))
