"""Independent reference computations: certified optima for small problems,
grid-search proximal maps, finite-difference subgradient checks and
empirical error-bound estimation.

None of this shares code with the solvers beyond the objective evaluations.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .geometry import AllSpace, Ball, BallSet, Box, project
from .problems.objective import Objective

DEFAULT_RESOLUTION = 1e-3
DEFAULT_TOL = 1e-9


@dataclass
class ReferenceOptimum:
    f_star: float
    w_star: np.ndarray
    gap_bound: float
    method: str
    tol: float = DEFAULT_TOL
    evaluations: int = 0

    def __post_init__(self):
        if not self.gap_bound >= 0:
            raise ValueError("gap_bound must be nonnegative")


def _require_finite(obj):
    if not obj.finite:
        raise ConfigurationError("reference computations need a finite dataset")


# -- certified branch and bound (d <= 3) -----------------------------------


def _cell_bounds(obj, centers, hw):
    """F at a point of each cell and lower bounds of F over the cell.

    For a point p of the cell and a subgradient s at p, F(q) >= F(p) +
    <s, q - p>.  On all of space and on boxes the cell (clipped to the box)
    is itself a box, so the linear term is minimized exactly per coordinate;
    on ball domains the centers are projected and the bound uses the
    Euclidean distance.
    """
    dom = obj.domain
    if isinstance(dom, (AllSpace, Box)):
        lo, hi = centers - hw, centers + hw
        pts = centers
        empty = np.zeros(len(centers), dtype=bool)
        if isinstance(dom, Box):
            lo, hi = np.maximum(lo, dom.lower), np.minimum(hi, dom.upper)
            empty = np.any(lo > hi, axis=1)
            pts = np.clip(centers, dom.lower, dom.upper)
        F = obj.values(pts)
        S = obj.subgrads(pts)
        lb = F + np.minimum(S * (lo - pts), S * (hi - pts)).sum(axis=1)
        F[empty] = np.inf
        lb[empty] = np.inf
        return pts, F, lb
    pts = np.array([project(dom, c) for c in centers])
    F = obj.values(pts)
    S = obj.subgrads(pts)
    reach = np.linalg.norm(pts - centers, axis=1) + hw * math.sqrt(centers.shape[1])
    return pts, F, F - np.linalg.norm(S, axis=1) * reach


def _grid(center, half, m):
    axes = [np.linspace(c - half, c + half, m) for c in center]
    return np.array(list(itertools.product(*axes)), dtype=float)


def _enclosing_box(obj, start, budget):
    """A box certified to contain a minimizer, plus evaluations used."""
    d = obj.dim
    dom = obj.domain
    if isinstance(dom, Box):
        return (dom.lower + dom.upper) / 2, float(np.max(dom.upper - dom.lower)) / 2, 0
    if isinstance(dom, BallSet):
        return dom.ball.center.copy(), dom.ball.radius, 0
    m = 11
    center = np.asarray(start, float)
    half = max(1.0, 2.0 * float(np.max(np.abs(center))))
    used = 0
    for _ in range(60):
        pts = _grid(center, half, m)
        hw = half / (m - 1)
        _, F, lb = _cell_bounds(obj, pts, hw)
        used += len(pts)
        on_edge = np.any(np.abs(np.abs(pts - center) - half) < 1e-12 * max(1.0, half), axis=1)
        best = int(np.argmin(F))
        # a convex function whose boundary values all exceed an interior value
        # attains its minimum inside
        if not on_edge[best] and np.min(lb[on_edge]) > F[best]:
            return center, half, used
        center = pts[best]
        half *= 2.0
        if used > budget:
            break
    raise ConfigurationError("could not enclose a minimizer; is the objective bounded below?")


def _branch_and_bound(obj, budget, tol, start):
    d = obj.dim
    center, half, used = _enclosing_box(obj, start, budget)
    m = 11
    hw = half / (m - 1)
    cells = _grid(center, half, m)
    best_w, best_F = None, math.inf
    gap = math.inf
    offsets = np.array(list(itertools.product((-1, 0, 1), repeat=d)), dtype=float)
    while True:
        pts, F, lb = _cell_bounds(obj, cells, hw)
        used += len(cells)
        i = int(np.argmin(F))
        if F[i] < best_F:
            best_F, best_w = float(F[i]), pts[i].copy()
        keep = lb <= best_F
        gap = best_F - float(np.min(lb[keep]))
        cells = cells[keep]
        if gap <= tol:
            break
        nxt = len(cells) * len(offsets)
        if used + nxt > budget:
            break
        hw_new = hw / 3.0
        cells = (cells[:, None, :] + 2.0 * hw_new * offsets[None, :, :]).reshape(-1, d)
        hw = hw_new
    return ReferenceOptimum(best_F, best_w, max(gap, 0.0), "grid", tol, used)


# -- deterministic averaged subgradient (any d) -----------------------------


def _subgradient_run(obj, T, start):
    w = project(obj.domain, np.asarray(start, float))
    step = 1.0 / math.sqrt(T)
    wsum = np.zeros_like(w)
    half_avg = None
    for t in range(1, T + 1):
        wsum += w
        if t == T // 2:
            half_avg = wsum / t
        g = obj.subgrads(w[None, :])[0]
        w = project(obj.domain, w - step * g)
    avg = wsum / T
    f_half = float(obj.values(half_avg[None, :])[0]) if half_avg is not None else math.inf
    f_end = float(obj.values(avg[None, :])[0])
    # with an O(1/sqrt(T)) rate, F(T) - F* ~ (F(T/2) - F(T)) / (sqrt 2 - 1)
    gap = max(f_half - f_end, 0.0) / (math.sqrt(2.0) - 1.0)
    if not math.isfinite(gap):
        gap = math.inf
    return ReferenceOptimum(f_end, avg, gap, "subgradient", 0.0, T)


def reference_optimum(obj: Objective, budget: int = 2_000_000, tol: float = DEFAULT_TOL,
                      subgradient_steps: int | None = None) -> ReferenceOptimum:
    """High-accuracy F* and a minimizer for a finite objective.

    For d <= 3 a branch-and-bound over grid cells gives a certified gap
    bound; a long deterministic averaged subgradient run (whose gap bound is
    a rate-based estimate) is used for larger d, and the smaller bound wins
    when both apply.
    """
    _require_finite(obj)
    steps = subgradient_steps if subgradient_steps is not None else min(budget, 100_000)
    sub = _subgradient_run(obj, max(steps, 2), np.zeros(obj.dim))
    if obj.dim > 3:
        return sub
    grid = _branch_and_bound(obj, budget, tol, sub.w_star)
    return grid if grid.gap_bound <= sub.gap_bound else sub


# -- brute-force proximal map -----------------------------------------------


def brute_force_prox(reg, eta, ball: Ball, point, resolution=DEFAULT_RESOLUTION):
    """Grid argmin of ½‖u − point‖² + eta·R(u) over the ball, d <= 2.

    A coarse pass locates the minimizer's neighbourhood, then a grid at
    `resolution` around it (plus points on the sphere) gives the answer.
    """
    p = np.array(point, dtype=float, ndmin=1)
    d = p.shape[0]
    if d > 2:
        raise InvalidInputError(f"brute_force_prox supports d <= 2, got d = {d}")
    if not resolution > 0:
        raise InvalidInputError("resolution must be positive")
    c, r = ball.center, ball.radius

    def objective(U):
        return 0.5 * np.sum((U - p) ** 2, axis=1) + eta * _reg_rows(reg, U)

    def candidates(lo, hi, step):
        axes = [np.arange(lo[i], hi[i] + step / 2, step) for i in range(d)]
        U = np.array(list(itertools.product(*axes))) if d == 2 else axes[0][:, None]
        U = U[np.linalg.norm(U - c, axis=1) <= r]
        n_sphere = max(8, int(math.ceil(2 * math.pi * r / step))) if d == 2 else 2
        if d == 2:
            a = np.linspace(0.0, 2 * math.pi, n_sphere, endpoint=False)
            S = c + r * np.stack([np.cos(a), np.sin(a)], axis=1)
        else:
            S = np.array([[c[0] - r], [c[0] + r]])
        S = S[np.all((S >= lo - step) & (S <= hi + step), axis=1)]
        return np.vstack([U, S]) if len(U) else S

    coarse = max(resolution, 2 * r / 400)
    U = candidates(c - r, c + r, coarse)
    best = U[int(np.argmin(objective(U)))]
    if coarse > resolution:
        U = candidates(np.maximum(best - 3 * coarse, c - r), np.minimum(best + 3 * coarse, c + r),
                       resolution)
        U = np.vstack([U, best[None, :]])
        best = U[int(np.argmin(objective(U)))]
    return best


def _reg_rows(reg, U):
    A = np.abs(U)
    if reg.kind == "none":
        return np.zeros(len(U))
    if reg.kind == "l1":
        return reg.lam * A.sum(axis=1)
    if reg.kind == "linf":
        return reg.lam * A.max(axis=1)
    dl = reg.delta
    h = np.where(A <= dl, 0.5 * A**2, dl * (A - 0.5 * dl))
    return reg.lam * h.sum(axis=1)


# -- finite-difference subgradient check ------------------------------------


@dataclass
class SubgradientReport:
    ok: bool
    smooth: bool
    max_error: float
    violations: list = field(default_factory=list)
    h: float = 0.0


def check_subgradient(obj: Objective, w, h=1e-5, subgrad=None, probes=100, seed=0):
    """Compare a subgradient at w with finite differences of the full objective.

    Where forward and backward differences agree the point is treated as
    differentiable and each coordinate must match the central difference to
    within 10·h·max(curvature, 1).  Otherwise the subgradient inequality is
    probed at random nearby points.  Violations are reported, never raised.
    """
    if not h > 0:
        raise InvalidInputError("h must be positive")
    w = np.array(w, dtype=float, ndmin=1)
    g = obj.subgrads(w[None, :])[0] if subgrad is None else np.asarray(subgrad, float)
    F = lambda x: float(obj.values(x[None, :])[0])  # noqa: E731
    f0 = F(w)
    d = w.shape[0]
    smooth = True
    central = np.empty(d)
    curv = np.empty(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        fp, fm = F(w + e), F(w - e)
        fwd, bwd = (fp - f0) / h, (f0 - fm) / h
        central[i] = (fp - fm) / (2 * h)
        curv[i] = abs(fp - 2 * f0 + fm) / h**2
        if abs(fwd - bwd) > math.sqrt(h):
            smooth = False
    violations = []
    max_err = 0.0
    if smooth:
        for i in range(d):
            err = abs(g[i] - central[i])
            max_err = max(max_err, err)
            if err > 10 * h * max(curv[i], 1.0):
                violations.append(("coordinate", i, float(g[i]), float(central[i])))
    else:
        rng = np.random.default_rng(seed)
        for _ in range(probes):
            u = rng.standard_normal(d)
            z = w + 10.0 ** rng.uniform(-4, 0) * u / np.linalg.norm(u)
            slack = F(z) - (f0 + g @ (z - w))
            if slack < -1e-12 * max(1.0, abs(f0)):
                max_err = max(max_err, -slack)
                violations.append(("inequality", z.tolist(), float(slack)))
    return SubgradientReport(not violations, smooth, max_err, violations, h)


# -- empirical local error bound ---------------------------------------------


@dataclass
class EmpiricalLeb:
    eps_grid: list
    dist_estimates: list
    theta: float
    c: float
    c_sup: float
    missing: list = field(default_factory=list)
    resolution: float = DEFAULT_RESOLUTION
    n_rays: int = 0
    clamped: bool = False

    def ratios(self):
        """B̂_ε / ε over the grid (NaN where missing)."""
        return [b / e for b, e in zip(self.dist_estimates, self.eps_grid)]


def _directions(d, n):
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        a = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    i = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * i / n)
    golden = math.pi * (1 + 5**0.5)
    return np.stack([np.cos(golden * i) * np.sin(phi), np.sin(golden * i) * np.sin(phi),
                     np.cos(phi)], axis=1)


def _level_radius(F, f_star, w_star, u, eps, r_max=1e6):
    """r with F(w* + r u) - f* = eps by bracketing and bisection, or None."""
    lo, hi = 0.0, max(eps, 1e-6)
    while F(w_star + hi * u) - f_star < eps:
        lo, hi = hi, 2 * hi
        if hi > r_max:
            return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if F(w_star + mid * u) - f_star < eps:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
    return hi


def measure_leb(obj: Objective, ref: ReferenceOptimum, eps_grid, n_rays=None,
                resolution=DEFAULT_RESOLUTION, max_grid_points=1_000_000) -> EmpiricalLeb:
    """Estimate B_ε = max distance from the ε-level set to the optimal set.

    Level-set points come from bisection along rays out of w*; the optimal
    set is approximated by w* plus the points of a grid (spacing
    `resolution`, coarsened to stay under `max_grid_points`) whose gap is at
    most 2·ref.gap_bound.  log B̂_ε = log c + θ log ε is fitted by least
    squares.
    """
    _require_finite(obj)
    d = obj.dim
    if d > 3:
        raise InvalidInputError("measure_leb supports d <= 3")
    eps = np.asarray(eps_grid, dtype=float)
    if eps.ndim != 1 or len(eps) < 2 or np.any(eps <= 0) or np.any(np.diff(eps) <= 0):
        raise InvalidInputError(
            "eps_grid must hold at least two strictly increasing positive values")
    if n_rays is None:
        n_rays = {1: 2, 2: 64, 3: 200}[d]
    dirs = _directions(d, n_rays)
    w_star = np.asarray(ref.w_star, float)
    F = lambda x: float(obj.values(x[None, :])[0])  # noqa: E731

    level_pts = []
    for e in eps:
        pts = []
        for u in dirs:
            r = _level_radius(F, ref.f_star, w_star, u, e)
            if r is None:
                continue
            p = w_star + r * u
            if not obj.domain.contains(p):
                continue
            gap = F(p) - ref.f_star
            if 0.95 * e <= gap <= 1.05 * e:
                pts.append(p)
        level_pts.append(np.array(pts))

    reach = max((np.max(np.linalg.norm(P - w_star, axis=1)) for P in level_pts if len(P)),
                default=1.0)
    step = max(resolution, 2 * reach / (max_grid_points ** (1.0 / d) - 1))
    m = int(2 * reach / step) + 1
    grid = _grid(w_star, reach, m)
    opt = grid[obj.values(grid) - ref.f_star <= 2 * ref.gap_bound]
    opt = np.vstack([w_star[None, :], opt])

    dist, missing = [], []
    for e, P in zip(eps, level_pts):
        if len(P) == 0:
            dist.append(math.nan)
            missing.append(float(e))
            continue
        D = np.min(np.linalg.norm(P[:, None, :] - opt[None, :, :], axis=2), axis=1)
        dist.append(float(np.max(D)))
    dist_arr = np.array(dist)
    ok = np.isfinite(dist_arr) & (dist_arr > 0)
    if ok.sum() < 2:
        raise ConfigurationError("too few level-set samples to fit an error bound")
    theta, logc = np.polyfit(np.log(eps[ok]), np.log(dist_arr[ok]), 1)
    clamped = False
    if not 0 < theta <= 1.5:
        warnings.warn(f"fitted theta {theta:.3g} clamped to (0, 1.5]", RuntimeWarning,
                      stacklevel=2)
        theta = min(max(theta, 1e-6), 1.5)
        clamped = True
    c_sup = float(np.max(dist_arr[ok] / eps[ok] ** theta))
    return EmpiricalLeb([float(e) for e in eps], dist, float(theta), float(math.exp(logc)),
                        c_sup, missing, step, n_rays, clamped)
