"""Complex-function machinery behind the lower-estimate arguments.

Works on entire functions given as Laplace transforms of compactly supported
measures or distributions: locating the ray maximum of |F|, detecting the
(even) vanishing order at the maximizer, certifying a small-disk/large-circle
radius pair, and constructing the piecewise-linear Jordan curves that separate
the maximizer from the rest of the spectrum-relevant region.

All curve constructions are a-posteriori certified by dense sampling; the
underlying existence results guarantee that failure only ever signals
insufficient grid resolution.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllZeroError,
    ComponentClosedError,
    NoCircleFoundError,
    OrderNotFoundError,
    SimplicityRepairFailedError,
    WindowViolationError,
)
from .measures import (
    CompactDistribution,
    CompactMeasure,
    laplace,
    laplace_distribution,
    tv_moment,
)


class Transform:
    """Vectorized evaluator for the Laplace transform of a measure/distribution.

    Carries enough metadata (total variation, support bounds) to pick search
    windows from the decay bound |F(x)| <= tv0 * exp(-x * support_min).
    """

    def __init__(self, source, negate: bool = False):
        if isinstance(source, Transform):
            self.source = source.source
            negate = negate ^ source.negated
        else:
            self.source = source
        self.negated = negate
        src = self.source
        if isinstance(src, CompactMeasure):
            self._components = [src]
        elif isinstance(src, CompactDistribution):
            self._components = list(src.components)
        else:
            raise TypeError(f"cannot build a transform from {type(source)!r}")
        self.support_min = src.support_min
        self.support_max = src.support_max
        self.is_real = src.is_real
        self.tv0 = sum(tv_moment(m, 0) for m in self._components)

    def __call__(self, z):
        src = self.source
        if isinstance(src, CompactMeasure):
            val = laplace(src, z)
        else:
            val = laplace_distribution(src, z)
        return -val if self.negated else val

    def decay_bound(self, x: float) -> float:
        """Upper bound for |F| on the real ray at x >= 0."""
        total = 0.0
        for j, m in enumerate(self._components):
            if m.is_zero:
                continue
            total += x**j * tv_moment(m, 0) * math.exp(-x * m.support_min)
        return total

    def negate(self) -> "Transform":
        return Transform(self, negate=True)


def as_transform(source) -> Transform:
    return source if isinstance(source, Transform) else Transform(source)


@dataclass(frozen=True)
class RayMaximum:
    """Maximizer of |F| on [0, inf), normalized so the max value is positive."""

    alpha: float
    value: float
    sign_flipped: bool


@dataclass(frozen=True)
class JordanCurve:
    """Certified piecewise-linear curve through the upper half-plane.

    gamma1_vertices runs from a1 to a2 inside the level region
    {|F| > |F(a0)|}; full_vertices closes the curve through the real axis and
    the mirror arc.
    """

    alpha: float
    a0: complex
    a1: complex
    a2: complex
    a3: complex
    m: int
    delta: float
    gamma1_vertices: tuple[complex, ...]
    full_vertices: tuple[complex, ...]
    f_alpha: float = 0.0
    f_a0_abs: float = 0.0
    cond2_margin: float = 0.0


@dataclass(frozen=True)
class SeparationCurve:
    """Upper-quadrant separation path for the scaled transform z -> F(u z)."""

    alpha_k: float
    v_k: complex
    gamma_k0_vertices: tuple[complex, ...]
    radius: float
    u: float = 1.0
    r_window: float = 0.0


@dataclass(frozen=True)
class GridParams:
    """Resolution controls for the level-set flood fill."""

    nx: int = 256
    ny: int = 256
    x_max: float | None = None
    y_max: float | None = None
    max_refinements: int = 4
    seg_samples: int = 1000


# ---------------------------------------------------------------------------
# ray maximum


def ray_max(source, decay_floor: float = 1e-9, grid_points: int = 4096) -> RayMaximum:
    """Locate alpha >= 0 maximizing |F| on the positive ray.

    The window [0, X] is grown until the decay bound falls below
    decay_floor times the best value seen, then the grid optimum is refined
    by golden-section search.
    """
    F = as_transform(source)

    x_hi = max(4.0 * F.support_max, 1.0)
    for _ in range(60):
        if F.decay_bound(x_hi) < decay_floor * max(F.tv0, 1e-300):
            break
        x_hi *= 1.5

    xs = np.linspace(0.0, x_hi, grid_points)
    vals = np.abs(F(xs))
    best = float(np.max(vals))
    if best < decay_floor * max(F.tv0, 1e-300):
        raise AllZeroError("transform is numerically zero on the sampled ray")
    i = int(np.argmax(vals))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, len(xs) - 1)]

    alpha = _golden_max(lambda x: abs(F(x)), lo, hi)
    value = abs(F(alpha))

    sign_flipped = False
    if F.is_real:
        raw = complex(F(alpha)).real
        if raw < 0:
            sign_flipped = True
    return RayMaximum(alpha=float(alpha), value=float(value), sign_flipped=sign_flipped)


def _golden_max(f, lo, hi, iters: int = 90):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        if b - a < 1e-14 * max(1.0, abs(a)):
            break
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# Taylor coefficients and vanishing order


def taylor_coefficients(F, alpha: float, radius: float, count: int, nodes: int = 256):
    """Taylor coefficients of F at alpha via trapezoidal contour integrals.

    Exponentially accurate for entire functions; avoids the cancellation of
    high-order finite differences.
    """
    F = as_transform(F)
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    ring = alpha + radius * np.exp(1j * theta)
    vals = F(ring)
    coeffs = []
    for k in range(count):
        ck = np.mean(vals * np.exp(-1j * k * theta)) / radius**k
        coeffs.append(complex(ck))
    return coeffs


def vanishing_order(
    F, alpha: float, radius: float | None = None, tol: float = 1e-9, max_order: int = 12
):
    """Smallest k >= 1 with F^{(k)}(alpha) != 0, plus the Taylor coefficient.

    Returns (m, F^{(m)}(alpha) / m!).
    """
    F = as_transform(F)
    if radius is None:
        radius = max(alpha / 4.0, 0.05)
    coeffs = taylor_coefficients(F, alpha, radius, max_order + 1)
    scale_ref = max(abs(c) * radius**k for k, c in enumerate(coeffs))
    for k in range(1, max_order + 1):
        if abs(coeffs[k]) * radius**k > tol * max(scale_ref, 1.0):
            return k, coeffs[k]
    raise OrderNotFoundError(
        f"no Taylor coefficient above tolerance up to order {max_order}"
    )


# ---------------------------------------------------------------------------
# small-disk / big-circle radii


@dataclass(frozen=True)
class RadiusPair:
    r: float
    R: float
    delta_circle: float


def babylem_radius(
    F,
    margin: float = 1e-3,
    circle_samples: int = 1024,
    candidates: int = 140,
) -> RadiusPair:
    """Radii r < R with sup_{|z|<=r} |F| < min_{|z|=R} |F| - margin.

    Scans candidate circles for one staying well away from zeros of F, then
    grows r from 0 while the boundary maximum (= the disk sup, by the maximum
    principle) stays below the certified circle minimum.
    """
    F = as_transform(F)
    theta = 2.0 * np.pi * np.arange(circle_samples) / circle_samples
    ring = np.exp(1j * theta)

    best_R, best_delta = None, 0.0
    for R in np.geomspace(1e-2, 50.0, candidates):
        dmin = float(np.min(np.abs(F(R * ring))))
        if dmin > best_delta:
            best_R, best_delta = float(R), dmin
    if best_R is None or best_delta <= margin:
        raise NoCircleFoundError("no candidate circle avoids the zeros of F")

    # re-certify the chosen circle at higher angular density
    theta_fine = 2.0 * np.pi * np.arange(4 * circle_samples) / (4 * circle_samples)
    delta_circle = float(np.min(np.abs(F(best_R * np.exp(1j * theta_fine)))))
    if delta_circle <= margin:
        raise NoCircleFoundError("chosen circle failed the dense re-check")

    r_found = 0.0
    sup_inside = 0.0
    for r in np.linspace(best_R / 500.0, best_R, 500):
        sup_inside = max(sup_inside, float(np.max(np.abs(F(r * ring[::4])))))
        if sup_inside < delta_circle - margin:
            r_found = float(r)
        else:
            break
    if r_found == 0.0:
        raise NoCircleFoundError("no positive inner radius certified")
    return RadiusPair(r=r_found, R=best_R, delta_circle=delta_circle)


# ---------------------------------------------------------------------------
# Jordan curve construction


def jordan_curve(
    F,
    ray: RayMaximum,
    grid: GridParams = GridParams(),
    min_axis_height: float = 0.0,
) -> JordanCurve:
    """Constructive version of the upper-half-plane separation curve.

    The level region U = {|F| > |F(a0)|} is explored by flood fill on a
    rectangular grid; the connected component V of a1 must reach the
    imaginary axis, which the underlying maximum-principle argument
    guarantees, so exhaustion of the refinement budget raises
    ComponentClosedError (resolution, not mathematics).
    """
    F = as_transform(F)
    alpha = ray.alpha
    f_alpha = ray.value
    m, _coeff = vanishing_order(F, alpha)

    # --- a1 and the condition (i) fit
    seg_n = grid.seg_samples
    rho = max(alpha / 4.0, 0.05)
    a1 = None
    delta = 0.0
    for _ in range(48):
        cand = alpha + rho * np.exp(1j * np.pi / m)
        ts = np.linspace(0.0, 1.0, seg_n + 1)[1:]
        zs = alpha + ts * (cand - alpha)
        vals = np.abs(F(zs))
        ratios = (vals - f_alpha) / np.abs(zs - alpha) ** m
        dmin = float(np.min(ratios))
        if dmin > 0.0 and vals[-1] > f_alpha:
            a1 = complex(cand)
            delta = dmin
            break
        rho *= 0.5
    if a1 is None:
        raise OrderNotFoundError("could not fit a positive delta for condition (i)")

    f_a1 = abs(complex(F(a1)))

    # --- a0 strictly between in modulus
    ts = np.linspace(0.0, 1.0, seg_n + 1)
    seg = alpha + ts * (a1 - alpha)
    seg_vals = np.abs(F(seg))
    target = 0.5 * (f_alpha + f_a1)
    inner = np.where((seg_vals > f_alpha) & (seg_vals < f_a1))[0]
    if len(inner) == 0:
        raise OrderNotFoundError("no admissible a0 on [alpha, a1]")
    i0 = inner[np.argmin(np.abs(seg_vals[inner] - target))]
    a0 = complex(seg[i0])
    f_a0 = float(seg_vals[i0])

    # --- flood fill for the component V of a1 in {|F| > |F(a0)|}
    x_max = grid.x_max if grid.x_max is not None else 3.0 * max(alpha, 1.0)
    y_max = grid.y_max if grid.y_max is not None else 6.0 * max(alpha, 1.0)
    y_max = max(y_max, 2.0 * min_axis_height + 1e-9)
    nx, ny = grid.nx, grid.ny

    for refinement in range(grid.max_refinements + 1):
        result = _flood_fill_curve(
            F, alpha, a1, f_a0=f_a0,
            nx=nx, ny=ny, x_max=x_max, y_max=y_max,
            min_axis_height=min_axis_height,
        )
        if result is not None:
            break
        nx = min(2 * nx, 4096)
        ny = min(2 * ny, 4096)
        y_max *= 1.5
        x_max *= 1.2
    else:
        raise ComponentClosedError(
            "level-set component never reached the imaginary axis "
            f"(grid {nx}x{ny}, extent {x_max:.3g}x{y_max:.3g})"
        )
    path_points, a2, a3 = result

    # --- simplify the grid path inside U, keeping a strict level margin
    level_margin = 1e-12 * max(f_a0, 1.0)

    def seg_ok(z1, z2):
        ts_ = np.linspace(0.0, 1.0, 64)
        zz = z1 + ts_ * (z2 - z1)
        return bool(np.all(np.abs(F(zz)) > f_a0 + level_margin))

    gamma1 = _simplify_path([a1] + path_points + [a2], seg_ok)
    if not _is_simple_polyline(gamma1):
        gamma1 = [a1] + path_points + [a2]
        if not _is_simple_polyline(gamma1):
            raise SimplicityRepairFailedError("grid path self-intersects")

    full = (
        [complex(alpha)]
        + gamma1
        + [a3, a3.conjugate(), a2.conjugate()]
        + [z.conjugate() for z in reversed(path_points)]
        + [a1.conjugate(), complex(alpha)]
    )
    if not _is_simple_polyline(full, closed=True):
        raise SimplicityRepairFailedError("full curve self-intersects")

    # --- condition (ii) certification on Gamma_1 and [a2, a3]
    cond2_margin = math.inf
    check_pts = list(zip(gamma1, gamma1[1:])) + [(a2, a3)]
    for z1, z2 in check_pts:
        ts_ = np.linspace(0.0, 1.0, max(8, seg_n // max(1, len(check_pts))))
        zz = z1 + ts_ * (z2 - z1)
        cond2_margin = min(cond2_margin, float(np.min(np.abs(F(zz)) - f_a0)))

    return JordanCurve(
        alpha=float(alpha),
        a0=a0,
        a1=complex(a1),
        a2=complex(a2),
        a3=complex(a3),
        m=int(m),
        delta=float(delta),
        gamma1_vertices=tuple(gamma1),
        full_vertices=tuple(full),
        f_alpha=float(f_alpha),
        f_a0_abs=f_a0,
        cond2_margin=float(cond2_margin),
    )


def _flood_fill_curve(F, alpha, a1, f_a0, nx, ny, x_max, y_max,
                      min_axis_height):
    """BFS the superlevel component of a1; return (path, a2, a3) or None."""
    dx = x_max / nx
    dy = y_max / ny
    xc = (np.arange(nx) + 0.5) * dx
    yc = (np.arange(ny) + 0.5) * dy
    Z = xc[None, :] + 1j * yc[:, None]  # [row=j (y), col=i (x)]
    absF = np.abs(F(Z))
    mask = absF > f_a0

    i1 = min(int(a1.real / dx), nx - 1)
    j1 = min(int(a1.imag / dy), ny - 1)
    if not mask[j1, i1]:
        # a1 sits on a cell whose center fell below the level; nudge to the
        # neighboring cell with the largest |F|
        jlo, jhi = max(j1 - 1, 0), min(j1 + 2, ny)
        ilo, ihi = max(i1 - 1, 0), min(i1 + 2, nx)
        sub = absF[jlo:jhi, ilo:ihi]
        jj, ii = np.unravel_index(np.argmax(sub), sub.shape)
        j1, i1 = jlo + jj, ilo + ii
        if not mask[j1, i1]:
            return None

    # BFS with parents
    parent = -np.ones((ny, nx, 2), dtype=np.int32)
    seen = np.zeros((ny, nx), dtype=bool)
    seen[j1, i1] = True
    queue = deque([(j1, i1)])
    contact = None
    while queue:
        j, i = queue.popleft()
        if i == 0 and yc[j] > min_axis_height:
            if contact is None or yc[j] < yc[contact[0]]:
                contact = (j, i)
        for dj, di in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            j2, i2 = j + dj, i + di
            if 0 <= j2 < ny and 0 <= i2 < nx and mask[j2, i2] and not seen[j2, i2]:
                seen[j2, i2] = True
                parent[j2, i2] = (j, i)
                queue.append((j2, i2))
    if contact is None:
        return None

    jc, ic = contact
    a2 = complex(xc[ic], yc[jc])
    a3 = 1j * yc[jc]
    # certify the actual axis point; scan within the contact cell if needed
    if abs(complex(F(a3))) <= f_a0:
        ys = yc[jc] + dy * np.linspace(-0.5, 0.5, 41)
        ys = ys[(ys > min_axis_height) & (ys > 0)]
        vals = np.abs(F(1j * ys))
        k = int(np.argmax(vals))
        if vals[k] <= f_a0:
            return None
        a3 = 1j * float(ys[k])

    # path from contact back to a1 via parents
    cells = []
    j, i = jc, ic
    while (j, i) != (j1, i1):
        cells.append((j, i))
        j, i = parent[j, i]
        if j < 0:
            return None
    cells.append((j1, i1))
    cells.reverse()  # a1 cell ... contact cell
    points = [complex(xc[i], yc[j]) for j, i in cells[1:-1]]
    return points, a2, a3


def _simplify_path(points, seg_ok):
    """Greedy line-of-sight simplification keeping segments inside the level set."""
    out = [points[0]]
    i = 0
    n = len(points)
    while i < n - 1:
        j = n - 1
        while j > i + 1 and not seg_ok(points[i], points[j]):
            j -= 1
        # j == i + 1 falls back to the raw grid step
        out.append(points[j])
        i = j
    return out


def _segments_intersect(p1, p2, q1, q2, eps=1e-12):
    def cross(o, a, b):
        return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)

    d1 = cross(q1, q2, p1)
    d2 = cross(q1, q2, p2)
    d3 = cross(p1, p2, q1)
    d4 = cross(p1, p2, q2)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and (
        (d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)
    ):
        return True
    return False


def _is_simple_polyline(points, closed: bool = False) -> bool:
    pts = list(points)
    if closed and abs(pts[0] - pts[-1]) < 1e-15:
        pts = pts[:-1]
    n = len(pts)
    segs = []
    last = n if closed else n - 1
    for i in range(last):
        segs.append((pts[i], pts[(i + 1) % n]))
    for i in range(len(segs)):
        for j in range(i + 2, len(segs)):
            if closed and i == 0 and j == len(segs) - 1:
                continue  # sharing the start vertex
            if _segments_intersect(*segs[i], *segs[j]):
                return False
    return True


# ---------------------------------------------------------------------------
# separation curve for the scaled transform


def separation_curve(
    F,
    u: float,
    R_m: float,
    ray: RayMaximum | None = None,
    grid: GridParams = GridParams(),
    radii: RadiusPair | None = None,
) -> SeparationCurve:
    """Curve joining alpha/u on the real axis to v_k on the imaginary axis,
    with |v_k| > R_m and |F(u z)| >= |F(alpha)| along the path.

    Constructed at the natural scale of F (the curve for (F, u) is the curve
    of z -> F(u z) rescaled by 1/u), which keeps the flood-fill grid
    resolution independent of u.
    """
    F = as_transform(F)
    if radii is None:
        radii = babylem_radius(F)
    if u * R_m >= radii.r:
        raise WindowViolationError(
            f"window violated: u*R_m = {u * R_m:.6g} >= r = {radii.r:.6g}"
        )
    if ray is None:
        ray = ray_max(F)
    curve = jordan_curve(F, ray, grid=grid, min_axis_height=u * R_m)
    gamma0 = (
        [complex(curve.alpha)]
        + list(curve.gamma1_vertices)
        + [curve.a3]
    )
    scaled = tuple(z / u for z in gamma0)
    return SeparationCurve(
        alpha_k=curve.alpha / u,
        v_k=curve.a3 / u,
        gamma_k0_vertices=scaled,
        radius=abs(curve.a3) / u,
        u=u,
        r_window=radii.r,
    )
