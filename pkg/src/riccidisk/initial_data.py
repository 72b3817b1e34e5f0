"""Admissible initial metrics: constant-curvature caps and perturbations.

The cap family is u_c = log 4 - 2 log(1 + c r^2), the round metric of a
spherical cap pulled back to the unit disk:

    R = 2c,   kappa = (1 - c)/2,   v(M) = 4 pi / (1 + c).

c = 1 is the hemisphere (geodesic boundary), c < 1 has convex boundary.
Perturbations add eps * r^m (1 - r^2)^4 cos(m theta); the profile vanishes
to fourth order at r = 1, which makes the perturbed metric satisfy
d_r R(1) = 0 exactly in the continuum (both the conformal factor and the
flat Laplacian of the perturbation, together with their radial derivatives,
vanish on the boundary).  The discrete projection then only has to remove
an O(h^2) truncation residual, so the correction shrinks under refinement
instead of forcing a mesh-width boundary layer into R.
"""

from dataclasses import dataclass
from math import pi

import numpy as np

from .errors import AmplitudeError, CompatibilityError, UsageError
from .flow import enforce_curvature_neumann
from .geometry import ConformalMetric, make_metric, scalar_curvature
from .grid import (
    PolarGrid,
    radial_derivative_at_boundary,
    radial_derivative_at_boundary_interior,
)


@dataclass
class CapParams:
    """Curvature scale c > 0; boundary is convex iff c <= 1."""

    c: float

    def validate(self):
        if self.c <= 0.0:
            raise UsageError(f"cap parameter c must be positive, got {self.c}")

    @property
    def kappa(self):
        return 0.5 * (1.0 - self.c)

    @property
    def volume(self):
        return 4.0 * pi / (1.0 + self.c)


@dataclass
class PerturbationParams:
    epsilon: float
    mode: int = 0

    def validate(self):
        if self.mode < 0:
            raise UsageError(f"angular mode must be nonnegative, got {self.mode}")


def _cap_u(c, r):
    return np.log(4.0) - 2.0 * np.log1p(c * r * r)


def spherical_cap(p: CapParams, grid: PolarGrid, normalize_volume=False) -> ConformalMetric:
    """Constant-curvature cap; ``normalize_volume`` rescales to v(M) = 4 pi.

    The rescaled metric (1 + c) g_c has R = 2c/(1 + c) and remains convex
    for c < 1; it is the admissible family for the Euler-characteristic
    form of the entropy, which requires initial volume 4 pi chi.
    """
    p.validate()
    u = np.broadcast_to(_cap_u(p.c, grid.r)[:, None], (grid.n_r, grid.n_theta)).copy()
    if normalize_volume:
        u += np.log(1.0 + p.c)
    return enforce_curvature_neumann(make_metric(u, grid))


def perturbed_cap(base: CapParams, p: PerturbationParams, grid: PolarGrid) -> ConformalMetric:
    """Cap plus a compatibility-projected angular perturbation.

    Raises AmplitudeError (with the bisected maximal admissible amplitude)
    when the requested epsilon destroys curvature positivity.
    """
    base.validate()
    p.validate()
    if p.mode > 0 and grid.n_theta == 1:
        raise UsageError("angular modes m > 0 need the full 2-d grid (n_theta > 1)")

    def build(eps):
        r = grid.r[:, None]
        u = _cap_u(base.c, grid.r)[:, None] + eps * r**p.mode * (1.0 - r * r) ** 4 * np.cos(
            p.mode * grid.theta
        )[None, :]
        m, _ = project_compatibility(make_metric(np.ascontiguousarray(u), grid))
        return m

    m = build(p.epsilon)
    if float(scalar_curvature(m).min()) > 0.0:
        return m

    # bisect for the largest admissible amplitude to report in the error
    lo, hi = 0.0, abs(p.epsilon)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        trial = build(mid if p.epsilon >= 0 else -mid)
        if float(scalar_curvature(trial).min()) > 0.0:
            lo = mid
        else:
            hi = mid
    raise AmplitudeError(
        f"epsilon = {p.epsilon} destroys curvature positivity; "
        f"max admissible |epsilon| is about {lo:.4g}",
        max_epsilon=lo,
    )


PROJECTION_TOL = 1.0e-8
PROJECTION_MAX_ITER = 20
_BAND_RINGS = 4


def _band_profile(grid):
    """Smooth quintic ramp supported on the last 4 radial rings.

    The profile and its first two derivatives vanish at the inner band
    edge, so the correction does not kink R there; its third derivative
    at r = 1 is what actually moves d_r R(1).
    """
    x = (grid.r - (1.0 - _BAND_RINGS * grid.dr)) / (_BAND_RINGS * grid.dr)
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x * x)


def _smooth_residual(u, grid):
    """Ghost-independent one-sided d_r R at r = 1.

    Uses the rings n-2, n-3, n-4 of R, which do not touch the ghost ring,
    so this measures the incompatibility of the metric itself rather than
    of any particular closure.
    """
    R = scalar_curvature(make_metric(u, grid))
    return radial_derivative_at_boundary_interior(R, grid)


def project_compatibility(m: ConformalMetric):
    """Minimal smooth correction making the metric discretely compatible.

    Adds psi(theta) * B(r) to u, with B a fixed smooth ramp on the band
    r in [1 - 4 dr, 1], and solves for psi by Newton so that the one-sided
    d_r R(1) of the smoothly extended metric vanishes below PROJECTION_TOL;
    the ghost ring is then re-enforced.  Returns (metric, correction norm);
    idempotent within tolerance.
    """
    grid = m.grid
    profile = _band_profile(grid)[:, None]
    psi = np.zeros(grid.n_theta)

    res = _smooth_residual(m.u, grid)
    scale = 1.0 + float(np.max(np.abs(res)))
    # the residual is computed through /dr^2 (curvature) and /dr (stencil),
    # so its roundoff floor scales like eps / dr^3
    floor = 20.0 * np.finfo(np.float64).eps / grid.dr**3
    tol = PROJECTION_TOL * scale + floor
    for _ in range(PROJECTION_MAX_ITER):
        if float(np.max(np.abs(res))) <= tol:
            break
        # dense Jacobian w.r.t. psi; coupling is short-range in theta
        n_t = grid.n_theta
        jac = np.empty((n_t, n_t))
        h = 1.0e-7
        base_u = m.u + psi[None, :] * profile
        for j in range(n_t):
            bump = np.zeros(n_t)
            bump[j] = h
            jac[:, j] = (_smooth_residual(base_u + bump[None, :] * profile, grid) - res) / h
        psi = psi - np.linalg.solve(jac, res)
        res = _smooth_residual(m.u + psi[None, :] * profile, grid)
    else:
        raise CompatibilityError(
            f"compatibility projection did not converge in {PROJECTION_MAX_ITER} "
            f"Newton iterations (residual {float(np.max(np.abs(res))):.3e})",
            residual=float(np.max(np.abs(res))),
        )

    u_new = m.u + psi[None, :] * profile
    projected = enforce_curvature_neumann(make_metric(u_new, grid))
    correction = float(np.max(np.abs(psi)))
    return projected, correction


def compatibility_residual(m: ConformalMetric) -> float:
    """max over boundary nodes of |d_r R| at r = 1 (one-sided stencil)."""
    R = scalar_curvature(m)
    return float(np.max(np.abs(radial_derivative_at_boundary(R, m.grid))))
