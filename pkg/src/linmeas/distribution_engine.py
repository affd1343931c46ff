"""Transformation laws for probability densities on uniform grids.

The measurement interaction turns the four input densities

    f(q)  object position      F(Q)  meter position
    g(p)  object momentum      G     meter momentum *reflected*, G(x) = |Phi(-x)|^2

into the readout density F_out and the output object-momentum density
g_out.  For unit gains these are plain convolutions; for a general
interaction each input is first rescaled by ``rescale`` (f_k(x) = k·f(kx))
and the convolution is rescaled once more by the determinant.

All quadrature is midpoint-rule on uniform grids.  Where two grids must
share a step, the coarser one is resampled by exactly integrating its
piecewise-linear interpolant over the new cells, which preserves total
mass to machine precision (plain point sampling loses ~1e-5 of mass at
irrational step ratios and would break the normalization invariant).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import (GridTooNarrow, MismatchedGrids, NonpositiveScale)
from .interaction_core import InteractionParams, params_from_gains, new_params
from .moment_engine import ObjectStateSpec, ProbeStateSpec

#: Largest grid the resampling helpers will materialize.
MAX_RESAMPLE_POINTS = 2 ** 23

#: Convolutions below this size run by direct summation, above by FFT.
DIRECT_CONVOLVE_LIMIT = 4096

#: Tail mass a resampling target may cut off before it is an error.
RESAMPLE_TAIL_TOL = 1e-12

#: Allowed deviation of step * sum(values) from one.
NORMALIZATION_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class GriddedDistribution:
    """A nonnegative probability density sampled on a uniform grid.

    ``values[i]`` is the density at ``origin + i * step`` (cell centers
    of the midpoint rule).  Normalization step·Σvalues = 1 within 1e-6
    is enforced at construction, as are nonnegativity and a minimum of
    16 samples.
    """

    origin: float
    step: float
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "step", float(self.step))
        object.__setattr__(self, "values", values)
        if not self.step > 0.0:
            raise NonpositiveScale(f"grid step must be > 0, got {self.step!r}")
        if values.ndim != 1 or values.size < 16:
            raise ValueError(f"need at least 16 samples, got shape {values.shape}")
        if values.min() < 0.0:
            raise ValueError(f"negative density sample {values.min()!r}")
        mass = self.step * float(values.sum())
        if abs(mass - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"density mass {mass!r} is not 1 within "
                             f"{NORMALIZATION_TOL}")

    @property
    def n(self) -> int:
        return self.values.size

    def coordinates(self) -> np.ndarray:
        return self.origin + self.step * np.arange(self.n)

    def mass(self) -> float:
        return self.step * float(self.values.sum())

    def span(self) -> tuple[float, float]:
        """Outer edges of the first and last midpoint cells."""
        return (self.origin - 0.5 * self.step,
                self.origin + self.step * (self.n - 0.5))


@dataclass(frozen=True)
class MomentSummary:
    """First moment and variance of a gridded density."""

    mean: float
    variance: float

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)


def moments(f: GriddedDistribution) -> MomentSummary:
    """Midpoint-rule mean and variance: m = Σ xᵢ f(xᵢ) h, σ² likewise."""
    x = f.coordinates()
    mean = f.step * float(np.dot(x, f.values))
    variance = f.step * float(np.dot((x - mean) ** 2, f.values))
    return MomentSummary(mean=mean, variance=variance)


def rescale(f: GriddedDistribution, k: float) -> GriddedDistribution:
    """The density f_k(x) = k·f(kx): horizontal squeeze by k, area kept.

    The grid comes along for free (origin/k, step/k), so no resampling
    error is incurred; σ²(f_k) = σ²(f)/k².
    """
    k = float(k)
    if not k > 0.0:
        raise NonpositiveScale(f"rescale factor must be > 0, got {k!r}")
    return GriddedDistribution(f.origin / k, f.step / k, f.values * k)


def reflect(f: GriddedDistribution) -> GriddedDistribution:
    """Density of −X when f is the density of X."""
    return GriddedDistribution(-(f.origin + f.step * (f.n - 1)), f.step,
                               f.values[::-1])


def _interpolant_cdf(f: GriddedDistribution, x: np.ndarray) -> tuple[np.ndarray, float]:
    """CDF of the mass-complete interpolant of ``f`` at points ``x``.

    Between knots the density is linear; over the half cell hanging past
    each end knot it stays at the edge value, so the interpolant carries
    exactly the midpoint-rule mass h·Σvalues even when the density does
    not decay at the grid edges (uniforms, truncated supports).  Returns
    (cdf values, total interpolant mass); the CDF is clamped outside the
    extended span.
    """
    v = f.values
    n = v.size
    knots0 = f.origin
    h = f.step
    head = 0.5 * h * v[0]
    cdf_knots = head + np.concatenate(
        ([0.0], np.cumsum(0.5 * h * (v[1:] + v[:-1]))))
    total = float(cdf_knots[-1] + 0.5 * h * v[-1])
    idx = np.clip(np.floor((x - knots0) / h).astype(np.int64), 0, n - 2)
    loc = np.clip((x - (knots0 + idx * h)) / h, 0.0, 1.0)
    v0 = v[idx]
    v1 = v[idx + 1]
    cdf = cdf_knots[idx] + h * (v0 * loc + 0.5 * (v1 - v0) * loc ** 2)
    below = x < knots0
    cdf[below] = v[0] * np.clip(x[below] - (knots0 - 0.5 * h), 0.0, 0.5 * h)
    above = x > knots0 + (n - 1) * h
    cdf[above] = cdf_knots[-1] + v[-1] * np.clip(
        x[above] - (knots0 + (n - 1) * h), 0.0, 0.5 * h)
    return cdf, total


def resample(f: GriddedDistribution, origin: float, step: float,
             n: int) -> GriddedDistribution:
    """Conservative resampling onto a new uniform grid.

    Each new cell receives the exact integral of the linear interpolant
    of ``f`` over the cell, divided by the new step — so total mass is
    preserved to machine precision regardless of the step ratio.

    Raises :class:`MismatchedGrids` when the target grid would truncate
    more than 1e−12 of the source mass, and :class:`GridTooNarrow` when
    the requested grid is unreasonably large.
    """
    if n > MAX_RESAMPLE_POINTS:
        raise GridTooNarrow(f"resampling to {n} points exceeds the "
                            f"{MAX_RESAMPLE_POINTS}-point limit")
    if not step > 0.0:
        raise NonpositiveScale(f"grid step must be > 0, got {step!r}")
    edges = origin + step * (np.arange(n + 1) - 0.5)
    cdf, total = _interpolant_cdf(f, edges)
    truncated = (cdf[0] - 0.0) + (total - cdf[-1])
    if truncated > RESAMPLE_TAIL_TOL:
        raise MismatchedGrids(
            f"target grid truncates {truncated:.3e} of the source mass "
            f"(> {RESAMPLE_TAIL_TOL})")
    values = np.maximum(np.diff(cdf) / step, 0.0)
    return GriddedDistribution(origin, step, values)


def _to_step(f: GriddedDistribution, step: float) -> GriddedDistribution:
    """Refine ``f`` onto grid step ``step`` over its own span."""
    if abs(f.step - step) <= 1e-12 * step:
        return f
    lo, hi = f.span()
    n = int(math.ceil((hi - lo) / step))
    if n > MAX_RESAMPLE_POINTS:
        raise GridTooNarrow(
            f"common-step refinement needs {n} points (> "
            f"{MAX_RESAMPLE_POINTS}); the step ratio {f.step / step:.3g} "
            "stretches the span beyond what is representable")
    mid = 0.5 * (lo + hi)
    origin = mid - 0.5 * step * (n - 1)
    return resample(f, origin, step, n)


def convolve(f: GriddedDistribution, g: GriddedDistribution) -> GriddedDistribution:
    """Density of the sum of two independent variables.

    Inputs must share a step; if they do not, the coarser one is first
    refined onto the finer step (conservatively, over its own span).
    Discrete convolution then preserves normalization exactly:
    h·Σout = (h·Σf)(h·Σg).  Direct summation is used below
    4096 points, a zero-padded FFT above.
    """
    if f.step <= g.step:
        g = _to_step(g, f.step)
    else:
        f = _to_step(f, g.step)
    h = f.step
    if max(f.n, g.n) < DIRECT_CONVOLVE_LIMIT:
        out = np.convolve(f.values, g.values)
    else:
        out = fftconvolve(f.values, g.values)
        np.maximum(out, 0.0, out=out)
    return GriddedDistribution(f.origin + g.origin, h, out * h)


def ideal_output_distributions(f: GriddedDistribution, F: GriddedDistribution,
                               g: GriddedDistribution, G: GriddedDistribution,
                               ) -> tuple[GriddedDistribution, GriddedDistribution]:
    """Unit-gain outputs: readout F_out = f∗F and momentum g_out = g∗G.

    ``G`` must already be the reflected meter momentum density (density
    of −P), the convention used throughout this module.
    """
    return convolve(f, F), convolve(g, G)


def general_output_distributions(params: InteractionParams,
                                 f: GriddedDistribution, F: GriddedDistribution,
                                 g: GriddedDistribution, G: GriddedDistribution,
                                 ) -> tuple[GriddedDistribution, GriddedDistribution]:
    """Output densities of a general interaction.

    For ab ≠ 0:

        F_out = (f_{1/b_p} ∗ F_{1/a_p})_{1/Δ}
        g_out = (g_{1/a} ∗ G_{1/b})_Δ

    The two singular classes are exact, not limits: a = 0 returns
    (f, G) — the object position is transferred faithfully to the
    readout while the object momentum is overwritten by the meter's —
    and b = 0 returns (F, g), a coupling-free pass-through.
    """
    if params.a == 0.0:
        return f, G
    if params.b == 0.0:
        return F, g
    f_part = rescale(f, 1.0 / params.b_p)
    F_part = rescale(F, 1.0 / params.a_p)
    readout = rescale(convolve(f_part, F_part), 1.0 / params.delta)
    g_part = rescale(g, 1.0 / params.a)
    G_part = rescale(G, 1.0 / params.b)
    momentum = rescale(convolve(g_part, G_part), params.delta)
    return readout, momentum


def distribution_error_disturbance(params: InteractionParams,
                                   F: GriddedDistribution,
                                   G: GriddedDistribution) -> tuple[float, float]:
    """Gain-referred error and disturbance from tabulated meter densities.

    ε* = (a/b)·σ(F) and η* = (b/a)·σ(G); the singular classes give
    (0, +inf) for a = 0 and (+inf, 0) for b = 0.  Matches the
    moment-level gain-referred pair up to quadrature error when F, G
    are the meter's position/momentum densities.
    """
    if params.a == 0.0:
        return 0.0, math.inf
    if params.b == 0.0:
        return math.inf, 0.0
    ratio = params.a / params.b
    return ratio * moments(F).sigma, moments(G).sigma / ratio


def l1_distance(f: GriddedDistribution, g: GriddedDistribution) -> float:
    """∫|f − g| on the union of the two spans at the finer step."""
    step = min(f.step, g.step)
    lo = min(f.span()[0], g.span()[0])
    hi = max(f.span()[1], g.span()[1])
    n = int(math.ceil((hi - lo) / step)) + 1
    if n > MAX_RESAMPLE_POINTS:
        raise GridTooNarrow(f"union grid needs {n} points "
                            f"(> {MAX_RESAMPLE_POINTS})")
    mid = 0.5 * (lo + hi)
    origin = mid - 0.5 * step * (n - 1)
    fr = resample(f, origin, step, n)
    gr = resample(g, origin, step, n)
    return step * float(np.abs(fr.values - gr.values).sum())


def delta_limit_study(a_sequence, f: GriddedDistribution, F: GriddedDistribution,
                      g: GriddedDistribution, G: GriddedDistribution,
                      *, b: float = 1.0, delta: float = 1.0,
                      ) -> list[tuple[float, float, float]]:
    """Convergence of the outputs toward their a → 0 limits.

    For each coupling ``a`` in the strictly decreasing ``a_sequence``
    (all in (0, 1]), builds an interaction with the given ``b`` and
    determinant ``delta`` and tabulates

        (a,  L1(F_out, f),  L1(g_out, G_delta))

    where G_delta = rescale(G, delta).  As a → 0 the readout becomes an
    exact copy of f while the object momentum forgets its input and
    takes the (rescaled) meter shape; both columns decrease toward 0.
    (The stated limits assume the default b = 1; a trailing readout
    gain b ≠ 1 leaves a fixed rescaling in place.)
    """
    a_arr = [float(a) for a in a_sequence]
    if not a_arr:
        raise ValueError("a_sequence must be non-empty")
    if any(not 0.0 < a <= 1.0 for a in a_arr):
        raise ValueError(f"a_sequence entries must lie in (0, 1], got {a_arr}")
    if any(a2 >= a1 for a1, a2 in zip(a_arr, a_arr[1:])):
        raise ValueError(f"a_sequence must be strictly decreasing, got {a_arr}")
    momentum_target = rescale(G, delta)
    rows = []
    for a in a_arr:
        params = params_from_gains(a, b, delta)
        readout, momentum = general_output_distributions(params, f, F, g, G)
        rows.append((a, l1_distance(readout, f),
                     l1_distance(momentum, momentum_target)))
    return rows


def dual_delta_limit_study(b_sequence, f: GriddedDistribution,
                           F: GriddedDistribution, g: GriddedDistribution,
                           G: GriddedDistribution,
                           *, a: float = 1.0, delta: float = 1.0,
                           ) -> list[tuple[float, float, float]]:
    """The mirror-image convergence study: coupling b → 0 at fixed a.

    Tabulates (b, L1(F_out, F), L1(g_out, g_delta)) with
    g_delta = rescale(g, delta): with the object decoupled from the
    readout, F_out tends to the meter's own density and the object
    momentum is returned untouched.  Swapping both the roles a ↔ b and
    position ↔ momentum turns this into :func:`delta_limit_study` with
    its two L1 columns exchanged.
    """
    b_arr = [float(b) for b in b_sequence]
    if not b_arr:
        raise ValueError("b_sequence must be non-empty")
    if any(not 0.0 < b <= 1.0 for b in b_arr):
        raise ValueError(f"b_sequence entries must lie in (0, 1], got {b_arr}")
    if any(b2 >= b1 for b1, b2 in zip(b_arr, b_arr[1:])):
        raise ValueError(f"b_sequence must be strictly decreasing, got {b_arr}")
    if a == 0.0:
        raise ValueError("the dual study needs a != 0")
    momentum_target = rescale(g, delta)
    rows = []
    for b in b_arr:
        params = new_params(a, b, 0.0, delta / a)
        readout, momentum = general_output_distributions(params, f, F, g, G)
        rows.append((b, l1_distance(readout, F),
                     l1_distance(momentum, momentum_target)))
    return rows


# ---------------------------------------------------------------------------
# constructors


def gaussian_density(mean: float, sigma: float, *, points: int = 4096,
                     span_sigmas: float = 10.0, origin: float | None = None,
                     step: float | None = None) -> GriddedDistribution:
    """Numerically normalized Gaussian density on a uniform grid.

    Without an explicit grid the samples cover mean ± span_sigmas·sigma
    with ``points`` cells.
    """
    sigma = float(sigma)
    if not sigma > 0.0:
        raise NonpositiveScale(f"sigma must be > 0, got {sigma!r}")
    if (origin is None) != (step is None):
        raise ValueError("give both origin and step, or neither")
    if origin is None:
        step = 2.0 * span_sigmas * sigma / points
        origin = mean - span_sigmas * sigma + 0.5 * step
    x = origin + step * np.arange(points)
    values = np.exp(-0.5 * ((x - mean) / sigma) ** 2)
    values /= step * values.sum()
    return GriddedDistribution(origin, step, values)


def uniform_density(lo: float, hi: float, *, points: int = 4096) -> GriddedDistribution:
    """Uniform density on (lo, hi), exactly normalized on its own grid."""
    lo, hi = float(lo), float(hi)
    if not hi > lo:
        raise ValueError(f"need hi > lo, got ({lo}, {hi})")
    step = (hi - lo) / points
    values = np.full(points, 1.0 / (hi - lo))
    return GriddedDistribution(lo + 0.5 * step, step, values)


def gaussian_inputs(params: InteractionParams, obj: ObjectStateSpec,
                    probe: ProbeStateSpec, *, points: int = 4096,
                    span_sigmas: float = 10.0,
                    ) -> tuple[GriddedDistribution, GriddedDistribution,
                               GriddedDistribution, GriddedDistribution]:
    """The four Gaussian input densities (f, F, g, G) for a simulation.

    Spans are auto-widened by max(1/a, 1/b, 1) because the output
    transforms stretch supports by up to those factors.  G is built
    directly as the reflected meter momentum density: its mean is
    −mean_P.
    """
    widen = 1.0
    if params.a > 0.0:
        widen = max(widen, 1.0 / params.a)
    if params.b > 0.0:
        widen = max(widen, 1.0 / params.b)
    span = span_sigmas * widen
    f = gaussian_density(obj.mean_q, obj.sigma_q, points=points, span_sigmas=span)
    F = gaussian_density(probe.mean_Q, probe.sigma_Q, points=points, span_sigmas=span)
    g = gaussian_density(obj.mean_p, obj.sigma_p, points=points, span_sigmas=span)
    G = gaussian_density(-probe.mean_P, probe.sigma_P, points=points, span_sigmas=span)
    return f, F, g, G


# ---------------------------------------------------------------------------
# serialization

_CSV_HEADER = re.compile(
    r"^#\s*origin=(?P<origin>\S+)\s+step=(?P<step>\S+)\s+n=(?P<n>\d+)\s*$")


def write_csv(f: GriddedDistribution, path) -> None:
    """Write ``coordinate,density`` rows under a grid-descriptor header."""
    x = f.coordinates().tolist()
    vals = f.values.tolist()
    lines = [f"# origin={f.origin!r} step={f.step!r} n={f.n}",
             "coordinate,density"]
    lines.extend(f"{x[i]!r},{vals[i]!r}" for i in range(f.n))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> GriddedDistribution:
    """Inverse of :func:`write_csv`; validates the declared sample count."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        match = _CSV_HEADER.match(header)
        if match is None:
            raise ValueError(f"{path}: missing grid-descriptor header, "
                             f"got {header!r}")
        origin = float(match["origin"])
        step = float(match["step"])
        n = int(match["n"])
        column_line = fh.readline().strip()
        if column_line != "coordinate,density":
            raise ValueError(f"{path}: expected 'coordinate,density' header, "
                             f"got {column_line!r}")
        values = np.loadtxt(fh, delimiter=",", usecols=1, ndmin=1)
    if values.size != n:
        raise ValueError(f"{path}: header declares n={n} but found "
                         f"{values.size} rows")
    return GriddedDistribution(origin, step, values)
