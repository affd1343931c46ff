"""Second-moment error and disturbance measures for linear interactions.

Three layers of measures are provided, all driven by the coefficient
matrix of :mod:`linmeas.interaction_core` and (where needed) the spreads
of the object and meter input states:

* legacy pair (epsilon, eta): rms deviation of the raw readout from the
  pre-interaction object position, and of the post-interaction object
  momentum from its input value.  Their product can dip below ħ/2.
* gain-referred pair (epsilon*, eta*): the same deviations after the
  readout is rescaled to unit gain.  Their product equals the meter's
  own uncertainty product σ(Q)·σ(P) and therefore never beats ħ/2.
* normalized pair (epsilon~, eta~): legacy moments in units of the
  object spreads for a minimum-uncertainty object matched to the meter
  through a single balance parameter w = σ(Q)/σ(q) = σ(p)/σ(P).

In normalized form the product bound ε̃·η̃ ≥ 1 is violable, while the sum
bound ε̃·η̃ + ε̃ + η̃ ≥ 1 and the circle bound ε̃² + η̃² ≥ 1 always hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import hbar
from .errors import NonpositiveBalance, NonpositiveScale
from .interaction_core import InteractionParams

#: Absolute slack allowed on the state uncertainty product σ_x·σ_p ≥ ħ/2.
STATE_BOUND_SLACK = 1e-12


def _positive(name: str, value) -> float:
    value = float(value)
    if not value > 0.0:
        raise NonpositiveScale(f"{name} must be > 0, got {value!r}")
    return value


def _check_uncertainty_product(sig_x: float, sig_p: float) -> None:
    bound = 0.5 * hbar()
    if sig_x * sig_p < bound - STATE_BOUND_SLACK:
        raise ValueError(
            f"uncertainty product {sig_x * sig_p} is below hbar/2 = {bound}; "
            "no such state exists")


@dataclass(frozen=True)
class ObjectStateSpec:
    """Second-moment summary of the object input state."""

    sigma_q: float
    sigma_p: float
    mean_q: float = 0.0
    mean_p: float = 0.0

    def __post_init__(self):
        _positive("sigma_q", self.sigma_q)
        _positive("sigma_p", self.sigma_p)
        _check_uncertainty_product(self.sigma_q, self.sigma_p)

    @classmethod
    def minimum_uncertainty(cls, sigma_q: float, mean_q: float = 0.0,
                            mean_p: float = 0.0) -> "ObjectStateSpec":
        sigma_q = _positive("sigma_q", sigma_q)
        return cls(sigma_q=sigma_q, sigma_p=0.5 * hbar() / sigma_q,
                   mean_q=mean_q, mean_p=mean_p)


@dataclass(frozen=True)
class ProbeStateSpec:
    """Second-moment summary of the meter (probe) input state.

    The meter is prepared in a known state; by default its means vanish.
    """

    sigma_Q: float
    sigma_P: float
    mean_Q: float = 0.0
    mean_P: float = 0.0

    def __post_init__(self):
        _positive("sigma_Q", self.sigma_Q)
        _positive("sigma_P", self.sigma_P)
        _check_uncertainty_product(self.sigma_Q, self.sigma_P)

    @classmethod
    def minimum_uncertainty(cls, sigma_Q: float, mean_Q: float = 0.0,
                            mean_P: float = 0.0) -> "ProbeStateSpec":
        sigma_Q = _positive("sigma_Q", sigma_Q)
        return cls(sigma_Q=sigma_Q, sigma_P=0.5 * hbar() / sigma_Q,
                   mean_Q=mean_Q, mean_P=mean_P)


@dataclass(frozen=True)
class UncertaintyReport:
    """Error-disturbance figures and the three bounds they face.

    All ``*_lhs`` values are in normalized (dimensionless) form and are
    compared against 1.  Fields the supplied inputs cannot determine are
    NaN.  ``epsilon_star``/``eta_star`` may be +inf (readout-only or
    coupling-free interactions); ``star_product`` then carries the
    finite limiting value σ(Q)·σ(P) and ``limit_resolved`` is True.
    """

    epsilon: float
    eta: float
    epsilon_star: float
    eta_star: float
    star_product: float
    limit_resolved: bool
    epsilon_tilde: float
    eta_tilde: float
    w: float
    hur_lhs: float
    our_lhs: float
    circle_lhs: float
    hur_satisfied: bool
    our_satisfied: bool
    circle_satisfied: bool
    hbar: float


def legacy_error_disturbance(params: InteractionParams, obj: ObjectStateSpec,
                             probe: ProbeStateSpec) -> tuple[float, float]:
    """Raw rms readout error epsilon and momentum disturbance eta.

    ε² = a²σ²(Q) + (b−1)²σ²(q) compares the readout against the object
    position at unit nominal gain; η² = (a_p−1)²σ²(p) + b_p²σ²(P)
    compares output and input object momentum.  Means are removed
    internally: only the spreads enter.
    """
    eps = math.hypot(params.a * probe.sigma_Q,
                     (params.b - 1.0) * obj.sigma_q)
    eta = math.hypot((params.a_p - 1.0) * obj.sigma_p,
                     params.b_p * probe.sigma_P)
    return eps, eta


def gain_referred_error_disturbance(params: InteractionParams,
                                    probe: ProbeStateSpec) -> tuple[float, float]:
    """Error and disturbance referred to the actual readout gain.

    Rescaling the readout by its gain before comparing removes the bias
    terms and leaves ε* = (a/b)·σ(Q), η* = (b/a)·σ(P).  A readout-only
    interaction (a = 0) gives (0, +inf); a coupling-free one (b = 0)
    gives (+inf, 0) — limit semantics, the product staying σ(Q)·σ(P).
    """
    if params.a == 0.0:
        return 0.0, math.inf
    if params.b == 0.0:
        return math.inf, 0.0
    ratio = params.a / params.b
    return ratio * probe.sigma_Q, probe.sigma_P / ratio


def normalized_moments(params: InteractionParams, w):
    """Dimensionless moments at balance w (scalar or array, w > 0).

    ε̃² = a²w² + (b−1)²  and  η̃² = (a_p−1)² + b_p²/w², i.e. the legacy
    moments divided by σ(q) and σ(p) for a minimum-uncertainty object
    with meter spreads matched through w.
    """
    w_arr = np.asarray(w, dtype=float)
    if w_arr.size and (np.any(w_arr <= 0.0) or not np.all(np.isfinite(w_arr))):
        raise NonpositiveBalance(
            f"balance parameter must be finite and > 0, got {w!r}")
    eps = np.hypot(params.a * w_arr, params.b - 1.0)
    eta = np.hypot(params.a_p - 1.0, params.b_p / w_arr)
    if np.isscalar(w) or w_arr.ndim == 0:
        return float(eps), float(eta)
    return eps, eta


def balance_of(obj: ObjectStateSpec, probe: ProbeStateSpec) -> float:
    """Balance parameter w = σ(Q)/σ(q) of an object/meter pairing."""
    return probe.sigma_Q / obj.sigma_q


def circle_minimum(params: InteractionParams) -> tuple[float, float]:
    """Closed-form minimum of ε̃² + η̃² over the balance w.

    Returns (minimum value, minimizing w).  The value is
    (a_p + b − 1)² + 1 and is never below 1.  For a = 0 (resp. b = 0)
    the infimum is approached as w → ∞ (resp. w → 0) and the second
    entry is inf (resp. 0).
    """
    value = (params.a_p + params.b - 1.0) ** 2 + 1.0
    if params.a == 0.0:
        return value, math.inf
    if params.b == 0.0:
        return value, 0.0
    return value, math.sqrt(params.b_p / params.a)


def default_w_grid(n: int = 200, lo: float = 1e-2, hi: float = 1e2) -> np.ndarray:
    """Logarithmic balance grid: 200 points spanning both asymptotes."""
    return np.geomspace(lo, hi, n)


def trajectory(params: InteractionParams, w_grid=None
               ) -> list[tuple[float, float, float]]:
    """Sweep the balance parameter; one (w, ε̃, η̃) row per grid point.

    ``w_grid`` must be non-empty and strictly increasing; it defaults to
    :func:`default_w_grid`.
    """
    w_arr = default_w_grid() if w_grid is None else np.asarray(w_grid, dtype=float)
    if w_arr.size == 0:
        raise ValueError("w_grid must be non-empty")
    if w_arr.size > 1 and not np.all(np.diff(w_arr) > 0.0):
        raise ValueError("w_grid must be strictly increasing")
    eps, eta = normalized_moments(params, w_arr)
    eps = np.atleast_1d(eps)
    eta = np.atleast_1d(eta)
    return [(float(w_arr[i]), float(eps[i]), float(eta[i]))
            for i in range(w_arr.size)]


def evaluate_bounds(*, params: InteractionParams | None = None,
                    obj: ObjectStateSpec | None = None,
                    probe: ProbeStateSpec | None = None,
                    w: float | None = None,
                    epsilon: float | None = None,
                    eta: float | None = None,
                    sigma_q: float | None = None,
                    sigma_p: float | None = None,
                    epsilon_tilde: float | None = None,
                    eta_tilde: float | None = None) -> UncertaintyReport:
    """Build an :class:`UncertaintyReport` from whichever inputs are given.

    Entry points, tried in this order:

    * ``params`` with ``obj`` and ``probe``: legacy moments are computed
      and normalized by the object spreads; gain-referred figures come
      from the meter spreads.
    * ``params`` with ``w``: normalized moments straight from the
      coefficients (minimum-uncertainty matched states implied).
    * ``epsilon``/``eta`` with ``sigma_q``/``sigma_p``: normalize an
      externally computed legacy pair.
    * ``epsilon_tilde``/``eta_tilde``: already normalized.

    Gain-referred fields require ``params`` and ``probe``; for a = 0 or
    b = 0 one of ε*, η* is +inf and the product is reported as its
    limiting value σ(Q)·σ(P) with ``limit_resolved`` set.
    """
    eps_raw = eta_raw = math.nan
    w_used = math.nan
    if params is not None and obj is not None and probe is not None:
        eps_raw, eta_raw = legacy_error_disturbance(params, obj, probe)
        eps_t = eps_raw / obj.sigma_q
        eta_t = eta_raw / obj.sigma_p
        w_used = balance_of(obj, probe)
    elif params is not None and w is not None:
        eps_t, eta_t = normalized_moments(params, float(w))
        w_used = float(w)
    elif epsilon is not None and eta is not None \
            and sigma_q is not None and sigma_p is not None:
        _positive("sigma_q", sigma_q)
        _positive("sigma_p", sigma_p)
        eps_raw, eta_raw = float(epsilon), float(eta)
        eps_t = eps_raw / float(sigma_q)
        eta_t = eta_raw / float(sigma_p)
    elif epsilon_tilde is not None and eta_tilde is not None:
        eps_t, eta_t = float(epsilon_tilde), float(eta_tilde)
    else:
        raise TypeError("not enough inputs: pass (params, obj, probe), "
                        "(params, w), (epsilon, eta, sigma_q, sigma_p) "
                        "or (epsilon_tilde, eta_tilde)")

    if params is not None and probe is not None:
        star_eps, star_eta = gain_referred_error_disturbance(params, probe)
        star_prod = probe.sigma_Q * probe.sigma_P
        resolved = math.isinf(star_eps) or math.isinf(star_eta)
    else:
        star_eps = star_eta = star_prod = math.nan
        resolved = False

    hur = eps_t * eta_t
    our = hur + eps_t + eta_t
    circle = eps_t ** 2 + eta_t ** 2
    tol = 1e-12
    return UncertaintyReport(
        epsilon=eps_raw,
        eta=eta_raw,
        epsilon_star=star_eps,
        eta_star=star_eta,
        star_product=star_prod,
        limit_resolved=resolved,
        epsilon_tilde=eps_t,
        eta_tilde=eta_t,
        w=w_used,
        hur_lhs=hur,
        our_lhs=our,
        circle_lhs=circle,
        hur_satisfied=bool(hur >= 1.0 - tol),
        our_satisfied=bool(our >= 1.0 - tol),
        circle_satisfied=bool(circle >= 1.0 - tol),
        hbar=hbar(),
    )
