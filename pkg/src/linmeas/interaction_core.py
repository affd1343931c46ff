"""Parameterisation of linear position-coupling measurement interactions.

A premeasurement couples an object mode (position q, momentum p) to a
meter mode (position Q, momentum P) so that positions transform linearly:

    Q' = a·Q + b·q          (meter readout picks up the object position)
    q' = c·Q + d·q

with determinant Δ = ad − bc > 0.  Momenta then transform with the
inverse-transposed block so the canonical commutators survive:

    p' = a_p·p − b_p·P,   P' = −c_p·p + d_p·P,    x_p := x/Δ for x in a..d.

Only the signs of a and b matter up to local parity flips, so parameters
are stored in a canonical a ≥ 0, b ≥ 0 form.  Maps with Δ < 0 are
rejected: they cannot be reached continuously from the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInteraction, NegativeDeterminant

#: Relative tolerance used to call a determinant zero.
DEGENERACY_RTOL = 1e-12


@dataclass(frozen=True)
class InteractionParams:
    """Canonicalised coefficients of a linear measurement interaction.

    Instances should be built with :func:`new_params`, which validates the
    determinant and applies the sign canonicalisation.  ``a_p`` through
    ``d_p`` are the determinant-divided coefficients appearing in the
    momentum transform; ``omega`` = √Δ is the amplitude normalisation of
    the corresponding unitary.
    """

    a: float
    b: float
    c: float
    d: float
    delta: float
    a_p: float
    b_p: float
    c_p: float
    d_p: float
    omega: float

    def coefficients(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)


@dataclass(frozen=True)
class StandardFormClass:
    """Result of sorting an interaction into its standard form.

    ``scale_triple`` holds (Λ, λ, μ): the meter-input, object-input and
    readout scale factors that bring the raw coefficient matrix to the
    reduced one.  The reduced matrices act on (Q', q') over (Q, q) and on
    (p', P') over (p, P) respectively.
    """

    tag: str  # "TypeO" | "TypeA" | "TypeB"
    scale_triple: tuple[float, float, float]
    reduced_position_matrix: tuple[tuple[float, float], tuple[float, float]]
    reduced_momentum_matrix: tuple[tuple[float, float], tuple[float, float]]


def new_params(a: float, b: float, c: float, d: float) -> InteractionParams:
    """Validate raw coefficients and return canonicalised parameters.

    The sign of ``a`` is flipped together with ``d`` (a meter parity),
    the sign of ``b`` together with ``c`` (an object parity), so the
    stored form has a ≥ 0 and b ≥ 0 while the determinant and every
    derived moment are unchanged.  The flips are silent.

    Raises
    ------
    DegenerateInteraction
        if |ad − bc| ≤ 1e−12 · max(|ad|, |bc|, 1).
    NegativeDeterminant
        if ad − bc < 0 (no sign flip can change the determinant's sign).
    """
    a, b, c, d = float(a), float(b), float(c), float(d)
    delta = a * d - b * c
    if abs(delta) <= DEGENERACY_RTOL * max(abs(a * d), abs(b * c), 1.0):
        raise DegenerateInteraction(
            f"determinant {delta} of ({a}, {b}, {c}, {d}) is degenerate, "
            "the map is not unitary")
    if delta < 0:
        raise NegativeDeterminant(
            f"determinant {delta} <= 0: the map cannot be reached "
            "continuously from the identity")
    if a < 0:
        a, d = -a, -d
    if b < 0:
        b, c = -b, -c
    # normalise any -0.0 so exact-zero comparisons downstream are safe
    a, b = a + 0.0, b + 0.0
    return InteractionParams(
        a=a, b=b, c=c, d=d,
        delta=delta,
        a_p=a / delta, b_p=b / delta,
        c_p=c / delta, d_p=d / delta,
        omega=math.sqrt(delta),
    )


def params_from_gains(a: float, b: float, delta: float = 1.0) -> InteractionParams:
    """Build params with prescribed readout gains and determinant.

    Only (a, b, Δ) enter the moment and distribution formulas; the
    feedback coefficients are fixed to a convenient representative
    (d = 1, c = (a − Δ)/b when b ≠ 0, else c = 0, d = Δ/a).
    """
    a, b, delta = float(a), float(b), float(delta)
    if b != 0.0:
        return new_params(a, b, (a - delta) / b, 1.0)
    if a == 0.0:
        raise DegenerateInteraction("a = b = 0 has zero determinant")
    return new_params(a, 0.0, 0.0, delta / a)


def classify(params: InteractionParams) -> StandardFormClass:
    """Sort an interaction into one of three scale-equivalence classes.

    TypeO (a·b ≠ 0) is the generic class; TypeA (a = 0) reads the object
    position out exactly; TypeB (b = 0) leaves the object position
    untouched.  Zero tests are exact: canonicalisation already snapped
    signed zeros.
    """
    a, b, c, d = params.coefficients()
    if a != 0.0 and b != 0.0:
        lam_big, lam, mu = 1.0 / a, 1.0 / b, a * b / params.delta
        pos = ((1.0, 1.0), (params.b_p * c + 0.0, params.a_p * d))
        mom = ((1.0, -1.0), (-params.b_p * c + 0.0, params.a_p * d))
        tag = "TypeO"
    elif a == 0.0:
        lam_big, lam, mu = -1.0 / c, 1.0 / b, 1.0
        pos = ((0.0, 1.0), (-1.0, d / b))
        mom = ((0.0, -1.0), (1.0, d / b))
        tag = "TypeA"
    else:  # b == 0, a != 0 (both zero would be degenerate)
        lam_big, lam, mu = 1.0 / a, 1.0 / d, 1.0
        pos = ((1.0, 0.0), (c / a, 1.0))
        mom = ((1.0, 0.0), (-c / a, 1.0))
        tag = "TypeB"
    return StandardFormClass(tag=tag, scale_triple=(lam_big, lam, mu),
                             reduced_position_matrix=pos,
                             reduced_momentum_matrix=mom)


def heisenberg_matrices(params: InteractionParams) -> tuple[np.ndarray, np.ndarray]:
    """Position and momentum transfer matrices.

    Returns (M_pos, M_mom) with [Q'; q'] = M_pos · [Q; q] and
    [p'; P'] = M_mom · [p; P].
    """
    a, b, c, d = params.coefficients()
    m_pos = np.array([[a, b], [c, d]], dtype=float)
    m_mom = np.array([[a, -b], [-c, d]], dtype=float) / params.delta
    return m_pos, m_mom


def commutator_residuals(params: InteractionParams) -> tuple[float, float, float]:
    """How far the output mode operators are from canonical.

    Returns (|a·d_p − b·c_p − 1|, |d·a_p − c·b_p − 1|, |b·a_p − a·b_p|):
    the deviations of [Q', P'] and [q', p'] from iħ and of the cross
    commutator [Q', p'] from zero, in units of ħ.
    """
    p = params
    return (
        abs(p.a * p.d_p - p.b * p.c_p - 1.0),
        abs(p.d * p.a_p - p.c * p.b_p - 1.0),
        abs(p.b * p.a_p - p.a * p.b_p),
    )


def inverse_coefficients(params: InteractionParams) -> tuple[float, float, float, float]:
    """Raw coefficients of the inverse map, *without* canonicalisation.

    Composing the position map of ``params`` with the map built from the
    returned tuple gives the identity.  The tuple usually has a negative
    entry, so it is meant for the raw-coefficient entry points of the
    wavefunction oracle, not for :func:`new_params`.
    """
    return (params.d_p, -params.b_p, -params.c_p, params.a_p)


def coefficients_of(params_or_coeffs) -> tuple[float, float, float, float]:
    """Accept either InteractionParams or a raw (a, b, c, d) sequence.

    Raw sequences skip canonicalisation (needed for inverse maps) but the
    determinant must still be positive.
    """
    if isinstance(params_or_coeffs, InteractionParams):
        return params_or_coeffs.coefficients()
    a, b, c, d = (float(x) for x in params_or_coeffs)
    if a * d - b * c <= 0:
        raise NegativeDeterminant(
            f"determinant {a * d - b * c} <= 0 for raw coefficients")
    return (a, b, c, d)
