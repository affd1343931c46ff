"""Cross-module consistency battery behind ``linmeas verify``.

Each check exercises an identity that two independent code paths must
agree on — algebraic invariants of the parameter block, moment-level
versus distribution-level error figures, analytic convolution laws
versus the brute-force wavefunction oracle.  The battery is fully
deterministic for a given seed and level, so its report can be diffed
byte for byte between runs.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from . import distribution_engine as de
from . import moment_engine as me
from . import wavefunction_oracle as wo
from .config import hbar
from .interaction_core import (InteractionParams, classify,
                               commutator_residuals, heisenberg_matrices,
                               inverse_coefficients, new_params)

QUICK_GRID = 2 ** 8
FULL_GRID = 2 ** 10

#: parameter sets that exercise every structural class
NAMED_CASES: tuple[tuple[str, tuple[float, float, float, float]], ...] = (
    ("ideal", (1.0, 1.0, 0.0, 1.0)),
    ("contractive", (0.0, 1.0, -1.0, 1.0)),
    ("swap", (0.0, 1.0, -1.0, 0.0)),
    ("readout-only", (0.0, 1.0, -2.0, 1.0)),
    ("coupling-free", (1.0, 0.0, 1.0, 1.0)),
    ("generic", (2.0, 1.0, 1.0, 1.0)),
)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one named verification check."""

    name: str
    passed: bool
    detail: str


def _random_params(rng: np.random.Generator, n: int) -> list[InteractionParams]:
    out = []
    for _ in range(n):
        a = rng.uniform(0.6, 1.4)
        b = rng.uniform(0.6, 1.4)
        c = rng.uniform(-0.6, 0.6)
        delta = rng.uniform(0.8, 1.25)
        d = (delta + b * c) / a
        out.append(new_params(a, b, c, d))
    return out


def _check(name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail)


# ---------------------------------------------------------------------------
# parameter-block identities


def _check_commutators(param_sets) -> CheckResult:
    worst = max(max(commutator_residuals(p)) for p in param_sets)
    return _check("commutator-residuals", worst <= 1e-12,
                  f"max residual {worst:.3e} (tol 1e-12)")


def _check_inverse_composition(param_sets) -> CheckResult:
    worst = 0.0
    for p in param_sets:
        ai, bi, ci, di = inverse_coefficients(p)
        m = np.array([[ai, bi], [ci, di]]) @ np.array([[p.a, p.b],
                                                       [p.c, p.d]])
        worst = max(worst, float(np.max(np.abs(m - np.eye(2)))))
    return _check("inverse-composition", worst <= 1e-12,
                  f"max |M_inv @ M - I| = {worst:.3e} (tol 1e-12)")


def _check_reduced_forms(param_sets) -> CheckResult:
    worst = 0.0
    for p in param_sets:
        form = classify(p)
        for mat in (form.reduced_position_matrix, form.reduced_momentum_matrix):
            worst = max(worst, abs(float(np.linalg.det(mat)) - 1.0))
        pos, mom = heisenberg_matrices(p)
        worst = max(worst, abs(float(np.linalg.det(pos)) - p.delta))
        worst = max(worst, abs(float(np.linalg.det(mom)) - 1.0 / p.delta))
    return _check("reduced-form-determinants", worst <= 1e-12,
                  f"max |det - target| = {worst:.3e} (tol 1e-12)")


# ---------------------------------------------------------------------------
# moment-level identities


def _check_star_product(param_sets) -> CheckResult:
    probe = me.ProbeStateSpec(sigma_Q=0.8, sigma_P=0.7)
    worst = 0.0
    for p in param_sets:
        eps_s, eta_s = me.gain_referred_error_disturbance(p, probe)
        if math.isinf(eps_s) or math.isinf(eta_s):
            continue
        worst = max(worst, abs(eps_s * eta_s
                               - probe.sigma_Q * probe.sigma_P))
    return _check("star-product-identity", worst <= 1e-12,
                  f"max |eps*.eta* - sigma_Q.sigma_P| = {worst:.3e}")


def _check_our_sweep(param_sets) -> CheckResult:
    w = me.default_w_grid()
    worst = math.inf
    for p in param_sets:
        eps, eta = me.normalized_moments(p, w)
        worst = min(worst, float(np.min(eps * eta + eps + eta)))
    return _check("trade-off-bound-sweep", worst >= 1.0 - 1e-12,
                  f"min over params and w of (ee + e + n) = {worst:.12f}")


def _check_hur_violation() -> CheckResult:
    p = new_params(0.5, 1.0, -0.5, 1.0)  # a_p + b = 1.5, a.b != 0
    eps, eta = me.normalized_moments(p, 1.0)
    product = eps * eta
    ok = product < 1.0 and p.a * p.b != 0.0 and abs(p.a_p + p.b - 2.0) > 0.1
    return _check("naive-product-violation", ok,
                  f"eps.eta = {product:.6f} < 1 at a={p.a}, b={p.b}, w=1")


def _check_heisenberg_trajectory() -> CheckResult:
    p = new_params(1.0, 1.0, 0.0, 1.0)  # a_p = b = 1
    rows = me.trajectory(p)
    worst = max(abs(e * n - 1.0) for _, e, n in rows)
    return _check("limit-line-trajectory", worst <= 1e-12,
                  f"max |eps.eta - 1| along a_p=b=1 sweep = {worst:.3e}")


def _check_circle_envelope(param_sets) -> CheckResult:
    w = np.geomspace(1e-2, 1e2, 40001)
    worst_low = math.inf
    worst_gap = 0.0
    for p in param_sets:
        eps, eta = me.normalized_moments(p, w)
        radial = eps ** 2 + eta ** 2
        bound, w_star = me.circle_minimum(p)
        worst_low = min(worst_low, float(np.min(radial)) - bound)
        # tightness is only observable when the minimizer is on the grid;
        # the singular classes approach their bound as w -> 0 or inf
        if w[0] <= w_star <= w[-1]:
            worst_gap = max(worst_gap, float(np.min(radial)) - bound)
    ok = worst_low >= -1e-12 and worst_gap <= 1e-6
    return _check("circle-envelope", ok,
                  f"min excess {worst_low:.3e} (>= -1e-12), "
                  f"attained-gap {worst_gap:.3e} (<= 1e-6)")


def _check_legacy_consistency(param_sets) -> CheckResult:
    obj = me.ObjectStateSpec.minimum_uncertainty(sigma_q=1.3)
    probe = me.ProbeStateSpec.minimum_uncertainty(sigma_Q=0.9)
    w = me.balance_of(obj, probe)
    worst = 0.0
    for p in param_sets:
        eps, eta = me.legacy_error_disturbance(p, obj, probe)
        eps_t, eta_t = me.normalized_moments(p, w)
        worst = max(worst, abs(eps / obj.sigma_q - eps_t),
                    abs(eta / obj.sigma_p - eta_t))
    return _check("legacy-normalized-consistency", worst <= 1e-12,
                  f"max |legacy/sigma - normalized| = {worst:.3e}")


# ---------------------------------------------------------------------------
# distribution-level identities


def _study_inputs(points: int = 4096):
    obj = me.ObjectStateSpec(sigma_q=1.0, sigma_p=0.5)
    probe = me.ProbeStateSpec(sigma_Q=0.8, sigma_P=0.7)
    params = new_params(1.0, 1.0, 0.0, 1.0)
    return de.gaussian_inputs(params, obj, probe, points=points), obj, probe


def _check_convolution_mass() -> CheckResult:
    (f, F, g, G), _, _ = _study_inputs()
    r_out, m_out = de.ideal_output_distributions(f, F, g, G)
    worst = max(abs(r_out.mass() - 1.0), abs(m_out.mass() - 1.0))
    return _check("convolution-mass", worst <= 1e-9,
                  f"max |mass - 1| = {worst:.3e} (tol 1e-9)")


def _check_variance_laws(param_sets) -> CheckResult:
    obj = me.ObjectStateSpec(sigma_q=1.0, sigma_p=0.5)
    probe = me.ProbeStateSpec(sigma_Q=0.8, sigma_P=0.7)
    worst = 0.0
    for p in param_sets:
        f, F, g, G = de.gaussian_inputs(p, obj, probe)
        r_out, m_out = de.general_output_distributions(p, f, F, g, G)
        var_r = (p.b * obj.sigma_q) ** 2 + (p.a * probe.sigma_Q) ** 2
        var_m = (p.a_p * obj.sigma_p) ** 2 + (p.b_p * probe.sigma_P) ** 2
        worst = max(worst,
                    abs(de.moments(r_out).variance - var_r) / var_r,
                    abs(de.moments(m_out).variance - var_m) / var_m)
    return _check("output-variance-laws", worst <= 1e-3,
                  f"max relative variance error {worst:.3e} (tol 1e-3)")


def _check_distribution_moment_consistency(param_sets) -> CheckResult:
    (f, F, g, G), obj, probe = _study_inputs()
    worst = 0.0
    for p in param_sets:
        eps_m, eta_m = me.gain_referred_error_disturbance(p, probe)
        eps_d, eta_d = de.distribution_error_disturbance(p, F, G)
        worst = max(worst, abs(eps_d - eps_m) / eps_m,
                    abs(eta_d - eta_m) / eta_m)
    return _check("distribution-moment-consistency", worst <= 1e-6,
                  f"max relative mismatch {worst:.3e} (tol 1e-6)")


def _check_delta_limit_trend() -> CheckResult:
    obj = me.ObjectStateSpec(sigma_q=1.0, sigma_p=0.5)
    probe = me.ProbeStateSpec(sigma_Q=0.8, sigma_P=0.7)
    seq = (0.2, 0.1, 0.05)
    params = new_params(1.0, 1.0, 0.0, 1.0)
    f, F, g, G = de.gaussian_inputs(params, obj, probe, points=4096)
    rows = de.delta_limit_study(seq, f, F, g, G)
    readout = [r[1] for r in rows]
    momentum = [r[2] for r in rows]
    ok = (all(x > y for x, y in zip(readout, readout[1:]))
          and all(x > y for x, y in zip(momentum, momentum[1:]))
          and readout[-1] < 5e-3 and momentum[-1] < 5e-3)
    return _check("delta-limit-trend", ok,
                  f"readout L1 {readout[0]:.3e} -> {readout[-1]:.3e}, "
                  f"momentum L1 {momentum[0]:.3e} -> {momentum[-1]:.3e}")


def _check_duality_swap() -> CheckResult:
    (f, F, g, G), _, _ = _study_inputs(points=2048)
    seq = (1.0, 0.5, 0.25)
    dual = np.asarray(de.dual_delta_limit_study(seq, f, F, g, G))
    primal = np.asarray(de.delta_limit_study(seq, g, G, f, F))
    same = np.array_equal(dual, primal[:, [0, 2, 1]])
    return _check("duality-column-swap", same,
                  "dual study equals primal with swapped L1 columns, "
                  "bit for bit" if same else
                  "dual and swapped primal studies differ")


def _check_csv_round_trip() -> CheckResult:
    f = de.gaussian_density(0.25, 1.5, points=512)
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "density.csv")
        de.write_csv(f, path)
        back = de.read_csv(path)
    same = (back.origin == f.origin and back.step == f.step
            and np.array_equal(back.values, f.values))
    return _check("csv-round-trip", same,
                  "origin, step and all values identical after round trip"
                  if same else "round trip altered the table")


# ---------------------------------------------------------------------------
# wavefunction-oracle cross-checks


def _packets(points: int, probe_mean_P: float = 0.0):
    hb = hbar()
    obj = me.ObjectStateSpec.minimum_uncertainty(sigma_q=1.0)
    probe = me.ProbeStateSpec.minimum_uncertainty(sigma_Q=0.8,
                                                  mean_P=probe_mean_P)
    psi = wo.gaussian_packet(0.0, obj.sigma_q, 0.0,
                             wo.axis_for(0.0, obj.sigma_q, points=points))
    Phi = wo.gaussian_packet(0.0, probe.sigma_Q, probe_mean_P / hb,
                             wo.axis_for(0.0, probe.sigma_Q, points=points))
    return obj, probe, psi, Phi


def _check_packet_moments() -> CheckResult:
    hb = hbar()
    psi = wo.gaussian_packet(0.3, 1.0, 0.7,
                             wo.axis_for(0.3, 1.0, points=1024))
    pos = de.moments(psi.density())
    phi = wo.momentum_wavefunction(psi, pad_factor=4)
    mom = de.moments(phi.density())
    worst = max(abs(pos.mean - 0.3), abs(pos.sigma - 1.0),
                abs(mom.mean - 0.7 * hb), abs(mom.sigma - 0.5 * hb))
    return _check("packet-moments", worst <= 1e-6,
                  f"max moment error {worst:.3e} (tol 1e-6)")


def _check_momentum_round_trip() -> CheckResult:
    _, _, psi, Phi = _packets(128)
    joint = wo.product_joint(psi, Phi)
    mom = wo.momentum_representation(joint)
    norm_err = abs(mom.norm() - joint.norm())
    back = wo.position_representation(mom, out_axes=(joint.q_axis,
                                                     joint.Q_axis))
    worst = float(np.max(np.abs(back.amplitudes - joint.amplitudes)))
    ok = worst <= 1e-9 and norm_err <= 1e-12
    return _check("momentum-round-trip", ok,
                  f"max amplitude error {worst:.3e} (tol 1e-9), "
                  f"norm drift {norm_err:.3e}")


def _check_interaction_round_trip() -> CheckResult:
    axis = wo.axis_for(0.0, 1.0, points=128)
    psi = wo.gaussian_packet(0.0, 1.0, 0.0, axis)
    Phi = wo.gaussian_packet(0.0, 0.8, 0.0, axis)
    params = new_params(1.0, 1.0, 0.0, 1.0)
    joint = wo.apply_interaction(params, psi, Phi)
    back = wo.transform_joint(inverse_coefficients(params), joint,
                              out_axes=(psi.axis, Phi.axis))
    ref = wo.product_joint(psi, Phi)
    worst = float(np.max(np.abs(back.amplitudes - ref.amplitudes)))
    return _check("interaction-round-trip", worst <= 1e-6,
                  f"max amplitude error after undo = {worst:.3e} (tol 1e-6)")


def _oracle_case(name: str, coeffs, points: int, fourier_sign: float,
                 probe_mean_P: float = 0.0) -> CheckResult:
    params = new_params(*coeffs)
    obj, probe, psi, Phi = _packets(points, probe_mean_P)
    joint = wo.apply_interaction(params, psi, Phi)
    norm_err = abs(joint.norm() - 1.0)
    f, F, g, G = de.gaussian_inputs(params, obj, probe)
    r_pred, m_pred = de.general_output_distributions(params, f, F, g, G)
    _, readout = wo.marginals(joint)
    momentum, _ = wo.momentum_marginals(joint, pad_factor=8,
                                        kernel_sign=fourier_sign)
    l1_r = de.l1_distance(readout, r_pred)
    l1_m = de.l1_distance(momentum, m_pred)
    ok = norm_err <= 1e-6 and l1_r <= 1e-3 and l1_m <= 1e-3
    return _check(f"oracle-marginals-{name}", ok,
                  f"norm drift {norm_err:.3e} (tol 1e-6), readout L1 "
                  f"{l1_r:.3e}, momentum L1 {l1_m:.3e} (tol 1e-3)")


# ---------------------------------------------------------------------------
# entry point


def run_verification(seed: int = 0, level: str = "full",
                     fourier_sign: float = -1.0) -> list[CheckResult]:
    """Run every check; returns one :class:`CheckResult` per check.

    ``level`` is "full" (oracle grids of 2^10 points per axis) or
    "quick" (2^8).  ``fourier_sign`` is threaded into the oracle's
    momentum transforms so a deliberately flipped sign convention is
    caught by the marginal comparisons.
    """
    if level not in ("quick", "full"):
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    points = QUICK_GRID if level == "quick" else FULL_GRID
    rng = np.random.default_rng(seed)
    named = [new_params(*coeffs) for _, coeffs in NAMED_CASES]
    drawn = _random_params(rng, 10)
    regular = [p for p in named if p.a != 0.0 and p.b != 0.0] + drawn

    results = [
        _check_commutators(named + drawn),
        _check_inverse_composition(named + drawn),
        _check_reduced_forms(named + drawn),
        _check_star_product(named + drawn),
        _check_our_sweep(named + drawn),
        _check_hur_violation(),
        _check_heisenberg_trajectory(),
        _check_circle_envelope(named + drawn),
        _check_legacy_consistency(named + drawn),
        _check_convolution_mass(),
        _check_variance_laws(regular),
        _check_distribution_moment_consistency(regular),
        _check_delta_limit_trend(),
        _check_duality_swap(),
        _check_csv_round_trip(),
        _check_packet_moments(),
        _check_momentum_round_trip(),
        _check_interaction_round_trip(),
        _oracle_case("ideal", (1.0, 1.0, 0.0, 1.0), points, fourier_sign),
        _oracle_case("displaced", (1.0, 1.0, 0.0, 1.0), points, fourier_sign,
                     probe_mean_P=0.7),
    ]
    return results


def all_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results)
