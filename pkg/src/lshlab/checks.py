"""Falsifiable numerical checks for the inequality and monotonicity suite.

Each check returns a :class:`CheckReport` carrying the full input echo, the
computed quantities (lhs, rhs, deficits, witnesses), the tolerance used, and
the verdict.  Tolerance hierarchy: identity checks use 1e-6 relative error;
inequality checks accept a deficit down to -(1e-6 * scale + 3 * quadrature
error estimate), so integration noise can never fail an inequality that holds
with equality.

Reports never raise on a mathematical violation (that is a *failed* check,
with witnesses); they only go *inconclusive* when a required quantity cannot
be computed (divergent integral, unavailable regularity constant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameter, QuadratureFailure, TypeConditionViolation
from .fields import (
    Mollifier,
    ScalarField,
    constant,
    convolve,
    cosh_field,
    default_probes,
    dilate,
    dilated_convolve,
    euler,
    exp_norm_sq,
    is_subharmonic,
    log_linear,
    mollifier,
    power,
    product_field,
    spherical_average,
)
from .functionals import (
    DEFAULT_R_GRID,
    alpha_with_error,
    entropy_with_error,
    euler_energy_with_error,
    q_of_r,
    r_of_pq,
)
from .measures import Density, regularity_constant
from .quadrature import QuadratureSpec, default_spec, integrate, lp_norm_with_error

IDENTITY_RTOL = 1e-6
INEQ_ABS = 1e-6
NOISE_FACTOR = 3.0
DEFAULT_C_RANGE = (0.25, 4.0)
BISECTION_RESOLUTION = 1e-3

#: caveat attached to every strong-hypercontractivity report
SHC_NOTE = (
    "tested on explicit smooth battery members only; closures of the "
    "log-subharmonic cone are not representable numerically"
)


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


@dataclass
class CheckReport:
    """Per-check outcome: quantities, deficits, tolerance, pass/fail."""

    check_id: str
    kind: str
    inputs: dict
    quantities: dict
    tolerance: float
    passed: bool
    inconclusive: bool = False
    notes: list = dc_field(default_factory=list)
    spec: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonify(
            {
                "check_id": self.check_id,
                "kind": self.kind,
                "inputs": self.inputs,
                "quantities": self.quantities,
                "tolerance": self.tolerance,
                "passed": self.passed,
                "inconclusive": self.inconclusive,
                "notes": list(self.notes),
                "spec": self.spec,
            }
        )


def _inconclusive(check_id, kind, inputs, spec, reason) -> CheckReport:
    return CheckReport(
        check_id=check_id,
        kind=kind,
        inputs=inputs,
        quantities={},
        tolerance=math.nan,
        passed=False,
        inconclusive=True,
        notes=[f"inconclusive: {reason}"],
        spec=spec.to_dict() if spec is not None else {},
    )


# ---------------------------------------------------------------------------
# inequality checks
# ---------------------------------------------------------------------------

def check_slsi(
    g: ScalarField,
    mu: Density,
    c: float,
    spec: Optional[QuadratureSpec] = None,
    check_id: str = "slsi",
    allow_non_rotation_invariant: bool = False,
) -> CheckReport:
    """Strong log-Sobolev deficit (c/2) int E g dmu - Ent(g), passing iff >= -tol."""
    spec = spec or default_spec(mu)
    inputs = {"field": g.label, "measure": mu.label, "c": c}
    if g.certificate == "unverified":
        raise InvalidParameter("check_slsi requires a certificate-carrying field")
    if not mu.rotation_invariant and not allow_non_rotation_invariant:
        raise InvalidParameter(
            "the dilation energy is only known positive on the cone for "
            "rotation-invariant measures; pass allow_non_rotation_invariant=True "
            "to override"
        )
    try:
        ent, e_ent = entropy_with_error(g, mu, spec)
        ee, e_ee = euler_energy_with_error(g, mu, spec)
    except QuadratureFailure as exc:
        return _inconclusive(check_id, "slsi", inputs, spec, str(exc))
    deficit = (c / 2.0) * ee - ent
    scale = max(1.0, abs(ent), abs(c / 2.0 * ee))
    tol = INEQ_ABS * scale + NOISE_FACTOR * (e_ent + (c / 2.0) * e_ee)
    return CheckReport(
        check_id=check_id,
        kind="slsi",
        inputs=inputs,
        quantities={
            "entropy": ent,
            "euler_energy": ee,
            "lhs": ent,
            "rhs": c / 2.0 * ee,
            "deficit": deficit,
        },
        tolerance=tol,
        passed=bool(deficit >= -tol),
        spec=spec.to_dict(),
    )


def check_shc(
    f: ScalarField,
    mu: Density,
    c: float,
    r_grid: Sequence[float] = DEFAULT_R_GRID,
    spec: Optional[QuadratureSpec] = None,
    check_id: str = "shc",
) -> CheckReport:
    """Strong hypercontractivity in L^1 form: ||f_r||_{q(r)} <= ||f||_1 and
    ||f_r||_1 <= ||f||_1 on the r-grid, plus monotonicity of alpha(r)."""
    spec = spec or default_spec(mu)
    inputs = {"field": f.label, "measure": mu.label, "c": c, "r_grid": list(r_grid)}
    if f.certificate == "unverified":
        raise InvalidParameter("check_shc requires a certificate-carrying field")
    try:
        base, e_base = lp_norm_with_error(f, mu, 1.0, spec)
    except QuadratureFailure as exc:
        return _inconclusive(check_id, "shc", inputs, spec, str(exc))

    rows = []
    for r in r_grid:
        row = {"r": float(r), "q_of_r": q_of_r(r, c)}
        try:
            a, e_a = alpha_with_error(f, mu, c, r, spec)
            n1, e_n1 = lp_norm_with_error(dilate(f, r), mu, 1.0, spec)
        except (QuadratureFailure, InvalidParameter) as exc:
            row.update({"skipped": True, "reason": str(exc)})
            rows.append(row)
            continue
        tol_rel = INEQ_ABS + NOISE_FACTOR * (e_a + e_base) / max(base, 1e-300)
        row.update(
            {
                "skipped": False,
                "alpha": a,
                "norm1": n1,
                "deficit": base - a,
                "row_passed": bool(a <= base * (1.0 + tol_rel))
                and bool(n1 <= base * (1.0 + tol_rel)),
                "tol_rel": tol_rel,
            }
        )
        rows.append(row)

    live = [row for row in rows if not row["skipped"]]
    monotone = True
    worst_drop = 0.0
    for prev, nxt in zip(live, live[1:]):
        slack = prev["alpha"] - nxt["alpha"] * (1.0 + prev["tol_rel"])
        worst_drop = max(worst_drop, slack)
        if slack > 0:
            monotone = False
    passed = bool(live) and all(row["row_passed"] for row in live) and monotone
    return CheckReport(
        check_id=check_id,
        kind="shc",
        inputs=inputs,
        quantities={
            "norm1": base,
            "rows": rows,
            "alpha_monotone": monotone,
            "worst_monotonicity_drop": worst_drop,
            "skipped_rows": len(rows) - len(live),
        },
        tolerance=INEQ_ABS,
        passed=passed,
        notes=[SHC_NOTE],
        spec=spec.to_dict(),
    )


def check_general_shc(
    f: ScalarField,
    mu: Density,
    c: float,
    p: float,
    q: float,
    spec: Optional[QuadratureSpec] = None,
    check_id: str = "general_shc",
) -> CheckReport:
    """||f_r||_q <= ||f||_p at the contraction time r = (p/q)^(c/2) and below."""
    spec = spec or default_spec(mu)
    inputs = {"field": f.label, "measure": mu.label, "c": c, "p": p, "q": q}
    r_star = r_of_pq(p, q, c)
    try:
        base, e_base = lp_norm_with_error(f, mu, p, spec)
    except QuadratureFailure as exc:
        return _inconclusive(check_id, "general_shc", inputs, spec, str(exc))
    rows = []
    ok = True
    for r in (r_star, 0.9 * r_star, 0.75 * r_star):
        try:
            lhs, e_lhs = lp_norm_with_error(dilate(f, r), mu, q, spec)
        except QuadratureFailure as exc:
            rows.append({"r": r, "skipped": True, "reason": str(exc)})
            continue
        tol_rel = INEQ_ABS + NOISE_FACTOR * (e_lhs + e_base) / max(base, 1e-300)
        good = bool(lhs <= base * (1.0 + tol_rel))
        rows.append({"r": r, "skipped": False, "lhs": lhs, "rhs": base, "passed": good})
        ok = ok and good
    return CheckReport(
        check_id=check_id,
        kind="general_shc",
        inputs=inputs,
        quantities={"r_star": r_star, "norm_p": base, "rows": rows},
        tolerance=INEQ_ABS,
        passed=ok and any(not row["skipped"] for row in rows),
        notes=[SHC_NOTE],
        spec=spec.to_dict(),
    )


def check_dilation_bound(
    f: ScalarField,
    mu: Density,
    p: float,
    r: float,
    spec: Optional[QuadratureSpec] = None,
    check_id: str = "dilation_bound",
) -> CheckReport:
    """Dilation operator bound ||f_r||_p <= r^(-n/p) C(1/r, 0)^(1/p) ||f||_p."""
    spec = spec or default_spec(mu)
    inputs = {"field": f.label, "measure": mu.label, "p": p, "r": r}
    if not (0.0 < r <= 1.0):
        raise InvalidParameter("r must lie in (0, 1]")
    try:
        c_est = regularity_constant(mu, 0.0, 1.0 / r, 0.0)
    except (InvalidParameter, TypeConditionViolation) as exc:
        return _inconclusive(check_id, "dilation_bound", inputs, spec,
                             f"regularity constant unavailable: {exc}")
    try:
        lhs, e_lhs = lp_norm_with_error(dilate(f, r), mu, p, spec)
        fnorm, e_f = lp_norm_with_error(f, mu, p, spec)
    except QuadratureFailure as exc:
        return _inconclusive(check_id, "dilation_bound", inputs, spec, str(exc))
    factor = r ** (-mu.dim / p) * c_est ** (1.0 / p)
    rhs = factor * fnorm
    tol = INEQ_ABS * rhs + NOISE_FACTOR * (e_lhs + factor * e_f)
    return CheckReport(
        check_id=check_id,
        kind="dilation_bound",
        inputs=inputs,
        quantities={
            "lhs": lhs,
            "rhs": rhs,
            "slack": rhs - lhs,
            "regularity_constant": c_est,
            "norm_p": fnorm,
        },
        tolerance=tol,
        passed=bool(lhs <= rhs + tol),
        spec=spec.to_dict(),
    )


def check_dilated_convolution_bound(
    f: ScalarField,
    mu: Density,
    p: float,
    phi: Mollifier,
    r: float,
    spec: Optional[QuadratureSpec] = None,
    check_id: str = "dilated_convolution_bound",
) -> CheckReport:
    """Dilated-convolution bound

    ||(f * phi)_r||_p <= r^(-n/p) C(1/r, s/r)^(1/p) Vol(K)^(1/p)
                         ||phi||_{p'} ||f||_p,

    with K = supp phi, s its radius, and p' the Hoelder conjugate of p >= 1.
    """
    spec = spec or default_spec(mu)
    inputs = {
        "field": f.label,
        "measure": mu.label,
        "p": p,
        "r": r,
        "mollifier_scale": phi.scale_index,
    }
    if p < 1.0:
        raise InvalidParameter("the dilated convolution bound needs p >= 1")
    if not (0.0 < r < 1.0):
        raise InvalidParameter("r must lie in (0, 1)")
    s = phi.support_radius
    try:
        c_est = regularity_constant(mu, 0.0, 1.0 / r, s / r)
    except (InvalidParameter, TypeConditionViolation) as exc:
        return _inconclusive(check_id, "dilated_convolution_bound", inputs, spec,
                             f"regularity constant unavailable: {exc}")
    phi_norm = phi.sup_value if p == 1.0 else phi.lebesgue_norm(p / (p - 1.0))
    try:
        lhs, e_lhs = lp_norm_with_error(dilated_convolve(f, phi, r), mu, p, spec)
        fnorm, e_f = lp_norm_with_error(f, mu, p, spec)
    except QuadratureFailure as exc:
        return _inconclusive(check_id, "dilated_convolution_bound", inputs, spec, str(exc))
    factor = (
        r ** (-mu.dim / p) * c_est ** (1.0 / p) * phi.vol_support ** (1.0 / p) * phi_norm
    )
    rhs = factor * fnorm
    tol = INEQ_ABS * rhs + NOISE_FACTOR * (e_lhs + factor * e_f)
    return CheckReport(
        check_id=check_id,
        kind="dilated_convolution_bound",
        inputs=inputs,
        quantities={
            "lhs": lhs,
            "rhs": rhs,
            "slack": rhs - lhs,
            "regularity_constant": c_est,
            "mollifier_norm": phi_norm,
            "vol_support": phi.vol_support,
        },
        tolerance=tol,
        passed=bool(lhs <= rhs + tol),
        spec=spec.to_dict(),
    )


# ---------------------------------------------------------------------------
# density-approximation experiment
# ---------------------------------------------------------------------------

def _diff_norm(g: ScalarField, f: ScalarField, mu, p: float,
               spec: QuadratureSpec) -> tuple[float, float]:
    val, err = integrate(lambda pts: np.abs(g(pts) - f(pts)) ** p, mu, spec)
    val = max(val, 0.0)
    norm = val ** (1.0 / p)
    e_norm = err * norm / (p * val) if val > 0 else err ** (1.0 / p)
    return norm, e_norm


def check_density_approximation(
    f: ScalarField,
    mu: Density,
    p: float,
    k_list: Sequence[int] = (1, 2, 4, 8, 16),
    r_list: Sequence[float] = (0.9, 0.95, 0.99),
    spec: Optional[QuadratureSpec] = None,
    eps_target: Optional[float] = None,
    check_id: str = "density_approx",
) -> CheckReport:
    """Dilated-convolution approximation errors e(k, r) = ||(f * phi_k)_r - f||_p.

    Passes iff the best cell reaches the target and convergence is monotone
    within twice the quadrature noise: along r -> 1 (at the largest scale) on
    the total error, and along the mollifier scale on the k-controlled split
    term ||(f * phi_k)_r - f_r||_p.  (The total error saturates at the
    dilation gap ||f_r - f||_p and is not monotone in k beyond it, since the
    convolution factor can partially cancel that gap.)  Every approximant
    must also have a finite dilation-energy norm ||E (f * phi_k)_r||_p.
    """
    spec = spec or default_spec(mu)
    inputs = {
        "field": f.label,
        "measure": mu.label,
        "p": p,
        "k_list": list(k_list),
        "r_list": list(r_list),
    }
    try:
        base, _ = lp_norm_with_error(f, mu, p, spec)
    except QuadratureFailure as exc:
        return _inconclusive(check_id, "density_approx", inputs, spec, str(exc))
    target = eps_target if eps_target is not None else 0.01 * base

    k_max, r_max = max(k_list), max(r_list)
    cells = {}
    energy_norms = {}
    split_k = {}
    f_rmax = dilate(f, r_max)
    for k in k_list:
        phi = mollifier(mu.dim, k)
        smoothed = convolve(f, phi)
        for r in r_list:
            g = dilate(smoothed, r)
            try:
                e, noise = _diff_norm(g, f, mu, p, spec)
                en, _ = integrate(lambda pts: np.abs(euler(g, pts)) ** p, mu, spec)
                if r == r_max:
                    split_k[k] = _diff_norm(g, f_rmax, mu, p, spec)
            except QuadratureFailure as exc:
                cells[(k, r)] = {"skipped": True, "reason": str(exc)}
                continue
            cells[(k, r)] = {"skipped": False, "error": e, "noise": noise}
            energy_norms[(k, r)] = en ** (1.0 / p)

    live = {key: cell for key, cell in cells.items() if not cell["skipped"]}
    if not live:
        return _inconclusive(check_id, "density_approx", inputs, spec,
                             "every cell failed to integrate")
    best = min(cell["error"] for cell in live.values())

    def _monotone(seq):
        ok = True
        for (e1, n1), (e2, n2) in zip(seq, seq[1:]):
            if e2 > e1 + 2.0 * (n1 + n2):
                ok = False
        return ok

    along_k = [split_k[k] for k in sorted(k_list) if k in split_k]
    along_r = [(live[(k_max, r)]["error"], live[(k_max, r)]["noise"])
               for r in sorted(r_list) if (k_max, r) in live]
    decreasing = _monotone(along_k) and _monotone(along_r)
    energies_finite = all(math.isfinite(v) for v in energy_norms.values())

    return CheckReport(
        check_id=check_id,
        kind="density_approx",
        inputs=inputs,
        quantities={
            "norm_p": base,
            "target": target,
            "best_error": best,
            "cells": [
                {"k": k, "r": r, **cell} for (k, r), cell in sorted(cells.items())
            ],
            "split_errors_along_k": [
                {"k": k, "error": split_k[k][0]} for k in sorted(split_k)
            ],
            "energy_norms": [
                {"k": k, "r": r, "value": v} for (k, r), v in sorted(energy_norms.items())
            ],
            "decreasing": decreasing,
            "energies_finite": energies_finite,
        },
        tolerance=target,
        passed=bool(best <= target and decreasing and energies_finite),
        spec=spec.to_dict(),
    )


# ---------------------------------------------------------------------------
# monotonicity lemmas
# ---------------------------------------------------------------------------

def check_spherical_monotonicity(
    f: ScalarField,
    probes: Optional[np.ndarray] = None,
    r_grid: Optional[Sequence[float]] = None,
    tol: float = 1e-7,
    check_id: str = "spherical_monotone",
    verify_subharmonic: bool = True,
) -> CheckReport:
    """r -> (spherical average of f)(r x) is non-decreasing for subharmonic f."""
    inputs = {"field": f.label, "tol": tol}
    if probes is None:
        probes = default_probes(f.dim, count=64, seed=13)
    if r_grid is None:
        r_grid = [0.1 * i for i in range(1, 11)]
    if verify_subharmonic:
        rep = is_subharmonic(f, seed=29)
        if not rep.passed:
            worst = rep.worst_violation()
            return _inconclusive(
                check_id, "spherical_monotone", inputs, None,
                f"field is not numerically subharmonic (witness {worst[0]})",
            )
    favg = spherical_average(f)
    violations = []
    for x in probes:
        pts = np.array([r * x for r in r_grid])
        vals = favg(pts)
        for i in range(len(r_grid) - 1):
            local = tol * max(1.0, abs(vals[i]))
            if vals[i + 1] < vals[i] - local:
                violations.append(
                    {"x": x, "r_low": r_grid[i], "r_high": r_grid[i + 1],
                     "drop": vals[i] - vals[i + 1]}
                )
    return CheckReport(
        check_id=check_id,
        kind="spherical_monotone",
        inputs=inputs,
        quantities={
            "probes": int(len(probes)),
            "grid_points": int(len(r_grid)),
            "violations": violations[:8],
            "violation_count": len(violations),
        },
        tolerance=tol,
        passed=not violations,
    )


def check_radial_euler_scaling(
    k: ScalarField,
    probes: Optional[np.ndarray] = None,
    r_grid: Optional[Sequence[float]] = None,
    tol: float = 1e-7,
    check_id: str = "radial_euler_scaling",
    verify_invariance: bool = True,
) -> CheckReport:
    """E k(r x) <= r^(2 - n) E k(x) for smooth rotation-invariant subharmonic k."""
    inputs = {"field": k.label, "tol": tol}
    if probes is None:
        probes = default_probes(k.dim, count=64, seed=17)
    if r_grid is None:
        r_grid = [0.1 * i for i in range(1, 11)]
    if verify_invariance:
        from .fields import _rotations

        sample = probes[:8]
        vals = k(sample)
        for u in _rotations(k.dim)[::max(1, len(_rotations(k.dim)) // 4)]:
            rotated = k(sample @ u.T)
            if np.max(np.abs(rotated - vals)) > 1e-6 * max(1.0, float(np.max(np.abs(vals)))):
                return _inconclusive(
                    check_id, "radial_euler_scaling", inputs, None,
                    "field is not rotation-invariant at probes",
                )
    n = k.dim
    base = euler(k, probes)
    violations = []
    for r in r_grid:
        lhs = euler(k, r * probes)
        rhs = r ** (2 - n) * base
        bad = lhs > rhs + tol * np.maximum(1.0, np.abs(rhs))
        for idx in np.flatnonzero(bad):
            violations.append(
                {"x": probes[idx], "r": r, "lhs": float(lhs[idx]), "rhs": float(rhs[idx])}
            )
    return CheckReport(
        check_id=check_id,
        kind="radial_euler_scaling",
        inputs=inputs,
        quantities={
            "probes": int(len(probes)),
            "grid_points": int(len(r_grid)),
            "violations": violations[:8],
            "violation_count": len(violations),
        },
        tolerance=tol,
        passed=not violations,
    )


# ---------------------------------------------------------------------------
# best-constant search
# ---------------------------------------------------------------------------

def best_constant(
    battery: Sequence[ScalarField],
    mu: Density,
    mode: str = "slsi",
    c_range: tuple[float, float] = DEFAULT_C_RANGE,
    spec: Optional[QuadratureSpec] = None,
    r_grid: Sequence[float] = DEFAULT_R_GRID,
    resolution: float = BISECTION_RESOLUTION,
) -> float:
    """Bisection for the smallest c at which the whole battery passes.

    Inequality checks are monotone in c (the right-hand side scales with c),
    so bisection is valid.  If no c in the range passes, the range maximum is
    returned; it is then only a lower bound for the true constant.
    """
    if mode not in ("slsi", "shc"):
        raise InvalidParameter("mode must be 'slsi' or 'shc'")
    if not battery:
        raise InvalidParameter("battery must be non-empty")
    spec = spec or default_spec(mu)

    def passes(c: float) -> bool:
        for f in battery:
            if mode == "slsi":
                rep = check_slsi(f, mu, c, spec)
            else:
                rep = check_shc(f, mu, c, r_grid, spec)
            if rep.inconclusive or not rep.passed:
                return False
        return True

    lo, hi = float(c_range[0]), float(c_range[1])
    if passes(lo):
        return lo
    if not passes(hi):
        return hi
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if passes(mid):
            hi = mid
        else:
            lo = mid
    # snap the bracket midpoint to the resolution grid
    return round(0.5 * (lo + hi) / resolution) * resolution


def default_battery(dim: int = 1, lam_values: Sequence[float] = (0.4, 0.8, 1.2),
                    mollifier_scale: int = 4) -> list[ScalarField]:
    """Shipped test battery: constants, the equality family, strictly convex
    log-profiles, power/product compositions, and one mollified field."""
    def lam_vec(lam):
        v = np.zeros(dim)
        v[0] = lam
        return v

    battery = [constant(1.5, dim)]
    battery += [log_linear(lam_vec(lam)) for lam in lam_values]
    if dim == 1:
        convex = cosh_field(0.8)
    else:
        convex = exp_norm_sq(0.05, dim)
    battery.append(convex)
    battery.append(power(convex, 1.5))
    battery.append(product_field(log_linear(lam_vec(0.4)), convex))
    battery.append(convolve(log_linear(lam_vec(0.8)), mollifier(dim, mollifier_scale)))
    return battery
