"""Exact-solution verification suite behind ``fkpplab verify``.

Each check returns a dict with at least ``value`` (usually a max residual),
``tolerance`` and ``passed``. Informational checks report a value but never
fail the run.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import exact
from .model import ActionFunctionalSpec, AnsatzParams, PhysicalParams
from .scaling import max_workers

FD_STEP = 1e-5


def _params_sample(rng, k, lo=0.5, hi=2.0):
    return [PhysicalParams(float(D), float(U)) for D, U in rng.uniform(lo, hi, size=(k, 2))]


def _entry(value, tol, **extra):
    value = float(value)
    return {"value": value, "tolerance": tol, "passed": bool(value <= tol), "informational": False, **extra}


def check_az_ode(seed):
    z = np.linspace(-20.0, 20.0, 4001)
    res = np.max(np.abs(exact.traveling_ode_residual(exact.AZ_SPEED, z)))
    return _entry(res, 1e-12, speed=exact.AZ_SPEED, n_points=z.size)


def check_az_fd(seed):
    rng = np.random.default_rng(seed)
    z = rng.uniform(-10, 10, 100)
    h = FD_STEP
    d1, d2 = exact.az_profile_derivs(z)
    fd1 = (exact.az_profile(z + h) - exact.az_profile(z - h)) / (2 * h)
    fd2 = (exact.az_profile_derivs(z + h)[0] - exact.az_profile_derivs(z - h)[0]) / (2 * h)
    return _entry(max(np.max(np.abs(fd1 - d1)), np.max(np.abs(fd2 - d2))), 1e-8, n_points=z.size)


def check_az_decay(seed):
    dev40 = abs(float(exact.az_decay_rate(40.0)) - exact.AZ_DECAY)
    dev30 = abs(float(exact.az_decay_rate(30.0)) - exact.AZ_DECAY)
    return _entry(dev40, 1e-6, z=40.0, deviation_at_z30=dev30, limit=exact.AZ_DECAY)


def _hj_samples(rng, variant, branch=None, n_params=5, n_points=100):
    worst = 0.0
    for p in _params_sample(rng, n_params):
        x = rng.uniform(-3.0, 3.0, n_points)
        t = rng.uniform(0.1, 10.0, n_points)
        if variant == "G1":
            specs = [ActionFunctionalSpec("G1", p)]
        elif variant == "G2":
            betas = p.U * (1.0 + 9.0 * (1.0 - rng.random(n_points)))  # (U, 10U]
            worst = max(worst, max(
                abs(float(exact.hj_residual_analytic(ActionFunctionalSpec("G2", p, beta=float(b)), xi, ti)))
                for b, xi, ti in zip(betas, x, t)
            ))
            continue
        else:
            vmin = 2.0 * math.sqrt(p.D * p.U)
            speeds = rng.uniform(vmin, 5.0 * vmin, 20)
            specs = [ActionFunctionalSpec("G3", p, v=float(v), branch=branch) for v in np.append(speeds, vmin)]
        for spec in specs:
            worst = max(worst, float(np.max(np.abs(exact.hj_residual_analytic(spec, x, t)))))
    return worst


def check_hj(variant, stream, branch=None):
    def run(seed):
        rng = np.random.default_rng([seed, stream])
        return _entry(_hj_samples(rng, variant, branch), 1e-12, variant=variant, branch=branch)

    return run


def check_action_fd(seed):
    rng = np.random.default_rng(seed)
    h = FD_STEP
    worst = 0.0
    for p in _params_sample(rng, 5):
        vmin = 2.0 * math.sqrt(p.D * p.U)
        specs = [
            ActionFunctionalSpec("G1", p),
            ActionFunctionalSpec("G2", p, beta=2.0 * p.U),
            ActionFunctionalSpec("G3", p, v=1.5 * vmin, branch="plus"),
            ActionFunctionalSpec("G3", p, v=1.5 * vmin, branch="minus"),
            ActionFunctionalSpec("G_AZ", p),
        ]
        x = rng.uniform(-3.0, 3.0, 100)
        t = rng.uniform(0.5, 10.0, 100)
        for spec in specs:
            gx, gt = exact.action_partials(spec, x, t)
            fx = (exact.action_value(spec, x + h, t) - exact.action_value(spec, x - h, t)) / (2 * h)
            ft = (exact.action_value(spec, x, t + h) - exact.action_value(spec, x, t - h)) / (2 * h)
            worst = max(worst, float(np.max(np.abs(fx - gx))), float(np.max(np.abs(ft - gt))))
    return _entry(worst, 1e-7, step=h)


def check_ansatz(seed):
    unit = PhysicalParams()
    value = exact.verify_ansatz(AnsatzParams.solved(unit), unit).max_abs_residual
    # for general D the rounding of c = 1/(4D) limits cancellation between terms
    # of size x^2/(4D t^2), so other parameter pairs are judged relative to that scale
    scaled = 0.0
    for p in _params_sample(np.random.default_rng(seed), 4):
        rep = exact.verify_ansatz(AnsatzParams.solved(p), p)
        scale = rep.x_range[1] ** 2 / (4.0 * p.D * rep.t_range[0] ** 2) + p.U
        scaled = max(scaled, rep.max_abs_residual / scale)
    out = _entry(value, 1e-12, a=2.0, b=-1.0, c="1/(4D)", alpha="U", D=1.0, U=1.0,
                 scaled_residual_other_params=scaled)
    out["passed"] = out["passed"] and scaled <= 1e-14
    return out


def check_double_root(seed):
    rng = np.random.default_rng(seed)
    unit = exact.momentum_roots(2.0, PhysicalParams())
    worst = max(abs(unit.p_minus - 1.0), abs(unit.p_plus - 1.0))
    for p in _params_sample(rng, 20, 0.1, 10.0):
        r = exact.momentum_roots(2.0 * math.sqrt(p.D * p.U), p)
        target = math.sqrt(p.U / p.D)
        worst = max(worst, abs(r.p_minus - target), abs(r.p_plus - target))
    return _entry(worst, 1e-10, p=unit.p_plus, v=2.0, D=1.0, U=1.0,
                  mass_constant=PhysicalParams().mass_constant)


def check_vieta(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p in _params_sample(rng, 20, 0.1, 10.0):
        vmin = 2.0 * math.sqrt(p.D * p.U)
        for v in rng.uniform(vmin, 5.0 * vmin, 10):
            r = exact.momentum_roots(float(v), p)
            worst = max(
                worst,
                abs(r.p_minus * r.p_plus - p.U / p.D) / (p.U / p.D),
                abs(r.p_minus + r.p_plus - v / p.D) / (v / p.D),
            )
    return _entry(worst, 1e-12)


def check_gaz_printed(seed):
    p = PhysicalParams()
    r = abs(float(exact.hj_residual_analytic(ActionFunctionalSpec("G_AZ", p), 0.7, 1.3)))
    out = _entry(r, 0.0, D=1.0, U=1.0)
    out.update(passed=None, informational=True,
               note="stated G_AZ does not satisfy the limiting HJ equation")
    return out


def check_gaz_derived(seed):
    worst = 0.0
    for p in [PhysicalParams()] + _params_sample(np.random.default_rng(seed), 5):
        A, B = exact.derive_action_from_asymptotics(exact.AZ_DECAY, exact.AZ_SPEED, p)
        worst = max(worst, abs(-B + p.D * A * A + p.U))
    return _entry(worst, 1e-12)


CHECKS = {
    "az_ode_residual": check_az_ode,
    "az_derivative_fd": check_az_fd,
    "az_decay_rate": check_az_decay,
    "hj_residual_g1": check_hj("G1", 1),
    "hj_residual_g2": check_hj("G2", 2),
    "hj_residual_g3_plus": check_hj("G3", 3, "plus"),
    "hj_residual_g3_minus": check_hj("G3", 4, "minus"),
    "action_fd_partials": check_action_fd,
    "ansatz": check_ansatz,
    "momentum_double_root": check_double_root,
    "momentum_vieta": check_vieta,
    "gaz_hj_residual": check_gaz_printed,
    "gaz_derived_hj_residual": check_gaz_derived,
}


def run_verification(seed: int = 0) -> dict:
    names = list(CHECKS)
    with ThreadPoolExecutor(max_workers=max_workers(len(names))) as pool:
        results = list(pool.map(lambda name: CHECKS[name](seed), names))
    checks = dict(zip(names, results))
    all_passed = all(c["passed"] for c in checks.values() if not c["informational"])
    return {
        "seed": seed,
        "checks": checks,
        "all_passed": all_passed,
        "derived": {"mass_constant": PhysicalParams().mass_constant},
    }
