"""The acceptance suite: ten numbered checks, each driven by a RunConfig.

Each check returns a :class:`CriterionResult`; ``run_all`` runs them in order.
The CLI ``selftest`` command and ``tests/test_acceptance.py`` both call
into this module, so the thresholds live in exactly one place.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import AlgebraElement, TracialAlgebra, are_orthogonal, trace
from .car import car_level, fidelity_stability
from .channels import (depolarizing, is_completely_positive, is_schwarz_sampled,
                       phase_distance, transpose_average_map, unitary_channel)
from .config import RunConfig
from .fidelity import (OptimizerConfig, fidelity, fidelity_bounds, fidelity_routes,
                       var1_gradient, var1_objective)
from .harness import Preservation, metric_sweep, monotonicity_sweep, preservation_classify
from .predual import is_predual_positive, operator_matrix, example_delta, example_omega
from .sampling import (random_density, random_hermitian, random_orthogonal_densities,
                       random_positive, random_pure_density, random_unitary)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    metrics: dict = field(default_factory=dict)
    runtime_s: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} ({self.runtime_s:.1f}s)"


def _timed(number: int, name: str, fn: Callable[[RunConfig], tuple[bool, str, dict]],
           cfg: RunConfig) -> CriterionResult:
    start = time.perf_counter()
    ok, detail, metrics = fn(cfg)
    return CriterionResult(number, name, bool(ok), detail, metrics, time.perf_counter() - start)


def _rng(cfg: RunConfig, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, tag]))


# 1 -----------------------------------------------------------------------------------

def _route_agreement(cfg: RunConfig, n_per_dim: int = 200, dims=(2, 3, 8, 16),
                     n_two_block: int = 50):
    rng = _rng(cfg, 1)
    opt = OptimizerConfig.from_run_config(cfg)
    algebras = [(TracialAlgebra.matrix(d), n_per_dim) for d in dims]
    algebras.append((TracialAlgebra([(2, 1.0), (3, 0.5)]), n_two_block))
    exact_worst = var_worst = 0.0
    per_route = {"var1": 0.0, "var2": 0.0}
    start = time.perf_counter()
    for alg, n in algebras:
        for _ in range(n):
            s, r = random_density(alg, rng), random_density(alg, rng)
            values, _ = fidelity_routes(s, r, config=opt, n_samples=cfg.n_contractions,
                                        rng=rng, psd_tol=cfg.psd_tol)
            exact = [values[k] for k in ("direct", "mu", "block")]
            exact_worst = max(exact_worst, max(exact) - min(exact))
            var_worst = max(var_worst, max(values.values()) - min(values.values()))
            for k in per_route:
                per_route[k] = max(per_route[k], abs(values[k] - values["direct"]))
    elapsed = time.perf_counter() - start
    ok = exact_worst <= 1e-10 and var_worst <= 1e-6 and elapsed <= 60.0
    detail = (f"non-variational {exact_worst:.2e} (<=1e-10), all routes {var_worst:.2e} (<=1e-6); "
              f"var1 {per_route['var1']:.2e}, var2 {per_route['var2']:.2e}; {elapsed:.0f}s (<=60s)")
    return ok, detail, {"exact_disagreement": exact_worst, "max_disagreement": var_worst,
                        "var1_error": per_route["var1"], "var2_error": per_route["var2"],
                        "elapsed_s": elapsed}


# 2 -----------------------------------------------------------------------------------

def _fidelity_axioms(cfg: RunConfig, n: int = 100):
    rng = _rng(cfg, 2)
    sym = 0.0
    lo, hi = np.inf, -np.inf
    zero_ok = one_ok = True
    for i in range(n):
        alg = TracialAlgebra.matrix(2 + i % 4) if i % 5 else TracialAlgebra([(2, 1.0), (3, 0.5)])
        s, r = random_density(alg, rng), random_density(alg, rng)
        f_sr, f_rs = fidelity(s, r), fidelity(r, s)
        sym = max(sym, abs(f_sr - f_rs))
        lo, hi = min(lo, f_sr), max(hi, f_sr)
        # F = 0 exactly on orthogonal pairs
        a, b = random_orthogonal_densities(alg, rng)
        f0 = fidelity(a, b)
        zero_ok &= are_orthogonal(a, b, 1e-10) and abs(f0) <= 1e-10
        zero_ok &= f_sr > 1e-6 and not are_orthogonal(s, r, 1e-10)
        # F = 1 exactly when equal; a perturbed copy sits strictly below 1
        p = random_pure_density(alg, rng)
        one_ok &= abs(fidelity(s, s) - 1) <= 1e-9 and abs(fidelity(p, p) - 1) <= 1e-9
        near = 0.9 * s + 0.1 * r
        one_ok &= fidelity(s, near) < 1 - 1e-9
        lo, hi = min(lo, f0), max(hi, fidelity(s, s), fidelity(p, p))
    ok = sym <= 1e-10 and lo >= -1e-12 and hi <= 1 + 1e-9 and zero_ok and one_ok
    detail = (f"symmetry {sym:.1e}, range [{lo:.2e}, {hi:.12f}], "
              f"F=0<->orthogonal {zero_ok}, F=1<->equal {one_ok}")
    return ok, detail, {"symmetry": sym, "min": lo, "max": hi}


# 3 -----------------------------------------------------------------------------------

def _monotonicity(cfg: RunConfig, n: int = 1000, dims=(2, 4, 8)):
    start = time.perf_counter()
    margins = {}
    for d in dims:
        rep = monotonicity_sweep("random_cptp", d, n, seed=cfg.seed, margin_tol=cfg.margin_tol)
        margins[d] = rep.min_margin
    elapsed = time.perf_counter() - start
    worst = min(margins.values())
    ok = worst >= -1e-9 and elapsed <= 120.0
    detail = (", ".join(f"d={d}: {m:.2e}" for d, m in margins.items())
              + f"; min margin >= -1e-9; {elapsed:.0f}s (<=120s)")
    return ok, detail, {"min_margin": worst, "elapsed_s": elapsed}


# 4 -----------------------------------------------------------------------------------

def _bures_metric(cfg: RunConfig, n: int = 1000):
    reps = [metric_sweep(d, n, seed=cfg.seed, tol=cfg.metric_tol) for d in (2, 3)]
    worst = min(r.min_margin for r in reps)
    ok = worst >= -1e-10 and all(r.passed for r in reps)
    return ok, f"min triangle margin {worst:.3e} over M_2, M_3 (>= -1e-10)", {"min_margin": worst}


# 5 -----------------------------------------------------------------------------------

def _predual_examples(cfg: RunConfig):
    om, de = example_omega(), example_delta()
    om_pos = is_predual_positive(om, cfg.psd_tol).verdict
    de_pos = is_predual_positive(de, cfg.psd_tol).verdict
    om_ops, de_ops = operator_matrix(om, cfg.psd_tol), operator_matrix(de, cfg.psd_tol)
    eig_err = float(np.abs(np.sort(om_ops.eigenvalues) - [-1, 1, 1, 1]).max())
    ok = om_pos and not om_ops.psd and eig_err <= 1e-12 and not de_pos and de_ops.psd
    detail = (f"Omega predual-positive {om_pos}, eigenvalues {np.round(om_ops.eigenvalues, 12)}; "
              f"Delta predual-positive {de_pos}, operator matrix PSD {de_ops.psd}")
    return ok, detail, {"omega_eig_error": eig_err}


# 6 -----------------------------------------------------------------------------------

def _schwarz_gap(cfg: RunConfig, n: int = 10_000):
    phi = transpose_average_map()
    schwarz = is_schwarz_sampled(phi, n, seed=cfg.seed, tol=1e-10)
    cp = is_completely_positive(phi, cfg.psd_tol)
    ok = schwarz.verdict and abs(cp.min_choi_eigenvalue + 0.25) <= 1e-12 and not cp.verdict
    detail = (f"Schwarz: {schwarz.summary} (worst {schwarz.worst_violation:.2e}); "
              f"Choi min eigenvalue {cp.min_choi_eigenvalue:.15f}")
    return ok, detail, {"worst_violation": schwarz.worst_violation,
                        "choi_min": cp.min_choi_eigenvalue}


# 7 -----------------------------------------------------------------------------------

def _unitary_recovery(cfg: RunConfig, n: int = 100):
    rng = _rng(cfg, 7)
    worst = 0.0
    all_preserving = True
    for i in range(n):
        alg = TracialAlgebra.matrix((2, 3, 4)[i % 3])
        u = random_unitary(alg, rng)
        c = preservation_classify(unitary_channel(u), seed=cfg.seed + i, tol=cfg.classify_tol)
        if c.verdict is not Preservation.PRESERVING or c.unitary is None:
            all_preserving = False
            continue
        worst = max(worst, phase_distance(c.unitary, u))
    dep_ok = True
    for p in (0.1, 0.5, 1.0):
        c = preservation_classify(depolarizing(2, p), seed=cfg.seed, tol=cfg.classify_tol)
        dep_ok &= c.verdict is Preservation.STRICTLY_INCREASING and c.witness is not None
    ok = all_preserving and worst <= 1e-8 and dep_ok
    detail = (f"{n} unitary channels Preserving: {all_preserving}, worst phase residual "
              f"{worst:.2e} (<=1e-8); depolarizing flagged with witness: {dep_ok}")
    return ok, detail, {"worst_residual": worst}


# 8 -----------------------------------------------------------------------------------

def _car_tower(cfg: RunConfig, n: int = 20):
    rng = _rng(cfg, 8)
    lvl1 = car_level(1)
    spread = 0.0
    for _ in range(n):
        s, r = random_density(lvl1, rng), random_density(lvl1, rng)
        vals = fidelity_stability(s, r, 3, max_level=cfg.car_max_level)
        spread = max(spread, max(vals) - min(vals))
    exact = all(trace(AlgebraElement.identity(car_level(k))).real == 1.0 for k in range(1, 11))
    ok = spread <= 1e-10 and exact
    return ok, f"fidelity spread over 3 embeddings {spread:.1e}; tau_k(1) == 1 for k<=10: {exact}", \
        {"spread": spread}


# 9 -----------------------------------------------------------------------------------

def _trace_bounds(cfg: RunConfig, n: int = 200):
    rng = _rng(cfg, 9)
    worst_gap = -np.inf
    worst_density = -np.inf
    for i in range(n):
        alg = TracialAlgebra.matrix(2 + i % 4) if i % 4 else TracialAlgebra([(2, 1.0), (3, 0.5)])
        a = random_positive(alg, rng, rank=None if i % 2 else 1) * rng.uniform(0.1, 3.0)
        b = random_positive(alg, rng) * rng.uniform(0.1, 3.0)
        if i % 10 == 0:
            b = a * rng.uniform(0.1, 3.0)  # proportional pair: equality case
        f, bound = fidelity_bounds(a, b, cfg.psd_tol)
        worst_gap = max(worst_gap, f - bound)
        s, r = random_density(alg, rng), random_density(alg, rng)
        worst_density = max(worst_density, fidelity(s, r))
    ok = worst_gap <= 1e-10 and worst_density <= 1 + 1e-9
    return ok, (f"max F - sqrt(tau(a)tau(b)) = {worst_gap:.2e} (<=1e-10); "
                f"max density F = {worst_density:.6f}"), {"worst_gap": worst_gap}


# 10 ----------------------------------------------------------------------------------

def _hermitian_basis(alg: TracialAlgebra) -> list[AlgebraElement]:
    basis = []
    for b, d in enumerate(alg.dims):
        for i in range(d):
            for j in range(i, d):
                e = AlgebraElement.matrix_unit(alg, b, i, j)
                if i == j:
                    basis.append(e)
                else:
                    basis.append(e + e.H)
                    basis.append(1j * e - 1j * e.H)
    return basis


def _gradient_check(cfg: RunConfig, n: int = 20, step: float = 1e-5):
    rng = _rng(cfg, 10)
    worst = 0.0
    for i in range(n):
        alg = TracialAlgebra.matrix(2 + i % 3) if i % 4 else TracialAlgebra([(2, 1.0), (3, 0.5)])
        s, r = random_density(alg, rng), random_density(alg, rng)
        h = random_hermitian(alg, rng)
        y = AlgebraElement.identity(alg) + 0.3 * h / h.norm()
        g = var1_gradient(s, r, y)
        analytic, numeric = [], []
        for e in _hermitian_basis(alg):
            analytic.append(trace(g @ e).real)
            numeric.append((var1_objective(s, r, y + step * e)
                            - var1_objective(s, r, y - step * e)) / (2 * step))
        analytic, numeric = np.array(analytic), np.array(numeric)
        worst = max(worst, float(np.linalg.norm(analytic - numeric) / np.linalg.norm(analytic)))
    return worst <= 1e-4, f"max relative error {worst:.2e} (<=1e-4)", {"relative_error": worst}


CRITERIA: list[tuple[str, Callable]] = [
    ("five-route agreement", _route_agreement),
    ("fidelity axioms", _fidelity_axioms),
    ("monotonicity under CPTP maps", _monotonicity),
    ("Bures triangle inequality", _bures_metric),
    ("predual order examples", _predual_examples),
    ("Schwarz map that is not 2-positive", _schwarz_gap),
    ("unitary recovery", _unitary_recovery),
    ("CAR tower stability", _car_tower),
    ("trace bounds", _trace_bounds),
    ("var1 gradient check", _gradient_check),
]


def run_criterion(number: int, cfg: RunConfig | None = None) -> CriterionResult:
    cfg = cfg or RunConfig()
    name, fn = CRITERIA[number - 1]
    return _timed(number, name, fn, cfg)


def run_all(cfg: RunConfig | None = None, only: list[int] | None = None) -> list[CriterionResult]:
    numbers = only or list(range(1, len(CRITERIA) + 1))
    return [run_criterion(k, cfg) for k in numbers]
