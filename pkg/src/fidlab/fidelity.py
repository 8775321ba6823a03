"""Tracial fidelity F(sigma, rho) = tau(|sigma^(1/2) rho^(1/2)|) by several routes.

Routes
------
``direct``  trace of the modulus of sigma^(1/2) rho^(1/2).
``mu``      integral of the generalised singular value function.
``var1``    half the infimum of tau(rho y) + tau(sigma y^-1) over y > 0.
``var2``    a quarter of the infimum of
            tau(sigma y) + tau(sigma y^-1) + tau(rho y) + tau(rho y^-1).
``block``   tau(x) for the extremal x making [[sigma, x], [x*, rho]] positive.

The variational routes minimise over y = exp(h), h selfadjoint, by
preconditioned gradient descent with a backtracking line search.
``var2`` is minimised exactly as written. Its objective equals
tau((sigma + rho)(y + y^-1)), which is smallest at y = 1, so the route
returns tau(sigma + rho) / 2 (that is, 1 for states) rather than the
fidelity (see
``tests/test_fidelity.py::test_var2_objective_collapses_to_sum``).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .algebra import (AlgebraElement, adjoint, functional_calculus, inverse_psd, is_positive,
                      min_eigenvalue, modulus, polar, same_algebra, singular_value_function,
                      sqrt_psd, trace)
from .errors import NonConvergence, NotPositive
from .sampling import random_contraction

ROUTES = ("direct", "mu", "var1", "var2", "block")


class Route(str, enum.Enum):
    TRACE_POS = "trace_pos"
    VAR1 = "var1"
    VAR2 = "var2"


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 500
    grad_tol: float = 1e-9
    rel_tol: float = 1e-12
    y_floor: float = 1e-12
    epsilon: float = 1e-8  # regularisation, as tau(eps * 1)
    regularize_below: float = 1e-8
    armijo: float = 1e-4

    @classmethod
    def from_run_config(cls, cfg) -> "OptimizerConfig":
        """Take the iteration budget, y floor and regularisation from a RunConfig."""
        return cls(max_iterations=cfg.max_iterations, y_floor=cfg.y_floor,
                   epsilon=cfg.var_epsilon)


@dataclass
class VariationalWitness:
    y: AlgebraElement
    objective_value: float
    route: Route
    iterations: int = 0
    grad_norm: float = 0.0
    converged: bool = True
    epsilon: float = 0.0
    history: list[float] = field(default_factory=list)

    @property
    def value(self) -> float:
        """The quantity the route computes: objective / 2 (or / 4 for var2)."""
        return self.objective_value / (4.0 if self.route is Route.VAR2 else 2.0)


@dataclass
class BlockWitness:
    x: AlgebraElement
    contraction: AlgebraElement
    block_min_eigenvalue: float
    sampled_max: float
    n_samples: int


# -- direct and singular-value routes ----------------------------------------------

def _root_product(sigma, rho, tol):
    same_algebra(sigma, rho)
    return sqrt_psd(sigma, tol) @ sqrt_psd(rho, tol)


def fidelity(sigma: AlgebraElement, rho: AlgebraElement, psd_tol: float = 1e-10) -> float:
    """tau(|sigma^(1/2) rho^(1/2)|).

    >>> from fidlab.algebra import AlgebraElement
    >>> import numpy as np
    >>> s = AlgebraElement.from_matrix(np.diag([1.0, 0.0]))
    >>> r = AlgebraElement.from_matrix(np.eye(2) / 2)
    >>> round(fidelity(s, r), 12)
    0.707106781187
    """
    return trace(modulus(_root_product(sigma, rho, psd_tol))).real


def fidelity_via_mu(sigma: AlgebraElement, rho: AlgebraElement, psd_tol: float = 1e-10) -> float:
    return singular_value_function(_root_product(sigma, rho, psd_tol)).integral()


def bures_distance(sigma: AlgebraElement, rho: AlgebraElement) -> float:
    """sqrt(1 - F), clipped at zero."""
    return float(np.sqrt(max(0.0, 1.0 - fidelity(sigma, rho))))


def fidelity_bounds(a: AlgebraElement, b: AlgebraElement,
                    psd_tol: float = 1e-10) -> tuple[float, float]:
    """Return (tau(|a^(1/2) b^(1/2)|), sqrt(tau(a) tau(b))) for positive a, b."""
    for name, e in (("a", a), ("b", b)):
        if not is_positive(e, psd_tol):
            raise NotPositive(f"{name} is not positive")
    return fidelity(a, b, psd_tol), float(np.sqrt(trace(a).real * trace(b).real))


# -- block supremum route -------------------------------------------------------

def fidelity_block_supremum(sigma: AlgebraElement, rho: AlgebraElement, *,
                            n_samples: int = 64, rng: np.random.Generator | None = None,
                            psd_tol: float = 1e-10) -> tuple[float, BlockWitness]:
    """Fidelity as the largest |tau(x)| over positive [[sigma, x], [x*, rho]].

    The supremum is attained at x = sigma^(1/2) u* rho^(1/2), where u is the
    unitary polar factor of rho^(1/2) sigma^(1/2). The witness also records
    the largest |tau(sigma^(1/2) y rho^(1/2))| over *n_samples* random
    contractions y, which can never exceed the returned value.
    """
    alg = same_algebra(sigma, rho)
    rs, rr = sqrt_psd(sigma, psd_tol), sqrt_psd(rho, psd_tol)
    u, _ = polar(rr @ rs)
    contraction = adjoint(u)
    x = rs @ contraction @ rr
    value = abs(trace(x))

    block_min = np.inf
    for s_b, r_b, x_b in zip(sigma.blocks, rho.blocks, x.blocks):
        big = np.block([[s_b, x_b], [x_b.conj().T, r_b]])
        block_min = min(block_min, float(np.linalg.eigvalsh(0.5 * (big + big.conj().T))[0]))

    rng = np.random.default_rng(0) if rng is None else rng
    sampled = 0.0
    for _ in range(n_samples):
        y = random_contraction(alg, rng)
        sampled = max(sampled, abs(trace(rs @ y @ rr)))
    return value, BlockWitness(x, contraction, block_min, sampled, n_samples)


# -- variational routes -----------------------------------------------------------

def _divided_differences(lam: np.ndarray, sign: float) -> np.ndarray:
    """Matrix of (e^{s l_i} - e^{s l_j}) / (l_i - l_j), with s e^{s l_i} on ties."""
    e = np.exp(sign * lam)
    dl = lam[:, None] - lam[None, :]
    de = e[:, None] - e[None, :]
    ties = np.abs(dl) < 1e-10
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(ties, sign * 0.5 * (e[:, None] + e[None, :]), de / np.where(ties, 1.0, dl))
    return out


class _ExpObjective:
    """f(h) = tau(A e^h) + tau(B e^-h) with its gradient in the tau pairing.

    ``value_grad`` also returns a descent direction preconditioned by the
    diagonal of the Hessian in the eigenbasis of h, which keeps the descent
    usable when some eigenvalues of y run off towards 0 or infinity.
    """

    def __init__(self, a: AlgebraElement, b: AlgebraElement):
        # square-root factors: <v, a v> = |a^(1/2) v|^2 keeps roundoff at eps^2 near ker a
        self.fa = [m for m in sqrt_psd(a).blocks]
        self.fb = [m for m in sqrt_psd(b).blocks]
        self.weights = a.algebra.weights

    def value_grad(self, h: AlgebraElement):
        with np.errstate(over="ignore", invalid="ignore"):
            total, grad, direction = self._value_grad(h)
        return (total if np.isfinite(total) else np.inf), grad, direction

    def _value_grad(self, h: AlgebraElement):
        total = 0.0
        grads, dirs = [], []
        for w, fa, fb, m in zip(self.weights, self.fa, self.fb, h.blocks):
            lam, v = np.linalg.eigh(0.5 * (m + m.conj().T))
            pa, pb = fa @ v, fb @ v
            a_e, b_e = pa.conj().T @ pa, pb.conj().T @ pb
            ep, em = np.exp(lam), np.exp(-lam)
            da = np.einsum("ij,ij->j", pa.conj(), pa).real
            db = np.einsum("ij,ij->j", pb.conj(), pb).real
            total += w * (da @ ep + db @ em)
            g = _divided_differences(lam, 1.0) * a_e + _divided_differences(lam, -1.0) * b_e
            curv = da * ep + db * em
            scale = 0.5 * (curv[:, None] + curv[None, :])
            scale = np.maximum(scale, 1e-12 * max(float(scale.max()), 1e-300))
            grads.append(v @ g @ v.conj().T)
            dirs.append(-(v @ (g / scale) @ v.conj().T))
        return (float(total), AlgebraElement._raw(h.algebra, grads),
                AlgebraElement._raw(h.algebra, dirs))


def _tau_inner(x: AlgebraElement, y: AlgebraElement) -> float:
    return trace(adjoint(x) @ y).real


def _clip_spectrum(h: AlgebraElement, bound: float) -> AlgebraElement:
    return functional_calculus(h, lambda t: np.clip(t, -bound, bound))


def _minimize(obj: _ExpObjective, h0: AlgebraElement, cfg: OptimizerConfig):
    """Projected, diagonally preconditioned descent on h with Armijo backtracking.

    The spectrum of y = exp(h) is kept inside [y_floor, 1 / y_floor].
    """
    bound = -np.log(cfg.y_floor)
    h = _clip_spectrum(h0, bound)
    f, g, d = obj.value_grad(h)
    history = [f]

    def stationarity(h, g):
        # norm of the projected gradient step; equals ||g|| away from the bound
        p = h - _clip_spectrum(h - g, bound)
        return float(np.sqrt(max(_tau_inner(p, p), 0.0)))

    gnorm = stationarity(h, g)
    it = 0
    converged = gnorm < cfg.grad_tol
    while not converged and it < cfg.max_iterations:
        it += 1
        # unit step is the preconditioned Newton guess; never move log y by more than 8
        for direction in (d, -g):
            step = min(1.0, 8.0 / max(direction.norm(), 1e-300))
            while True:
                h_new = _clip_spectrum(h + step * direction, bound)
                f_new, g_new, d_new = obj.value_grad(h_new)
                if f_new <= f + cfg.armijo * _tau_inner(g, h_new - h) or step < 1e-18:
                    break
                step *= 0.5
            if f_new < f:
                break
        else:
            converged = gnorm < cfg.grad_tol or f_new == f
            break
        decrease = f - f_new
        h, f, g, d = h_new, f_new, g_new, d_new
        history.append(f)
        gnorm = stationarity(h, g)
        if gnorm < cfg.grad_tol or decrease <= cfg.rel_tol * max(1.0, abs(f)):
            converged = True
    return h, f, float(gnorm), it, bool(converged), history


def _log_psd(y: AlgebraElement, floor: float) -> AlgebraElement:
    return functional_calculus(y, lambda t: np.log(np.maximum(t, floor)))


def _exp_h(h: AlgebraElement) -> AlgebraElement:
    return functional_calculus(h, np.exp)


def closed_form_witness(sigma: AlgebraElement, rho: AlgebraElement,
                        floor: float = 1e-12) -> AlgebraElement:
    """y = rho^(-1/2) (rho^(1/2) sigma rho^(1/2))^(1/2) rho^(-1/2), so y rho y = sigma."""
    rr = sqrt_psd(rho)
    rr_inv = functional_calculus(rho, lambda t: 1.0 / np.sqrt(np.maximum(t, floor)))
    mid = sqrt_psd(rr @ sigma @ rr)
    y = rr_inv @ mid @ rr_inv
    return (y + adjoint(y)) / 2


def var1_objective(sigma, rho, y, floor: float = 1e-12) -> float:
    return (trace(rho @ y) + trace(sigma @ inverse_psd(y, floor))).real


def var2_objective(sigma, rho, y, floor: float = 1e-12) -> float:
    yi = inverse_psd(y, floor)
    return (trace(sigma @ y) + trace(sigma @ yi) + trace(rho @ y) + trace(rho @ yi)).real


def trace_objective(a, y, floor: float = 1e-12) -> float:
    return (trace(a @ y) + trace(a @ inverse_psd(y, floor))).real


def var1_gradient(sigma, rho, y, floor: float = 1e-12) -> AlgebraElement:
    """Gradient of the var1 objective in y: rho - y^-1 sigma y^-1 (tau pairing)."""
    yi = inverse_psd(y, floor)
    return rho - yi @ sigma @ yi


def _regularize(sigma, rho, cfg: OptimizerConfig):
    alg = sigma.algebra
    if min(min_eigenvalue(sigma), min_eigenvalue(rho)) >= cfg.regularize_below:
        return sigma, rho, 0.0
    eps = cfg.epsilon / alg.total_trace
    one = AlgebraElement.identity(alg)
    return sigma + eps * one, rho + eps * one, eps


def fidelity_variational(sigma: AlgebraElement, rho: AlgebraElement, route: Route | str = Route.VAR1,
                         config: OptimizerConfig | None = None,
                         initial: AlgebraElement | None = None) -> VariationalWitness:
    """Minimise a variational objective for the fidelity over positive invertible y.

    The descent starts at the closed-form var1 optimiser unless an *initial*
    y is supplied. When either state is near-singular that optimiser is
    computed for the regularised pair (sigma + eps, rho + eps) and the
    descent then continues on the original objective, whose infimum is
    approached but not attained; ``epsilon`` records the shift.

    Raises:
        NonConvergence: iteration budget exhausted with gradient above tolerance.
    """
    route = Route(route)
    if route is Route.TRACE_POS:
        raise ValueError("use trace_variational for the single-element objective")
    cfg = config or OptimizerConfig()
    same_algebra(sigma, rho)
    if route is Route.VAR1:
        obj = _ExpObjective(rho, sigma)
    else:
        total = sigma + rho
        obj = _ExpObjective(total, total)
    if initial is None:
        s_eps, r_eps, eps = _regularize(sigma, rho, cfg)
        initial = closed_form_witness(s_eps, r_eps, cfg.y_floor)
    else:
        eps = 0.0
    h, f, gnorm, it, converged, history = _minimize(obj, _log_psd(initial, cfg.y_floor), cfg)
    witness = VariationalWitness(
        y=_exp_h(h), objective_value=f, route=route, iterations=it, grad_norm=gnorm,
        converged=converged, epsilon=eps, history=history)
    if not converged and gnorm > cfg.grad_tol:
        raise NonConvergence(
            f"{route.value}: {it} iterations, gradient norm {gnorm:.3e}", witness)
    return witness


def trace_variational(a: AlgebraElement, config: OptimizerConfig | None = None,
                      initial: AlgebraElement | None = None,
                      psd_tol: float = 1e-10) -> VariationalWitness:
    """Half the minimum of tau(a y) + tau(a y^-1); equals tau(a), attained at y = 1."""
    if not is_positive(a, psd_tol):
        raise NotPositive("trace_variational needs a positive element")
    cfg = config or OptimizerConfig()
    obj = _ExpObjective(a, a)
    h0 = AlgebraElement.zeros(a.algebra) if initial is None else _log_psd(initial, cfg.y_floor)
    h, f, gnorm, it, converged, history = _minimize(obj, h0, cfg)
    witness = VariationalWitness(
        y=_exp_h(h), objective_value=f, route=Route.TRACE_POS, iterations=it,
        grad_norm=gnorm, converged=converged, history=history)
    if not converged and gnorm > cfg.grad_tol:
        raise NonConvergence(f"trace_pos: {it} iterations, gradient norm {gnorm:.3e}", witness)
    return witness


# -- all routes at once -----------------------------------------------------------

def fidelity_routes(sigma: AlgebraElement, rho: AlgebraElement, routes=ROUTES, *,
                    config: OptimizerConfig | None = None, n_samples: int = 64,
                    rng: np.random.Generator | None = None,
                    psd_tol: float = 1e-10) -> tuple[dict[str, float], dict]:
    """Evaluate the requested routes; returns (values, diagnostics)."""
    values: dict[str, float] = {}
    diag: dict = {}
    for name in routes:
        if name == "direct":
            values[name] = fidelity(sigma, rho, psd_tol)
        elif name == "mu":
            values[name] = fidelity_via_mu(sigma, rho, psd_tol)
        elif name in ("var1", "var2"):
            try:
                w = fidelity_variational(sigma, rho, name, config)
            except NonConvergence as exc:
                w = exc.witness
                diag.setdefault("errors", {})[name] = str(exc)
            values[name] = w.value
            diag[name] = {"iterations": w.iterations, "grad_norm": w.grad_norm,
                          "converged": w.converged, "epsilon": w.epsilon}
        elif name == "block":
            v, bw = fidelity_block_supremum(sigma, rho, n_samples=n_samples, rng=rng,
                                            psd_tol=psd_tol)
            values[name] = v
            diag[name] = {"block_min_eigenvalue": bw.block_min_eigenvalue,
                          "sampled_max": bw.sampled_max, "n_samples": bw.n_samples}
        else:
            raise ValueError(f"unknown route {name!r}; choose from {ROUTES}")
    return values, diag


def max_disagreement(values: dict[str, float]) -> float:
    vals = list(values.values())
    return float(max(vals) - min(vals)) if vals else 0.0
