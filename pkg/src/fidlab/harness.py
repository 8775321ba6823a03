"""Seeded random sweeps over channels and states, and channel classification.

Every trial draws from its own generator, seeded by ``SeedSequence([seed, i])``,
so a report depends only on ``(seed, n_trials)`` and the trial order never
matters. Sampled verdicts are statistical: "no violation in N samples".
"""
from __future__ import annotations

import csv
import enum
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import AlgebraElement, TracialAlgebra
from .channels import (KrausChannel, LinearMap, as_map, depolarizing, mix,
                       recover_unitary, sample_fidelity_changes, transpose_map, unitary_channel)
from .errors import MultiBlockUnsupported, NotUnitaryImplementable, ValidationError
from .fidelity import bures_distance, fidelity
from .sampling import (random_density, random_kraus, random_orthogonal_densities,
                       random_pure_density, random_unitary)
from .serialize import to_jsonable

MARGIN_TOL = 1e-9
METRIC_TOL = 1e-10
CLASSIFY_TOL = 1e-8

Channel = KrausChannel | LinearMap


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def trial_seed(seed: int, index: int) -> int:
    """A 32-bit integer identifying the trial's stream, for CSV output."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


@dataclass
class SweepReport:
    """Outcome of a sweep; ``passed`` holds iff ``min_margin >= -tol``."""

    kind: str
    n_trials: int
    min_margin: float
    worst_case: dict
    passed: bool
    seed: int
    tol: float
    details: dict = field(default_factory=dict)
    margins: list[float] = field(default_factory=list, repr=False)
    runtime_ms: int = field(default=0, compare=False)

    def to_dict(self, include_runtime: bool = False) -> dict:
        out = {"kind": self.kind, "n_trials": self.n_trials, "min_margin": self.min_margin,
               "worst_case": self.worst_case, "pass": self.passed, "seed": self.seed,
               "tol": self.tol, "details": self.details}
        if include_runtime:
            out["runtime_ms"] = self.runtime_ms
        return to_jsonable(out)

    @property
    def summary(self) -> str:
        verdict = f"no violation in {self.n_trials} trials" if self.passed else "violation found"
        return f"{self.kind}: {verdict}, min margin {self.min_margin:.3e}"


def write_csv(report: SweepReport, path) -> None:
    """Per-trial margins as ``trial_index, margin, seed``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["trial_index", "margin", "seed"])
        for i, m in enumerate(report.margins):
            w.writerow([i, repr(float(m)), trial_seed(report.seed, i)])


# -- channel and pair sources --------------------------------------------------------

def _mixed_unitary(alg: TracialAlgebra, rng, n: int = 3) -> KrausChannel:
    p = rng.dirichlet(np.ones(n))
    return KrausChannel(alg, tuple(np.sqrt(pk) * random_unitary(alg, rng) for pk in p),
                        tp_tol=1e-8)


def random_cptp(alg: TracialAlgebra, rng) -> KrausChannel:
    n_kraus = int(rng.integers(1, 4))
    return KrausChannel(alg, tuple(random_kraus(alg, rng, n_kraus)), tp_tol=1e-8)


def random_unital_positive(alg: TracialAlgebra, rng) -> LinearMap:
    """p T o U1 + (1 - p) U2 with U1, U2 mixed-unitary channels and T the transpose.

    Positive, unital and trace preserving, but not completely positive for p > 1/2
    in general.
    """
    p = rng.uniform()
    t = transpose_map(alg)
    return p * (t @ as_map(_mixed_unitary(alg, rng))) + (1 - p) * as_map(_mixed_unitary(alg, rng))


def random_positive_tp(alg: TracialAlgebra, rng) -> LinearMap:
    """p T o E1 + (1 - p) E2 for random CPTP E1, E2: positive, trace preserving, not Schwarz."""
    p = rng.uniform()
    t = transpose_map(alg)
    return p * (t @ as_map(random_cptp(alg, rng))) + (1 - p) * as_map(random_cptp(alg, rng))


CHANNEL_SOURCES: dict[str, Callable[[TracialAlgebra, np.random.Generator], Channel]] = {
    "random_cptp": random_cptp,
    "random_unital_positive": random_unital_positive,
    "random_positive_tp": random_positive_tp,
    "unitary": lambda alg, rng: unitary_channel(random_unitary(alg, rng)),
}


def sample_pair(alg: TracialAlgebra, rng, kind: str = "mixed", index: int = 0):
    """A density pair of the requested kind ('random', 'orthogonal', 'pure', 'mixed')."""
    if kind == "mixed":
        kind = ("random", "orthogonal", "pure", "lowrank")[index % 4]
        if kind == "orthogonal" and sum(alg.dims) < 2:
            kind = "random"
    if kind == "random":
        return random_density(alg, rng), random_density(alg, rng)
    if kind == "orthogonal":
        return random_orthogonal_densities(alg, rng)
    if kind == "pure":
        return random_pure_density(alg, rng), random_pure_density(alg, rng)
    if kind == "lowrank":
        r = max(1, max(alg.dims) // 2)
        return random_density(alg, rng, rank=r), random_density(alg, rng, rank=r)
    raise ValidationError(f"unknown pair kind {kind!r}")


def _resolve_algebra(d: int | TracialAlgebra) -> TracialAlgebra:
    return d if isinstance(d, TracialAlgebra) else TracialAlgebra.matrix(int(d))


# -- sweeps ------------------------------------------------------------------------------

def monotonicity_sweep(source: str | Channel, d: int | TracialAlgebra, n_trials: int,
                       seed: int = 0, *, pair_kind: str = "mixed",
                       margin_tol: float = MARGIN_TOL) -> SweepReport:
    """Record F(E s, E r) - F(s, r) over random (channel, pair) trials.

    Args:
        source: a name from :data:`CHANNEL_SOURCES`, or a fixed channel
            (the "user supplied" source).
        d: matrix size or an explicit algebra.
    """
    start = time.perf_counter()
    if isinstance(source, (KrausChannel, LinearMap)):
        fixed = source
        alg = source.algebra if isinstance(source, KrausChannel) else source.domain
        name = "user_supplied"
    else:
        if source not in CHANNEL_SOURCES:
            raise ValidationError(f"unknown channel source {source!r}; "
                                  f"choose from {sorted(CHANNEL_SOURCES)}")
        fixed, alg, name = None, _resolve_algebra(d), source
    margins = []
    worst, worst_case = np.inf, {}
    for i in range(n_trials):
        rng = trial_rng(seed, i)
        ch = fixed if fixed is not None else CHANNEL_SOURCES[name](alg, rng)
        s, r = sample_pair(alg, rng, pair_kind, i)
        margin = fidelity(ch(s), ch(r)) - fidelity(s, r)
        margins.append(margin)
        if margin < worst:
            worst = margin
            worst_case = {"trial_index": i, "sigma": s, "rho": r,
                          "channel": ch if isinstance(ch, KrausChannel) else None}
    worst = float(worst) if margins else 0.0
    return SweepReport("monotonicity", n_trials, worst, to_jsonable(worst_case),
                       worst >= -margin_tol, seed, margin_tol,
                       {"source": name, "algebra": alg.to_dict(), "pair_kind": pair_kind},
                       margins, int(1000 * (time.perf_counter() - start)))


def metric_sweep(d: int | TracialAlgebra, n_triples: int, seed: int = 0, *,
                 tol: float = METRIC_TOL) -> SweepReport:
    """Check the Bures distance axioms on random triples.

    The margin of a triple is the smallest of the three triangle slacks
    d(a,b) + d(b,c) - d(a,c) over the choice of middle point. Symmetry and
    identity defects are reported in ``details``, measured on the fidelity
    (the square root amplifies roundoff near zero distance).
    """
    start = time.perf_counter()
    alg = _resolve_algebra(d)
    margins = []
    worst, worst_case = np.inf, {}
    sym_defect = ident_defect = 0.0
    for i in range(n_triples):
        rng = trial_rng(seed, i)
        kind = i % 4
        if kind == 3:
            trio = [random_pure_density(alg, rng) for _ in range(3)]
        else:
            trio = [random_density(alg, rng, rank=None if kind == 0 else kind) for _ in range(3)]
        dist = {}
        for a in range(3):
            for b in range(a + 1, 3):
                dist[a, b] = dist[b, a] = bures_distance(trio[a], trio[b])
                sym_defect = max(sym_defect, abs(fidelity(trio[a], trio[b])
                                                 - fidelity(trio[b], trio[a])))
        ident_defect = max(ident_defect, abs(1.0 - fidelity(trio[0], trio[0])))
        margin = min(dist[a, m] + dist[m, c] - dist[a, c]
                     for m in range(3) for a, c in ((0, 1), (0, 2), (1, 2)) if m not in (a, c))
        margins.append(margin)
        if margin < worst:
            worst, worst_case = margin, {"trial_index": i, "states": trio}
    worst = float(worst) if margins else 0.0
    ok = worst >= -tol and sym_defect <= tol
    return SweepReport("metric", n_triples, worst, to_jsonable(worst_case), bool(ok), seed, tol,
                       {"algebra": alg.to_dict(), "symmetry_defect": sym_defect,
                        "identity_defect": ident_defect},
                       margins, int(1000 * (time.perf_counter() - start)))


# -- preservation classification ---------------------------------------------------------

class Preservation(str, enum.Enum):
    PRESERVING = "Preserving"
    STRICTLY_INCREASING = "StrictlyIncreasingSomewhere"


@dataclass
class Classification:
    verdict: Preservation
    n_pairs: int
    max_abs_change: float
    max_increase: float
    witness: tuple[AlgebraElement, AlgebraElement] | None = None
    unitary: AlgebraElement | None = None
    recovery_error: str | None = None

    @property
    def summary(self) -> str:
        if self.verdict is Preservation.PRESERVING:
            return f"no fidelity change beyond tolerance in {self.n_pairs} samples"
        return f"fidelity increased by {self.max_increase:.3e} on a sampled pair"


def preservation_classify(ch: Channel, n_pairs: int = 60, seed: int = 0,
                          tol: float = CLASSIFY_TOL) -> Classification:
    """Sample pairs and decide whether the channel preserves fidelity.

    Preserving channels are handed to :func:`recover_unitary`; the recovered
    unitary, or the reason recovery failed, is attached.
    """
    rng = np.random.default_rng(seed)
    max_abs, max_inc, witness = 0.0, -np.inf, None
    for delta, s, r in sample_fidelity_changes(ch, n_pairs, rng):
        max_abs = max(max_abs, abs(delta))
        if delta > max_inc:
            max_inc, witness = delta, (s, r)
    if max_abs <= tol:
        try:
            u = recover_unitary(ch, check=False)
            return Classification(Preservation.PRESERVING, n_pairs, max_abs, max_inc, None, u)
        except (NotUnitaryImplementable, MultiBlockUnsupported) as exc:
            return Classification(Preservation.PRESERVING, n_pairs, max_abs, max_inc,
                                  None, None, str(exc))
    return Classification(Preservation.STRICTLY_INCREASING, n_pairs, max_abs, float(max_inc),
                          witness)


@dataclass
class InjectivityCertificate:
    smallest_singular_value: float
    sampled_min_ratio: float
    n_trials: int
    injective: bool


def injectivity_probe(phi: Channel, n_trials: int = 32, seed: int = 0,
                      threshold: float = 1e-8) -> InjectivityCertificate:
    """Smallest singular value of the map in tau-orthonormal coordinates.

    The exact value comes from an SVD; ``sampled_min_ratio`` is the smallest
    ||E(x)||_2 / ||x||_2 over random x and is an upper bound for it.
    """
    m = as_map(phi)
    wd = np.sqrt(np.concatenate([np.full(d * d, w) for d, w in zip(m.domain.dims,
                                                                     m.domain.weights)]))
    wc = np.sqrt(np.concatenate([np.full(d * d, w) for d, w in zip(m.codomain.dims,
                                                                     m.codomain.weights)]))
    scaled = (wc[:, None] * m.matrix) / wd[None, :]
    # SVD rather than eigh of the Gram matrix: keeps tiny singular values accurate
    smin = float(np.linalg.svd(scaled, compute_uv=False).min())
    rng = np.random.default_rng(seed)
    ratio = np.inf
    for _ in range(n_trials):
        v = rng.standard_normal(m.domain.dimension) + 1j * rng.standard_normal(m.domain.dimension)
        ratio = min(ratio, float(np.linalg.norm(scaled @ v) / np.linalg.norm(v)))
    return InjectivityCertificate(smin, ratio, n_trials, smin > threshold)


# -- counterexample search -----------------------------------------------------------------

def counterexample_search(d: int | TracialAlgebra, n_maps: int, n_pairs: int = 20, seed: int = 0,
                          source: str | Callable = "random_positive_tp",
                          tol: float = MARGIN_TOL) -> SweepReport:
    """Look for trace-preserving positive maps that lower fidelity somewhere.

    This is a search hook, not a theorem check: a pass means nothing was
    found among the sampled maps and pairs.
    """
    alg = _resolve_algebra(d)
    make = CHANNEL_SOURCES[source] if isinstance(source, str) else source
    start = time.perf_counter()
    margins, worst, worst_case = [], np.inf, {}
    for i in range(n_maps):
        rng = trial_rng(seed, i)
        phi = make(alg, rng)
        for j in range(n_pairs):
            s, r = sample_pair(alg, rng, "mixed", j)
            margin = fidelity(phi(s), phi(r)) - fidelity(s, r)
            margins.append(margin)
            if margin < worst:
                worst, worst_case = margin, {"map_index": i, "sigma": s, "rho": r}
    worst = float(worst) if margins else 0.0
    return SweepReport("counterexample_search", len(margins), worst, to_jsonable(worst_case),
                       worst >= -tol, seed, tol, {"n_maps": n_maps, "algebra": alg.to_dict()},
                       margins, int(1000 * (time.perf_counter() - start)))


def labeled_zoo(d: int = 2, seed: int = 0) -> list[tuple[str, Channel, Preservation]]:
    """Channels with known fidelity behaviour, for classification checks."""
    alg = TracialAlgebra.matrix(d)
    rng = np.random.default_rng(seed)
    from .channels import amplitude_damping, trace_collapse_map
    zoo = [("unitary", unitary_channel(random_unitary(alg, rng)), Preservation.PRESERVING),
           ("identity", unitary_channel(AlgebraElement.identity(alg)), Preservation.PRESERVING),
           ("depolarizing-0.2", depolarizing(alg, 0.2), Preservation.STRICTLY_INCREASING),
           ("trace-collapse", trace_collapse_map(alg), Preservation.STRICTLY_INCREASING)]
    if d == 2:
        zoo.append(("amplitude-damping-0.3", amplitude_damping(0.3),
                    Preservation.STRICTLY_INCREASING))
        zoo.append(("near-unitary-mix", mix(unitary_channel(random_unitary(alg, rng)),
                                            depolarizing(alg, 1.0), 0.99),
                    Preservation.STRICTLY_INCREASING))
    return zoo
