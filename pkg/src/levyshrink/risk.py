"""Monte Carlo risk evaluation and empirical checks of the theory.

`run_experiment` reproduces the simulation-study tables: for each horizon
it simulates replicate paths, runs both the improved (shrinkage) selection
and the plain weighted-LSE selection, and aggregates empirical quadratic
risks with standard errors.  The check_* helpers verify the stochastic
integral identities and the risk-improvement bound by direct simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.integrate import simpson

from .basis import PeriodicSignal, basis_matrix, fourier_coeffs, trig_basis
from .noise import LevyNoiseSpec, SamplePath, simulate_path
from .selection import GridParams, PinskerGrid, batch_costs, pinsker_grid, sigma_from_coeffs
from .shrinkage import ShrinkageConfig, WeightVector, estimate_fourier


def pinsker_constant(k: int, r: float) -> float:
    """Sharp asymptotic normalized-risk constant for smoothness k and radius r."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    return ((1 + 2 * k) * r) ** (1.0 / (2 * k + 1)) * (
        k / (math.pi * (k + 1))
    ) ** (2.0 * k / (2 * k + 1))


def empirical_risk(reconstruction, S, p: int) -> float:
    """Mean squared pointwise error over a uniform grid of p points on [0, 1]."""
    if p < 2:
        raise ValueError(f"grid size must be >= 2, got {p}")
    t = np.linspace(0.0, 1.0, p)
    rec = np.asarray(reconstruction(t), dtype=float) if callable(reconstruction) \
        else np.asarray(reconstruction, dtype=float)
    truth = np.asarray(S(t), dtype=float)
    return float(np.mean((rec - truth) ** 2))


def default_delta(n: int) -> float:
    """Penalty coefficient (3 + ln n)^-2 from the reference simulation settings."""
    return (3.0 + math.log(n)) ** -2


def default_r(n: int) -> float:
    """Default norm-bound sequence ln(n + 1)."""
    return math.log(n + 1)


def replicate_seed(master: int, n: int, index: int) -> np.random.SeedSequence:
    """Fixed splitting rule: one independent stream per (master, horizon, replicate)."""
    return np.random.SeedSequence([master, n, index])


@dataclass
class ExperimentConfig:
    """Full description of a Monte Carlo risk experiment."""

    horizons: Tuple[int, ...] = (100, 200, 500, 1000)
    replicates: int = 200
    eval_points: int = 100_001
    dt: float = 1e-3
    noise: LevyNoiseSpec = field(default_factory=LevyNoiseSpec.reference)
    signal: PeriodicSignal = field(default_factory=PeriodicSignal.reference)
    sigma_lower: float = 0.25
    sigma_upper: float = 0.5
    r_n: Optional[float] = None        # None: ln(n + 1)
    delta: Optional[float] = None      # None: (3 + ln n)^-2
    grid: Optional[GridParams] = None  # None: reference grid per horizon
    seed: int = 20240901
    track_grid_risks: bool = False
    figure_points: int = 1001

    def __post_init__(self):
        self.horizons = tuple(int(n) for n in self.horizons)
        if not self.horizons or any(b <= a for a, b in zip(self.horizons, self.horizons[1:])):
            raise ValueError("horizons must be a nonempty strictly increasing sequence")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.eval_points < 2:
            raise ValueError("eval_points must be >= 2")

    def grid_for(self, n: int) -> GridParams:
        return self.grid if self.grid is not None else GridParams.reference(n)

    def shrinkage_for(self, n: int) -> ShrinkageConfig:
        r = self.r_n if self.r_n is not None else default_r(n)
        return ShrinkageConfig(self.sigma_lower, self.sigma_upper, r)

    def delta_for(self, n: int) -> float:
        return self.delta if self.delta is not None else default_delta(n)


@dataclass
class HorizonResult:
    """Aggregated risks for one horizon."""

    n: int
    replicates: int
    risk_improved: float       # shrinkage selection at its own argmin
    se_improved: float
    risk_lse: float            # plain weighted-LSE selection
    se_lse: float
    risk_shrunk_at_lse: float  # shrinkage applied at the LSE-chosen weights
    se_shrunk_at_lse: float
    c_n_mean: float
    sigma_hat_mean: float
    delta: float
    grid_size: int
    grid_risks: Optional[np.ndarray] = None  # per-grid-lambda mean risks of the shrunk estimator

    @property
    def ratio_selected(self) -> float:
        """LSE risk over improved-selection risk (different argmins)."""
        return self.risk_lse / self.risk_improved

    @property
    def ratio_same_lambda(self) -> float:
        """LSE risk over shrunk-at-same-lambda risk."""
        return self.risk_lse / self.risk_shrunk_at_lse


@dataclass
class RiskReport:
    results: List[HorizonResult]
    seed: int
    figures: Dict[int, np.ndarray] = field(default_factory=dict)

    CSV_HEADER = "n,estimator,risk,stderr,ratio,c_n,sigma_hat_mean"

    def csv_rows(self) -> List[str]:
        rows = []
        for res in self.results:
            rows.append(f"{res.n},improved,{res.risk_improved!r},{res.se_improved!r},"
                        f"{res.ratio_selected!r},{res.c_n_mean!r},{res.sigma_hat_mean!r}")
            rows.append(f"{res.n},lse,{res.risk_lse!r},{res.se_lse!r},1.0,"
                        f"0.0,{res.sigma_hat_mean!r}")
            rows.append(f"{res.n},shrunk_at_lse,{res.risk_shrunk_at_lse!r},"
                        f"{res.se_shrunk_at_lse!r},{res.ratio_same_lambda!r},"
                        f"{res.c_n_mean!r},{res.sigma_hat_mean!r}")
        return rows

    def format_table(self) -> str:
        ns = [res.n for res in self.results]
        lines = []
        head = "n            " + "".join(f"{n:>12d}" for n in ns)
        lines.append("Selected-lambda comparison (each procedure chooses its own weights)")
        lines.append(head)
        lines.append("improved     " + "".join(f"{r.risk_improved:>12.4g}" for r in self.results))
        lines.append("lse          " + "".join(f"{r.risk_lse:>12.4g}" for r in self.results))
        lines.append("ratio        " + "".join(f"{r.ratio_selected:>12.3g}" for r in self.results))
        lines.append("")
        lines.append("Same-lambda comparison (shrinkage applied at the LSE choice)")
        lines.append(head)
        lines.append("shrunk       " + "".join(f"{r.risk_shrunk_at_lse:>12.4g}" for r in self.results))
        lines.append("lse          " + "".join(f"{r.risk_lse:>12.4g}" for r in self.results))
        lines.append("ratio        " + "".join(f"{r.ratio_same_lambda:>12.3g}" for r in self.results))
        return "\n".join(lines)


def _horizon_setup(cfg: ExperimentConfig, n: int):
    grid = pinsker_grid(n, cfg.grid_for(n))
    jmax = max(grid.max_support, grid.max_head, 1)
    tgrid = np.linspace(0.0, 1.0, cfg.eval_points)
    truth = np.asarray(cfg.signal(tgrid), dtype=float)
    phi = basis_matrix(jmax, tgrid)
    theta = fourier_coeffs(cfg.signal, jmax)
    resid = theta @ phi - truth  # projection residual on the evaluation grid
    return grid, jmax, tgrid, phi, theta, resid


def _shrink_factors(coeffs: np.ndarray, heads: np.ndarray,
                    cfg: ShrinkageConfig, n: int) -> Tuple[np.ndarray, np.ndarray]:
    csum = np.cumsum(coeffs[:n] ** 2)
    energy = np.where(heads > 0, csum[np.maximum(heads, 1) - 1], 0.0)
    cvec = np.where(
        heads > 1,
        (heads - 1) * cfg.sigma_lower
        / ((cfg.r_n + np.sqrt(heads * cfg.sigma_upper / n)) * n),
        0.0,
    )
    norms = np.sqrt(energy)
    s = np.where(cvec > 0, 1.0 - cvec / np.where(norms > 0, norms, 1.0), 1.0)
    return cvec, s


def _replicate_pass(cfg: ExperimentConfig, n: int, grid: PinskerGrid, jmax: int,
                    phi: np.ndarray, theta: np.ndarray, resid: np.ndarray,
                    gram: Optional[np.ndarray], cross: Optional[np.ndarray],
                    resid_ms: float, index: int):
    shr = cfg.shrinkage_for(n)
    delta = cfg.delta_for(n)
    path = simulate_path(cfg.noise, cfg.signal, n, cfg.dt,
                         seed=replicate_seed(cfg.seed, n, index))
    est = estimate_fourier(path)
    coeffs = est.coeffs
    sigma_hat = sigma_from_coeffs(coeffs, n)

    costs_imp = batch_costs(coeffs, grid, shr, sigma_hat, delta, shrink=True)
    costs_lse = batch_costs(coeffs, grid, None, sigma_hat, delta, shrink=False)
    i_star = int(np.argmin(costs_imp))
    i_hat = int(np.argmin(costs_lse))

    heads = grid.heads
    cvec, s = _shrink_factors(coeffs, heads, shr, n)
    w = grid.weight_matrix

    def coeff_error(idx: int, factor: float) -> np.ndarray:
        a = w[idx, :jmax] * coeffs[:jmax]
        d = heads[idx]
        if d:
            a[:d] *= factor
        return a - theta

    a_imp = coeff_error(i_star, s[i_star])
    a_lse = coeff_error(i_hat, 1.0)
    a_mix = coeff_error(i_hat, s[i_hat])

    def grid_risk(a: np.ndarray) -> float:
        e = a @ phi + resid
        return float(np.mean(e * e))

    risks = (grid_risk(a_imp), grid_risk(a_lse), grid_risk(a_mix))

    per_lambda = None
    if cfg.track_grid_risks:
        amat = w[:, :jmax] * coeffs[:jmax]
        headmask = np.arange(jmax) < heads[:, None]
        amat = amat + (s - 1.0)[:, None] * headmask * coeffs[:jmax]
        amat -= theta
        per_lambda = (np.einsum("ij,jk,ik->i", amat, gram, amat)
                      + 2.0 * amat @ cross + resid_ms)

    recon = None
    if index == 0:
        # rows: t, truth, lse reconstruction, improved reconstruction
        tfig = np.linspace(0.0, 1.0, cfg.figure_points)
        phif = basis_matrix(jmax, tfig)
        recon = np.vstack([
            tfig,
            np.asarray(cfg.signal(tfig), dtype=float),
            (a_lse + theta) @ phif,
            (a_imp + theta) @ phif,
        ])

    return risks, float(cvec[i_star]), sigma_hat, per_lambda, recon


def run_experiment(cfg: ExperimentConfig, n_jobs: int = 1) -> RiskReport:
    """Run the full Monte Carlo study; deterministic for a fixed master seed."""
    results = []
    figures: Dict[int, np.ndarray] = {}
    for n in cfg.horizons:
        grid, jmax, tgrid, phi, theta, resid = _horizon_setup(cfg, n)
        gram = cross = None
        resid_ms = float(np.mean(resid * resid))
        if cfg.track_grid_risks:
            gram = phi @ phi.T / cfg.eval_points
            cross = phi @ resid / cfg.eval_points

        runner = Parallel(n_jobs=n_jobs) if n_jobs != 1 else None
        args = (cfg, n, grid, jmax, phi, theta, resid, gram, cross, resid_ms)
        if runner is None:
            outs = [_replicate_pass(*args, l) for l in range(cfg.replicates)]
        else:
            outs = runner(delayed(_replicate_pass)(*args, l) for l in range(cfg.replicates))

        risks = np.array([o[0] for o in outs])  # (N, 3)
        cvals = np.array([o[1] for o in outs])
        sigmas = np.array([o[2] for o in outs])
        means = risks.mean(axis=0)
        if cfg.replicates > 1:
            ses = risks.std(axis=0, ddof=1) / math.sqrt(cfg.replicates)
        else:
            ses = np.zeros(3)
        per_lambda = None
        if cfg.track_grid_risks:
            per_lambda = np.mean(np.vstack([o[3] for o in outs]), axis=0)
        for o in outs:
            if o[4] is not None:
                figures[n] = o[4]

        results.append(HorizonResult(
            n=n, replicates=cfg.replicates,
            risk_improved=float(means[0]), se_improved=float(ses[0]),
            risk_lse=float(means[1]), se_lse=float(ses[1]),
            risk_shrunk_at_lse=float(means[2]), se_shrunk_at_lse=float(ses[2]),
            c_n_mean=float(cvals.mean()), sigma_hat_mean=float(sigmas.mean()),
            delta=cfg.delta_for(n), grid_size=len(grid),
            grid_risks=per_lambda,
        ))
    return RiskReport(results=results, seed=cfg.seed, figures=figures)


@dataclass
class ImprovementReport:
    """Monte Carlo estimate of the risk difference shrunk-minus-plain at fixed weights."""

    n: int
    replicates: int
    head: int
    threshold: float
    delta_hat: float
    se: float

    @property
    def threshold_sq(self) -> float:
        return self.threshold**2

    @property
    def upper_confidence(self) -> float:
        return self.delta_hat + 3.0 * self.se

    @property
    def improved(self) -> bool:
        return self.upper_confidence < 0.0

    @property
    def margin_vs_bound(self) -> float:
        """Slack of the bound delta <= -c^2: negative means satisfied."""
        return self.upper_confidence + self.threshold_sq


def check_improvement(noise: LevyNoiseSpec, signal: PeriodicSignal, wv: WeightVector,
                      shr: ShrinkageConfig, n: int, replicates: int = 500,
                      dt: float = 1e-3, eval_points: int = 10_001,
                      seed: int = 7, n_jobs: int = 1) -> ImprovementReport:
    """Estimate the risk difference between the shrunk and plain weighted estimators."""
    from .shrinkage import shrink_threshold

    c = shrink_threshold(wv, shr, n)
    jmax = max(wv.last_nonzero, wv.head, 1)
    tgrid = np.linspace(0.0, 1.0, eval_points)
    phi = basis_matrix(jmax, tgrid)
    theta = fourier_coeffs(signal, jmax)
    resid = theta @ phi - np.asarray(signal(tgrid), dtype=float)
    wvec = wv.weights[:jmax]
    d = wv.head

    def one(l: int) -> float:
        path = simulate_path(noise, signal, n, dt, seed=replicate_seed(seed, n, l))
        coeffs = estimate_fourier(path, jmax=jmax).coeffs
        a_plain = wvec * coeffs - theta
        a_shrunk = a_plain.copy()
        if c > 0 and d:
            norm = float(np.linalg.norm(coeffs[:d]))
            a_shrunk[:d] = (1.0 - c / norm) * coeffs[:d] - theta[:d]
        e_plain = a_plain @ phi + resid
        e_shrunk = a_shrunk @ phi + resid
        return float(np.mean(e_shrunk**2) - np.mean(e_plain**2))

    if n_jobs != 1:
        diffs = np.array(Parallel(n_jobs=n_jobs)(delayed(one)(l) for l in range(replicates)))
    else:
        diffs = np.array([one(l) for l in range(replicates)])
    se = float(diffs.std(ddof=1) / math.sqrt(replicates)) if replicates > 1 else 0.0
    return ImprovementReport(n=n, replicates=replicates, head=wv.head,
                             threshold=c, delta_hat=float(diffs.mean()), se=se)


@dataclass
class PairCheck:
    """Simulation check of the integral moment identities for one basis pair."""

    f: int
    g: int
    inner: float                # (f, g)_t
    isometry_mean: float        # mean of I(f) I(g)
    isometry_target: float      # sigma * (f, g)_t
    isometry_se: float
    fourth_mean: float          # mean of Itilde(f) Itilde(g)
    fourth_bound: float         # sigma^2 (2 (f,g)_t^2 + 4 Pi(x^4) t)
    fourth_se: float

    @property
    def isometry_ok(self) -> bool:
        return abs(self.isometry_mean - self.isometry_target) <= 3.0 * self.isometry_se

    @property
    def fourth_ok(self) -> bool:
        return abs(self.fourth_mean) <= self.fourth_bound + 3.0 * self.fourth_se


DEFAULT_PAIRS = ((1, 1), (2, 2), (2, 3), (3, 3), (2, 4), (4, 5))


def check_integral_identities(noise: LevyNoiseSpec, t: int, replicates: int = 500,
                              pairs: Sequence[Tuple[int, int]] = DEFAULT_PAIRS,
                              dt: float = 1e-3, seed: int = 11,
                              phi_bound_4: float = 4.0) -> List[PairCheck]:
    """Monte Carlo verification of the second- and fourth-moment integral identities."""
    if replicates < 100:
        raise ValueError("need at least 100 replicates")
    jmax = max(max(p) for p in pairs)
    sigma = noise.sigma
    pi4 = noise.pi_moment(4)

    integrals = np.empty((replicates, jmax))
    for l in range(replicates):
        path = simulate_path(noise, None, t, dt, seed=replicate_seed(seed, t, l))
        # I_t(phi_j) = t * coefficient estimate at horizon t
        integrals[l] = estimate_fourier(path, jmax=jmax).coeffs * t

    x = np.linspace(0.0, 1.0, 20_001)
    out = []
    for f, g in pairs:
        inner = t * float(simpson(trig_basis(f, x) * trig_basis(g, x), x=x))
        norm_f = t * float(simpson(trig_basis(f, x) ** 2, x=x))
        norm_g = t * float(simpson(trig_basis(g, x) ** 2, x=x))
        prod = integrals[:, f - 1] * integrals[:, g - 1]
        tilde = ((integrals[:, f - 1] ** 2 - sigma * norm_f)
                 * (integrals[:, g - 1] ** 2 - sigma * norm_g))
        out.append(PairCheck(
            f=f, g=g, inner=inner,
            isometry_mean=float(prod.mean()),
            isometry_target=sigma * inner,
            isometry_se=float(prod.std(ddof=1) / math.sqrt(replicates)),
            fourth_mean=float(tilde.mean()),
            fourth_bound=sigma**2 * (2.0 * inner**2 + phi_bound_4 * pi4 * t),
            fourth_se=float(tilde.std(ddof=1) / math.sqrt(replicates)),
        ))
    return out
