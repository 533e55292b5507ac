"""
Phase réelle et phase complexe

Ce module minimise la phase strictement convexe
Φ_δ(z) = log(h(z)/h(0)) − ⟨δ,z⟩ par la méthode de Newton avec recherche
linéaire d'Armijo, fournit le point stationnaire s(δ), la valeur φ(δ), la
forme hessienne B = −d²Ψ(0) et les diagnostics numériques associés
(signes, bandes mesurées, positivité globale de −Re Ψ).

Conventions : les points de 𝔞 sont manipulés en coordonnées de racines
ζ^j = ⟨λ_j, z⟩ ; δ est donné en coordonnées de poids δ_j = ⟨α_j, δ⟩, de
sorte que ⟨δ, z⟩ = δ·ζ.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from core.config import PhaseConfig, config_manager
from core.errors import DomainError, InputError, NumericError
from models import CheckResult, PhaseSolution, WalkParams
from services.root_system import AmbientVector, root_system
from services.special_fn import h_at_zero, h_values, orbit_coefficients, orbit_matrix


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhaseProblem:
    """
    Problème de minimisation de Φ_δ.

    δ est stocké en coordonnées de poids ; il doit appartenir à la chambre
    fermée et vérifier |δ| = Σ_j δ_j < 1.
    """
    params: WalkParams
    delta: Tuple[float, ...]

    def __post_init__(self):
        delta = tuple(float(v) for v in self.delta)
        object.__setattr__(self, "delta", delta)
        if len(delta) != self.params.rank:
            raise InputError(f"delta has {len(delta)} coordinates, rank is {self.params.rank}")
        if any(v < 0 for v in delta):
            raise DomainError(f"delta {delta} is outside the closed positive chamber")
        if self.length >= 1:
            raise DomainError(f"|delta| = {self.length} must be < 1")

    @property
    def length(self) -> float:
        return float(sum(self.delta))

    @property
    def vector(self) -> AmbientVector:
        return AmbientVector.from_weight_coords(self.delta)

    @classmethod
    def from_vector(cls, p: WalkParams, delta: AmbientVector) -> "PhaseProblem":
        return cls(p, tuple(float(v) for v in delta.weight_coords().real))

    @classmethod
    def from_position(cls, p: WalkParams, n: int, weight: Sequence[int]) -> "PhaseProblem":
        """
        δ = (λ+ρ)/(n+r) ; en rang 1 cela donne (k+1)/(n+1) et en rang 2
        (λ+ρ)/(n+2).
        """
        if len(weight) != p.rank:
            raise InputError(f"weight {tuple(weight)} does not match rank {p.rank}")
        if sum(weight) > n:
            raise DomainError(f"|lambda| = {sum(weight)} exceeds n = {n}")
        return cls(p, tuple((x + 1) / (n + p.rank) for x in weight))


class _LogSumExp:
    """log h et ses deux premières dérivées en coordonnées de racines."""

    def __init__(self, p: WalkParams):
        weights, coefs = orbit_matrix(p.rank, orbit_coefficients(p))
        self.weights = weights
        self.log_coefs = np.log(coefs)
        self.log_norm = math.log(float(h_at_zero(p)))

    def value(self, zeta: np.ndarray) -> float:
        a = self.weights @ zeta + self.log_coefs
        top = a.max()
        return float(top + np.log(np.exp(a - top).sum()))

    def derivatives(self, zeta: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        a = self.weights @ zeta + self.log_coefs
        top = a.max()
        e = np.exp(a - top)
        total = e.sum()
        probs = e / total
        grad = self.weights.T @ probs
        hess = (self.weights.T * probs) @ self.weights - np.outer(grad, grad)
        return float(top + math.log(total)), grad, hess


def _warm_start(rank: int, length: float) -> np.ndarray:
    """log((1+|δ|)/(1−|δ|))·ρ/r en coordonnées de racines."""
    rho_root = np.array([j * (rank + 1 - j) / 2 for j in range(1, rank + 1)])
    return math.log((1 + length) / (1 - length)) * rho_root / rank


def _newton(delta: np.ndarray, p: WalkParams, cfg: PhaseConfig) -> Tuple[np.ndarray, float, int]:
    """Minimise Φ_δ sans contrôle du domaine ; retourne (ζ, log h(ζ), itérations)."""
    lse = _LogSumExp(p)
    length = float(delta.sum())
    zeta = _warm_start(p.rank, min(abs(length), 1 - 1e-12))

    for iteration in range(cfg.max_iterations + 1):
        log_h, grad_h, hess = lse.derivatives(zeta)
        grad = grad_h - delta
        if np.max(np.abs(grad)) <= cfg.tolerance:
            return zeta, log_h, iteration
        if iteration == cfg.max_iterations:
            break
        try:
            step = linalg.solve(hess, -grad, assume_a="pos")
        except (linalg.LinAlgError, ValueError):
            step = -grad
        current = log_h - delta @ zeta
        slope = grad @ step
        scale = max(1.0, abs(current))
        if -slope <= cfg.decrement_tolerance * scale:
            zeta = zeta + step
            return zeta, lse.value(zeta), iteration + 1
        # Armijo ne distingue plus la décroissance de l'arrondi
        if -slope <= cfg.full_step_decrement * scale:
            zeta = zeta + step
            continue
        t = 1.0
        while t >= cfg.min_step:
            candidate = zeta + t * step
            if lse.value(candidate) - delta @ candidate <= current + cfg.armijo * t * slope:
                break
            t /= 2
        if t < cfg.min_step:
            t = 1.0
        zeta = zeta + t * step

    raise NumericError(
        f"Newton did not converge in {cfg.max_iterations} steps for delta={tuple(delta)}",
        [float(np.max(np.abs(grad)))],
    )


def hessian_B(s, p: WalkParams) -> np.ndarray:
    """
    Forme B = −d²Ψ(0) = d²(log h)(s) dans la base des coordonnées θ^j.

    Args:
        s: AmbientVector ou coordonnées de racines
        p: paramètres de marche
    """
    zeta = s.root_coords().real if isinstance(s, AmbientVector) else np.asarray(s, dtype=float)
    _, _, hess = _LogSumExp(p).derivatives(zeta)
    return hess


def solve_stationary(prob: PhaseProblem, cfg: Optional[PhaseConfig] = None) -> PhaseSolution:
    """
    Résout dh(s)/h(s) = δ et retourne le minimum global de Φ_δ.

    Args:
        prob: problème de phase
        cfg: configuration de Newton

    Returns:
        Solution avec s dans les trois systèmes de coordonnées, φ(δ), B

    Raises:
        DomainError: si |δ| dépasse 1 − 10⁻⁸
        NumericError: si Newton ne converge pas
    """
    cfg = cfg or config_manager.get_config().phase
    if prob.length > 1 - cfg.rejection_margin:
        raise DomainError(
            f"|delta| = {prob.length} is too close to 1; use the boundary estimate instead"
        )
    delta = np.array(prob.delta)
    zeta, log_h, iterations = _newton(delta, prob.params, cfg)
    lse = _LogSumExp(prob.params)
    _, grad_h, hess = lse.derivatives(zeta)
    system = root_system(prob.params.rank)

    phi = log_h - lse.log_norm - float(delta @ zeta)
    if phi > 1e-12:
        raise NumericError(f"phase minimum {phi} is positive for delta={prob.delta}")
    logger.debug(f"Stationary point for delta={prob.delta}: {iterations} Newton steps, phi={phi:.6g}")

    return PhaseSolution(
        s_root=tuple(float(v) for v in zeta),
        s_weight=tuple(float(v) for v in system.cartan @ zeta),
        s_ambient=tuple(float(v) for v in AmbientVector.from_root_coords(zeta).coords),
        phi=phi,
        h_value=math.exp(log_h),
        grad_residual=float(np.max(np.abs(grad_h - delta))),
        hessian=tuple(tuple(float(v) for v in row) for row in hess),
        iterations=iterations,
    )


def phi_value(p: WalkParams, delta: Sequence[float], cfg: Optional[PhaseConfig] = None) -> float:
    """φ(δ) sans contrôle de chambre (δ peut sortir légèrement d'un mur)."""
    cfg = cfg or config_manager.get_config().phase
    delta = np.asarray(delta, dtype=float)
    zeta, log_h, _ = _newton(delta, p, cfg)
    return log_h - _LogSumExp(p).log_norm - float(delta @ zeta)


def phi_batch(p: WalkParams, deltas: np.ndarray, cfg: Optional[PhaseConfig] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    φ(δ) et s(δ) pour un tableau (m, r) de δ, par Newton vectorisé.

    Chaque ligne suit sa propre recherche d'Armijo ; les lignes convergées
    ne bougent plus.

    Returns:
        (φ de forme (m,), s en coordonnées de racines de forme (m, r))
    """
    cfg = cfg or config_manager.get_config().phase
    deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
    lengths = deltas.sum(axis=1)
    if np.any(lengths > 1 - cfg.rejection_margin) or np.any(deltas < 0):
        raise DomainError("every delta must lie in the closed chamber with |delta| < 1")
    lse = _LogSumExp(p)
    rho_root = np.array([j * (p.rank + 1 - j) / 2 for j in range(1, p.rank + 1)])
    zeta = (np.log((1 + lengths) / (1 - lengths)) / p.rank)[:, None] * rho_root

    def evaluate(points: np.ndarray):
        a = points @ lse.weights.T + lse.log_coefs
        top = a.max(axis=1, keepdims=True)
        e = np.exp(a - top)
        total = e.sum(axis=1, keepdims=True)
        return (top + np.log(total))[:, 0], e / total

    done = np.zeros(len(zeta), dtype=bool)
    for _ in range(cfg.max_iterations):
        log_h, probs = evaluate(zeta)
        grad_h = probs @ lse.weights
        grad = grad_h - deltas
        active = ~done & (np.max(np.abs(grad), axis=1) > cfg.tolerance)
        if not active.any():
            break
        hess = np.einsum("mk,ki,kj->mij", probs, lse.weights, lse.weights) - np.einsum("mi,mj->mij", grad_h, grad_h)
        step = np.linalg.solve(hess, -grad[..., None])[..., 0]
        step[~active] = 0.0
        current = log_h - np.einsum("mi,mi->m", deltas, zeta)
        slope = np.einsum("mi,mi->m", grad, step)
        scale = np.maximum(1.0, np.abs(current))
        settled = active & (-slope <= cfg.decrement_tolerance * scale)
        done |= settled
        t = np.ones(len(zeta))
        fine = -slope <= cfg.full_step_decrement * scale
        for _ in range(60):
            candidate = zeta + t[:, None] * step
            value = evaluate(candidate)[0] - np.einsum("mi,mi->m", deltas, candidate)
            failing = ~fine & (value > current + cfg.armijo * t * slope)
            if not failing.any():
                break
            t = np.where(failing, t / 2, t)
        t = np.where(t < cfg.min_step, 1.0, t)
        zeta = zeta + t[:, None] * step
    else:
        raise NumericError(f"batched Newton did not converge in {cfg.max_iterations} steps")

    log_h, _ = evaluate(zeta)
    phi = log_h - lse.log_norm - np.einsum("mi,mi->m", deltas, zeta)
    return np.minimum(phi, 0.0), zeta


def phi_rank1(delta: float) -> float:
    """Forme close en rang 1 : −½[(1+δ)log(1+δ) + (1−δ)log(1−δ)]."""
    if not (0 <= delta <= 1):
        raise DomainError(f"delta {delta} outside [0, 1]")
    left = (1 + delta) * math.log1p(delta)
    right = 0.0 if delta == 1 else (1 - delta) * math.log1p(-delta)
    return -0.5 * (left + right)


def dphi_check(prob: PhaseProblem, step: float = 1e-5, cfg: Optional[PhaseConfig] = None) -> float:
    """
    Écart maximal entre la différence finie centrée de φ le long de chaque
    direction λ_k et −s^k.
    """
    if prob.length > 1 - 1e-3:
        raise DomainError(f"|delta| = {prob.length} too close to 1 for finite differences")
    solution = solve_stationary(prob, cfg)
    deviation = 0.0
    for k in range(prob.params.rank):
        plus = list(prob.delta)
        minus = list(prob.delta)
        plus[k] += step
        minus[k] -= step
        derivative = (phi_value(prob.params, plus, cfg) - phi_value(prob.params, minus, cfg)) / (2 * step)
        deviation = max(deviation, abs(derivative + solution.s_root[k]))
    return deviation


def psi_values(s_root: Sequence[float], theta_root: np.ndarray, p: WalkParams,
               delta: Optional[Sequence[float]] = None) -> np.ndarray:
    """Ψ(θ) = log(h(s+iθ)/h(s)) − i⟨δ,θ⟩ sur un tableau (..., r) de θ^j."""
    s_root = np.asarray(s_root, dtype=float)
    theta_root = np.asarray(theta_root, dtype=float)
    ratio = h_values(s_root + 1j * theta_root, p) / h_values(s_root[None, :], p)[0]
    values = np.log(ratio)
    if delta is not None:
        values = values - 1j * (theta_root @ np.asarray(delta, dtype=float))
    return values


def lemma36_band(s_root: Sequence[float], p: WalkParams, angles: int = 360) -> Tuple[float, float]:
    """
    Bande min/max de B(θ,θ) / [e^{−(s¹−s²)}(θ¹−θ²)² + e^{−s²}(θ¹+θ²)²]
    sur le cercle unité, avec s¹ ≥ s² (échange sinon).
    """
    if p.rank != 2:
        raise InputError("the Hessian comparison band is defined in rank 2")
    s1, s2 = float(s_root[0]), float(s_root[1])
    if s1 < s2:
        s1, s2 = s2, s1
    hess = hessian_B([s1, s2], p)
    t = np.linspace(0, 2 * np.pi, angles, endpoint=False)
    theta = np.stack([np.cos(t), np.sin(t)], axis=-1)
    form = np.einsum("ij,jk,ik->i", theta, hess, theta)
    reference = np.exp(-(s1 - s2)) * (theta[:, 0] - theta[:, 1]) ** 2 + np.exp(-s2) * (theta[:, 0] + theta[:, 1]) ** 2
    ratio = form / reference
    return float(ratio.min()), float(ratio.max())


def varpi(s_ambient: Sequence[float]) -> float:
    """ϖ(s) = (e^{s₁+s_{r+1}} + 2e^{s_{r+1}} + 1) ∏_{1<j<r+1} (e^{s_j} + 1)."""
    s = np.asarray(s_ambient, dtype=float)
    value = math.exp(s[0] + s[-1]) + 2 * math.exp(s[-1]) + 1
    for sj in s[1:-1]:
        value *= math.exp(sj) + 1
    return value


def random_deltas(rank: int, count: int, seed: int, max_length: float = 0.999) -> np.ndarray:
    """δ uniformes dans le simplexe {δ_j ≥ 0, |δ| ≤ max_length}."""
    rng = np.random.default_rng(seed)
    samples = rng.dirichlet(np.ones(rank + 1), size=count)[:, :rank]
    return samples * max_length


def _minimal_representative(t: np.ndarray, rank: int) -> np.ndarray:
    """Représentant de t modulo ℤ^r de norme ‖Σ t_j α_j‖ minimale."""
    cartan = root_system(rank).cartan.astype(float)
    best = t.copy()
    best_norm = np.einsum("...i,ij,...j->...", t, cartan, t)
    for shift in np.ndindex(*(4,) * rank):
        candidate = t - (np.array(shift) - 1)
        norm = np.einsum("...i,ij,...j->...", candidate, cartan, candidate)
        better = norm < best_norm
        best = np.where(better[..., None], candidate, best)
        best_norm = np.where(better, norm, best_norm)
    return best


def global_psi_check(p: WalkParams, s_values: Iterable[float], points: int = 101,
                     ball: float = 1e-3) -> CheckResult:
    """
    min sur θ ∈ U∖{0} et sur la grille de s de −log(|h(s+iθ)|/h(s)) / B(θ,θ).

    θ est ramené au représentant de norme minimale modulo 2πQ et une boule
    de rayon `ball` autour des points du réseau est exclue.
    """
    rank = p.rank
    grid_1d = np.arange(points) / points
    t = np.stack(np.meshgrid(*(grid_1d,) * rank, indexing="ij"), axis=-1).reshape(-1, rank)
    t = _minimal_representative(t, rank)
    cartan = root_system(rank).cartan.astype(float)
    norm = 2 * np.pi * np.sqrt(np.einsum("ni,ij,nj->n", t, cartan, t))
    t = t[norm > ball]
    theta_root = 2 * np.pi * t

    worst = math.inf
    witness = None
    s_values = list(s_values)
    for s_point in _s_grid(rank, s_values):
        hess = hessian_B(s_point, p)
        form = np.einsum("ni,ij,nj->n", theta_root, hess, theta_root)
        decay = -np.real(psi_values(s_point, theta_root, p))
        ratio = decay / form
        index = int(np.argmin(ratio))
        if ratio[index] < worst:
            worst = float(ratio[index])
            witness = [float(v) for v in s_point] + [float(v) for v in theta_root[index]]

    passed = worst > 0
    if not passed:
        logger.warning(f"Global phase positivity violated at {witness}")
    return CheckResult(
        name="global-psi", passed=passed,
        measured={"min_ratio": worst, "grid_points": int(theta_root.shape[0])},
        witness=None if passed else witness,
        detail="min of -Re(Psi)/B over the torus",
    )


def _s_grid(rank: int, values: Sequence[float]) -> List[np.ndarray]:
    return [np.array(point, dtype=float) for point in np.array(np.meshgrid(*(values,) * rank)).reshape(rank, -1).T]


def imaginary_phase_constant(p: WalkParams, s_values: Iterable[float], radius: float = 0.1,
                      angles: int = 72) -> float:
    """Constante mesurée de |Im Ψ(θ)| / (|θ| B(θ,θ)) pour |θ| ≤ radius."""
    rank = p.rank
    worst = 0.0
    for s_point in _s_grid(rank, list(s_values)):
        hess = hessian_B(s_point, p)
        zeta = np.asarray(s_point)
        log_h = _LogSumExp(p)
        _, grad, _ = log_h.derivatives(zeta)
        rng = np.random.default_rng(0)
        directions = rng.normal(size=(angles, rank))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        for r in (radius, radius / 4, radius / 16):
            theta = r * directions
            psi = psi_values(zeta, theta, p, delta=grad)
            form = np.einsum("ni,ij,nj->n", theta, hess, theta)
            worst = max(worst, float(np.max(np.abs(psi.imag) / (r * form))))
    return worst


def check_lemma34(p: WalkParams, deltas: np.ndarray, cfg: Optional[PhaseConfig] = None) -> List[CheckResult]:
    """
    Propriétés (d) à (g) du point stationnaire en rang 2 : annulation
    simultanée, bandes (e) et (f) mesurées, signes (g).
    """
    if p.rank != 2:
        raise InputError("these stationary-point properties are stated in rank 2")
    vanish_violations, sign_violations = [], []
    band_e, band_f = [], []
    for delta in deltas:
        sol = solve_stationary(PhaseProblem(p, tuple(delta)), cfg)
        s1, s2 = sol.s_root
        for j in range(2):
            if (delta[j] == 0) != (abs(sol.s_weight[j]) <= 1e-9):
                vanish_violations.append([float(v) for v in delta])
        diff_delta = delta[0] - delta[1]
        diff_s = sol.s_weight[0] - sol.s_weight[1]
        if abs(diff_delta) > 1e-9 and np.sign(diff_delta) != np.sign(diff_s):
            sign_violations.append([float(v) for v in delta])
        band_e.append((1 - sum(delta)) * math.exp(min(s1, s2)))
        top = max(delta)
        if top > 0:
            band_f.append(math.exp(-abs(s1 - s2)) / (1 - top))

    results = [
        CheckResult(
            name="lemma34-vanishing", passed=not vanish_violations,
            measured={"violations": len(vanish_violations)},
            witness=vanish_violations[0] if vanish_violations else None,
            detail="delta_j = 0 iff s_j = 0",
        ),
        CheckResult(
            name="lemma34-sign", passed=not sign_violations,
            measured={"violations": len(sign_violations)},
            witness=sign_violations[0] if sign_violations else None,
            detail="sign(delta_1 - delta_2) = sign(s_1 - s_2)",
        ),
    ]
    for name, band in (("lemma34-e", band_e), ("lemma34-f", band_f)):
        low, high = (min(band), max(band)) if band else (math.nan, math.nan)
        results.append(CheckResult(
            name=name, passed=bool(band) and low > 0 and math.isfinite(high),
            measured={"min": low, "max": high, "ratio": high / low if band and low > 0 else math.inf},
            detail="two-sided band, constants measured",
        ))
    return results


def check_lemma44(p: WalkParams, deltas: np.ndarray, cfg: Optional[PhaseConfig] = None) -> CheckResult:
    """h(s)(1−|δ|) = ϖ(s) − 2 ≥ 2 sur une grille de δ."""
    worst_gap = math.inf
    worst_identity = 0.0
    witness = None
    for delta in deltas:
        sol = solve_stationary(PhaseProblem(p, tuple(delta)), cfg)
        lhs = sol.h_value * (1 - sum(delta))
        identity = abs(lhs - (varpi(sol.s_ambient) - 2)) / max(1.0, lhs)
        worst_identity = max(worst_identity, identity)
        if lhs - 2 < worst_gap:
            worst_gap = lhs - 2
            witness = [float(v) for v in delta]
    passed = worst_gap >= -1e-9 and worst_identity <= 1e-8
    return CheckResult(
        name="lemma44", passed=passed,
        measured={"min_excess": worst_gap, "identity_error": worst_identity},
        witness=None if passed else witness,
        detail="h(s)(1-|delta|) = varpi(s) - 2 >= 2",
    )


def check_denominator_bound(p: WalkParams, ns: Sequence[int], points: int = 64,
                      cfg: Optional[PhaseConfig] = None) -> CheckResult:
    """
    Dénominateur |h(s+iθ) + 2(n+1)/(n+3)| : borne supérieure ≤ 4/3·h(s)
    vérifiée, constante inférieure n·min|…|/h(s) mesurée loin du mur
    supplémentaire.
    """
    if p.rank != 2:
        raise InputError("the denominator estimate is stated in rank 2")
    grid_1d = 2 * np.pi * np.arange(points) / points
    theta = np.stack(np.meshgrid(grid_1d, grid_1d, indexing="ij"), axis=-1).reshape(-1, 2)
    upper_ok = True
    lower = math.inf
    witness = None
    for n in ns:
        shift = 2 * (n + 1) / (n + 3)
        for x2 in range(max(1, n // 8), n // 4 + 1):
            for x1 in range(x2 + max(1, n // 4), n - x2):
                sol = solve_stationary(PhaseProblem.from_position(p, n, (x1, x2)), cfg)
                values = np.abs(h_values(np.array(sol.s_root) + 1j * theta, p) + shift)
                if values.max() > 4 / 3 * sol.h_value * (1 + 1e-12):
                    upper_ok = False
                    witness = [n, x1, x2]
                measured = n * float(values.min()) / sol.h_value
                if measured < lower:
                    lower = measured
                    if upper_ok:
                        witness = [n, x1, x2]
    passed = upper_ok and lower > 0
    return CheckResult(
        name="denominator-bound", passed=passed,
        measured={"lower_constant": lower},
        witness=None if passed else witness,
        detail="|h(s+i theta) + 2(n+1)/(n+3)| between h(s)/n and 4/3 h(s)",
    )


def check_ray_monotonicity(p: WalkParams, directions: np.ndarray, steps: int = 20,
                           cfg: Optional[PhaseConfig] = None) -> CheckResult:
    """φ décroît strictement le long des rayons issus de 0 et reste dans (−log N, 0]."""
    log_norm = math.log(float(h_at_zero(p)))
    violations = []
    for direction in directions:
        direction = np.asarray(direction, dtype=float)
        direction = direction / direction.sum()
        previous = 0.0
        for k in range(1, steps + 1):
            delta = direction * 0.99 * k / steps
            phi = solve_stationary(PhaseProblem(p, tuple(delta)), cfg).phi
            if not (phi < previous and phi > -log_norm):
                violations.append([float(v) for v in delta])
                break
            previous = phi
    return CheckResult(
        name="phi-rays", passed=not violations,
        measured={"violations": len(violations)},
        witness=violations[0] if violations else None,
        detail="phi strictly decreasing along rays, within (-log N, 0]",
    )


def check_blowup(p: WalkParams, direction: Sequence[float], exponents: Sequence[int] = (1, 2, 3, 4, 5, 6),
                 cfg: Optional[PhaseConfig] = None) -> CheckResult:
    """min_j s^j croît lorsque |δ| = 1 − 10⁻ᵏ."""
    direction = np.asarray(direction, dtype=float)
    direction = direction / direction.sum()
    mins = []
    for k in exponents:
        sol = solve_stationary(PhaseProblem(p, tuple(direction * (1 - 10.0 ** (-k)))), cfg)
        mins.append(min(sol.s_root))
    increasing = all(b > a for a, b in zip(mins, mins[1:]))
    return CheckResult(
        name="phase-blowup", passed=increasing,
        measured={f"k={k}": v for k, v in zip(exponents, mins)},
        detail="min_j s^j increases as |delta| -> 1",
    )


def lemma_diagnostics(p: WalkParams, deltas: Optional[np.ndarray] = None, seed: int = 42,
                      cfg: Optional[PhaseConfig] = None) -> List[CheckResult]:
    """
    Diagnostics du point stationnaire applicables au rang de p.

    Returns:
        Liste de résultats (un par propriété vérifiée)
    """
    if deltas is None:
        deltas = random_deltas(p.rank, 200, seed)
    results: List[CheckResult] = []
    if p.rank == 2:
        results.extend(check_lemma34(p, deltas, cfg))
        results.append(check_denominator_bound(p, (20, 40), cfg=cfg))
    results.append(check_lemma44(p, deltas, cfg))
    for result in results:
        logger.info(f"{result.name}: passed={result.passed} {result.measured}")
    return results


def measured_bands(p: WalkParams, s_values: Sequence[float]) -> Dict[str, float]:
    """Bande de la comparaison hessienne sur une grille de s (rang 2)."""
    lows, highs = [], []
    for s_point in _s_grid(2, list(s_values)):
        low, high = lemma36_band(s_point, p)
        lows.append(low)
        highs.append(high)
    return {"min": min(lows), "max": max(highs), "ratio": max(highs) / min(lows)}
