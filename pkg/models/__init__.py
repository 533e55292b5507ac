"""
Modèles de données pour les marches radiales

Ce module contient tous les modèles Pydantic utilisés pour la validation
des entrées (poids dominants, paramètres de marche) et la sérialisation
des résultats (densités, estimations, rapports de vérification).
"""

from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def parse_rational(value: Any) -> Fraction:
    """
    Convertit une valeur en rationnel exact.

    Args:
        value: Entier, Fraction, chaîne "a/b" ou décimale

    Returns:
        Rationnel exact
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


class DominantWeight(BaseModel):
    """
    Point de P⁺ en coordonnées de poids fondamentaux.

    Représente la position radiale d'un sommet de l'immeuble.
    """
    model_config = ConfigDict(frozen=True)

    x: Tuple[int, ...] = Field(description="Coordonnées dans la base λ_j")

    @field_validator("x")
    @classmethod
    def _nonnegative(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if not value:
            raise ValueError("empty weight")
        if any(v < 0 for v in value):
            raise ValueError(f"weight {value} is not dominant")
        return value

    @property
    def rank(self) -> int:
        return len(self.x)

    @property
    def length(self) -> int:
        """Longueur |λ| = somme des coordonnées."""
        return sum(self.x)

    @classmethod
    def parse(cls, text: str) -> "DominantWeight":
        """Lit une liste d'entiers séparés par des virgules."""
        return cls(x=tuple(int(part) for part in text.split(",") if part.strip()))


class WalkParams(BaseModel):
    """
    Paramètres d'une marche isotrope aux plus proches voisins.

    Le rang r, l'épaisseur q et, en rang 2, les poids de sphère (c₁, c₂).
    La marche distinguée correspond à c = None (c₁ = c₂ = 1/2 en rang 2).
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rank: int = Field(description="Rang r", ge=1, le=6)
    q: int = Field(description="Épaisseur de l'immeuble", ge=2)
    c: Optional[Tuple[Fraction, ...]] = Field(
        default=None, description="Poids de sphère (rang 2 uniquement)"
    )

    @field_validator("c", mode="before")
    @classmethod
    def _rationals(cls, value: Any) -> Any:
        if value is None:
            return None
        return tuple(parse_rational(v) for v in value)

    @model_validator(mode="after")
    def _check_weights(self) -> "WalkParams":
        if self.c is None:
            return self
        if self.rank != 2:
            raise ValueError("weighted walks are supported in rank 2 only")
        if len(self.c) != 2 or any(v <= 0 for v in self.c) or sum(self.c) != 1:
            raise ValueError(f"weights {self.c} must be positive with c1 + c2 = 1")
        return self

    @property
    def weights(self) -> Tuple[Fraction, ...]:
        """Poids de sphère effectifs (distingués : 1/2, 1/2 en rang 2)."""
        if self.c is not None:
            return self.c
        return tuple(Fraction(1, 2) for _ in range(2)) if self.rank == 2 else ()

    @property
    def is_distinguished(self) -> bool:
        return self.c is None or self.c == (Fraction(1, 2), Fraction(1, 2))

    @classmethod
    def distinguished(cls, rank: int, q: int) -> "WalkParams":
        return cls(rank=rank, q=q)

    @classmethod
    def weighted(cls, q: int, c1: Any) -> "WalkParams":
        c1 = parse_rational(c1)
        return cls(rank=2, q=q, c=(c1, 1 - c1))


class LogDensity(BaseModel):
    """Densité de transition en échelle logarithmique."""
    log_value: float = Field(description="log p (−inf si p = 0)")
    sign: int = Field(default=1, description="Signe de l'intégrale convergée")
    method: str = Field(description="Méthode de calcul")
    error_estimate: Optional[float] = Field(default=None, description="Erreur relative estimée")
    grid_points: Optional[int] = Field(default=None, description="Points par dimension")
    shifted: bool = Field(default=False, description="Contour décalé en s(δ)")


class EstimateValue(BaseModel):
    """Valeur d'une estimation fermée, décomposée en facteurs logarithmiques."""
    log_value: float = Field(description="log de l'estimation")
    regime: str = Field(description="interior / near-boundary / boundary / upper-only")
    components: Dict[str, float] = Field(default_factory=dict, description="Facteurs en log")


class PhaseSolution(BaseModel):
    """Point stationnaire de la phase réelle Φ_δ."""
    s_root: Tuple[float, ...] = Field(description="Coordonnées s^j = ⟨λ_j, s⟩")
    s_weight: Tuple[float, ...] = Field(description="Coordonnées s_j = ⟨α_j, s⟩")
    s_ambient: Tuple[float, ...] = Field(description="Coordonnées ambiantes")
    phi: float = Field(description="Minimum φ(δ)")
    h_value: float = Field(description="h(s)")
    grad_residual: float = Field(description="‖dh(s)/h(s) − δ‖∞")
    hessian: Tuple[Tuple[float, ...], ...] = Field(description="Forme B dans la base des λ_j")
    iterations: int = Field(description="Itérations de Newton")


class CheckResult(BaseModel):
    """Résultat d'une vérification individuelle."""
    name: str
    passed: bool
    measured: Dict[str, Any] = Field(default_factory=dict)
    witness: Optional[List[Any]] = None
    detail: str = ""


class IdentityReport(BaseModel):
    """Rapport de vérification exacte d'une identité d'exponentielles-polynômes."""
    name: str
    rank: int
    passed: bool
    cases_checked: int = 0
    witness: Optional[List[Any]] = None
    detail: str = ""
    coefficients: Dict[str, Any] = Field(default_factory=dict)


class SuiteReport(BaseModel):
    """Rapport agrégé d'une suite de vérification."""
    suite: str
    passed: bool
    checks: List[CheckResult] = Field(default_factory=list)
    identities: List[IdentityReport] = Field(default_factory=list)


class BandReport(BaseModel):
    """Bande mesurée du rapport oracle / estimation sur une région."""
    region: str
    count: int
    c_min: Optional[float] = None
    c_max: Optional[float] = None
    witness_min: Optional[List[int]] = None
    witness_max: Optional[List[int]] = None
    half_ratio: Optional[float] = Field(default=None, description="C/c sur la demi-région")
    widening: Optional[float] = Field(default=None, description="Élargissement relatif de C/c")
    measured: Dict[str, float] = Field(default_factory=dict)

    @property
    def ratio(self) -> Optional[float]:
        if self.c_min is None or self.c_max is None or self.c_min <= 0:
            return None
        return self.c_max / self.c_min


class SweepRow(BaseModel):
    """Ligne du CSV d'un balayage de certification."""
    n: int
    x: Tuple[int, ...]
    length: int
    d: int
    log_p_oracle: float
    log_estimate: float
    ratio: float
    regime: str


class RadialTable(BaseModel):
    """Table de transition radiale exacte par région et incrément."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    rank: int
    q: int
    weights: Tuple[Fraction, ...] = ()
    entries: Dict[str, Dict[Tuple[int, ...], Fraction]] = Field(
        description="région -> incrément -> probabilité"
    )


class DensityRecord(BaseModel):
    """Enregistrement JSON émis par la commande density."""
    rank: int
    q: int
    c1: Optional[str] = None
    n: int
    lambda_: List[int] = Field(alias="lambda")
    method: str
    log_density: Optional[float]
    density: Optional[float]
    estimate_log: Optional[float] = None
    ratio: Optional[float] = None
    quadrature_error: Optional[float] = None
    exact: bool = False
    numerator: Optional[str] = None
    denominator: Optional[str] = None
    exact_value: Optional[str] = None

    model_config = ConfigDict(populate_by_name=True)


class PhaseRecord(BaseModel):
    """Enregistrement JSON émis par la commande phase."""
    rank: int
    q: int
    delta: List[float]
    solution: PhaseSolution
