"""
Hiérarchie d'exceptions de l'application

Chaque exception porte un type d'erreur (repris dans le document JSON
d'erreur émis par la ligne de commande) et un code de sortie :
2 pour une entrée invalide, 1 pour un échec numérique ou de vérification.
"""

from typing import Optional, Sequence


class RadialWalkError(Exception):
    """Classe de base de toutes les erreurs métier."""

    error_type = "error"
    exit_code = 1

    def __init__(self, detail: str, witness: Optional[Sequence] = None):
        super().__init__(detail)
        self.detail = detail
        self.witness = tuple(witness) if witness is not None else None


class InputError(RadialWalkError, ValueError):
    """Entrée invalide (paramètres, coordonnées, rang incohérent)."""

    error_type = "invalid_input"
    exit_code = 2


class DomainError(InputError):
    """Point hors du domaine d'une opération (|δ| ≥ 1, |λ| > n, d < 0)."""

    error_type = "domain_error"


class RegimeError(InputError):
    """Estimation demandée hors de son régime de validité."""

    error_type = "regime_error"

    def __init__(self, detail: str, applicable: str):
        super().__init__(f"{detail}; use {applicable} instead")
        self.applicable = applicable


class UnsupportedError(InputError):
    """Combinaison de paramètres non prise en charge."""

    error_type = "unsupported"


class ResourceError(InputError):
    """Garde-fou mémoire ou temps dépassé."""

    error_type = "resource_limit"


class NumericError(RadialWalkError):
    """Échec numérique : non-convergence, signe incorrect."""

    error_type = "numeric_failure"

    def __init__(self, detail: str, estimates: Optional[Sequence[float]] = None):
        super().__init__(detail)
        self.estimates = tuple(estimates) if estimates is not None else ()


class PoleError(NumericError):
    """Évaluation de la fonction c sur un mur singulier."""

    error_type = "pole"


class VerificationError(RadialWalkError):
    """Une suite de vérification a échoué."""

    error_type = "verification_failure"
