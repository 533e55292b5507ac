"""
Configuration centralisée pour l'application

Ce module gère toute la configuration de l'application : paramètres de
quadrature, de minimisation de la phase, d'extrapolation de F₀, garde-fous
de la programmation dynamique et requête de la ligne de commande.
Aucune variable d'environnement n'est lue : les valeurs viennent des
défauts ci-dessous ou des options de la ligne de commande.
"""

import logging
import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Dict, Optional, Tuple


METHODS = ("dp", "fourier", "fourier-raw", "estimate", "auto")
SUITES = (
    "identities", "lemma34", "global-psi", "harnack", "plancherel",
    "eigenfunction", "table", "aperiodicity", "lemma44", "boundary",
)
REGIONS = (
    "rank2-full", "rank2-interior", "rank2-boundary", "rank1",
    "rankr-interior", "rankr-upper", "weighted-upper",
)


@dataclass(frozen=True)
class QuadratureConfig:
    """Configuration de la quadrature trapézoïdale sur le tore"""
    base_points: int = 64
    max_doublings: int = 6
    tolerance: float = 1e-8
    shift: Optional[bool] = None  # None : politique automatique
    shift_min_steps: int = 20
    shift_min_delta: float = 0.2
    shift_delta_cap: float = 0.999


@dataclass(frozen=True)
class PhaseConfig:
    """Configuration de la méthode de Newton sur la phase réelle"""
    tolerance: float = 1e-12
    max_iterations: int = 200
    armijo: float = 1e-4
    rejection_margin: float = 1e-8
    min_step: float = 1e-14
    full_step_decrement: float = 1e-12
    decrement_tolerance: float = 1e-26


@dataclass(frozen=True)
class SpecialFnConfig:
    """Configuration de l'extrapolation de Richardson pour F₀"""
    base_epsilon: float = 1e-2
    min_levels: int = 5
    max_levels: int = 16
    accept_spread: float = 1e-12
    fail_spread: float = 1e-9
    extra_digits: int = 40


@dataclass(frozen=True)
class DPConfig:
    """Garde-fous de la programmation dynamique exacte"""
    max_steps_rank2: int = 2000
    max_steps_rank1: int = 20000
    enumeration_limit: int = 12


@dataclass(frozen=True)
class ServiceConfig:
    """Configuration générale du service"""
    name: str
    version: str
    description: str
    log_level: str
    debug: bool = False


@dataclass
class RunConfig:
    """Requête de la ligne de commande, validée avant l'aiguillage"""
    command: str = ""
    rank: int = 2
    q: int = 2
    c1: Optional[Fraction] = None
    n: int = 0
    x: Tuple[int, ...] = ()
    method: str = "auto"
    tolerance: float = 1e-8
    eta: float = 0.3
    nmax: int = 60
    m: int = 4
    out: Optional[str] = None
    seed: int = 42
    threads: int = 1
    suite: Optional[str] = None
    region: Optional[str] = None
    delta: Optional[Tuple[float, ...]] = None
    variant: str = "envelope"


@dataclass
class AppConfig:
    """Configuration complète de l'application"""
    service: ServiceConfig
    quadrature: QuadratureConfig
    phase: PhaseConfig
    special: SpecialFnConfig
    dp: DPConfig
    run: RunConfig = field(default_factory=RunConfig)


class ConfigManager:
    """
    Gestionnaire centralisé de configuration.

    Construit la configuration par défaut puis applique les valeurs
    fournies sur la ligne de commande.
    """

    def __init__(self):
        """Initialise le gestionnaire de configuration."""
        self._setup_logging()
        self.config = self._load_config()

    def _setup_logging(self):
        """Configure le logging pour le gestionnaire."""
        self.logger = logging.getLogger(__name__)

    def _load_config(self) -> AppConfig:
        """
        Construit la configuration par défaut.

        Returns:
            Configuration complète de l'application
        """
        service_config = ServiceConfig(
            name="Radial Heat Kernels",
            version="1.0.0",
            description=(
                "Densités de transition des marches isotropes sur les "
                "immeubles affines de type Ã_r"
            ),
            log_level="WARNING",
            debug=False,
        )

        self.logger.debug("Default configuration loaded")
        return AppConfig(
            service=service_config,
            quadrature=QuadratureConfig(),
            phase=PhaseConfig(),
            special=SpecialFnConfig(),
            dp=DPConfig(),
        )

    def get_config(self) -> AppConfig:
        """
        Retourne la configuration complète.

        Returns:
            Configuration de l'application
        """
        return self.config

    def apply_arguments(self, args: Any) -> AppConfig:
        """
        Applique les options de la ligne de commande à la configuration.

        Args:
            args: Espace de noms produit par argparse

        Returns:
            Configuration mise à jour
        """
        values = vars(args)
        run = RunConfig(
            command=values.get("command") or "",
            rank=values.get("rank", 2),
            q=values.get("q", 2),
            c1=values.get("c1"),
            n=values.get("n", 0),
            x=tuple(values.get("x") or ()),
            method=values.get("method", "auto"),
            tolerance=values.get("tol", 1e-8),
            eta=values.get("eta", 0.3),
            nmax=values.get("nmax", 60),
            m=values.get("m", 4),
            out=values.get("out"),
            seed=values.get("seed", 42),
            threads=values.get("threads", 1),
            suite=values.get("suite"),
            region=values.get("region"),
            delta=tuple(values["delta"]) if values.get("delta") else None,
            variant=values.get("variant", "envelope"),
        )
        log_level = (values.get("log_level") or self.config.service.log_level).upper()
        debug = bool(values.get("debug", False))
        self.config.service = replace(
            self.config.service,
            log_level="DEBUG" if debug else log_level,
            debug=debug,
        )
        self.config.quadrature = replace(self.config.quadrature, tolerance=run.tolerance)
        self.config.run = run
        return self.config

    def get_run_dict(self) -> Dict[str, Any]:
        """
        Retourne la requête courante sous forme de dictionnaire.

        Utile pour joindre les paramètres d'exécution aux rapports.

        Returns:
            Requête en dictionnaire
        """
        run = self.config.run
        return {
            "command": run.command,
            "rank": run.rank,
            "q": run.q,
            "c1": str(run.c1) if run.c1 is not None else None,
            "n": run.n,
            "lambda": list(run.x),
            "method": run.method,
            "tolerance": run.tolerance,
        }

    def setup_application_logging(self):
        """
        Configure le logging au niveau de l'application.

        Les messages partent sur stderr pour laisser stdout aux sorties
        JSON et CSV.
        """
        log_level = getattr(logging, self.config.service.log_level, logging.WARNING)

        log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        if self.config.service.debug:
            log_format = '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s'

        logging.basicConfig(
            level=log_level,
            format=log_format,
            force=True  # Force la reconfiguration
        )

        self.logger.info(f"Logging configured - Level: {self.config.service.log_level}")

    def validate_config(self) -> bool:
        """
        Valide la configuration chargée.

        Returns:
            True si la configuration est valide, False sinon
        """
        run = self.config.run
        quad = self.config.quadrature
        try:
            if not (1 <= run.rank <= 6):
                self.logger.error(f"Invalid rank: {run.rank} (supported 1..6)")
                return False

            if run.q < 2:
                self.logger.error(f"Invalid thickness q: {run.q}")
                return False

            if run.n < 0:
                self.logger.error(f"Invalid number of steps: {run.n}")
                return False

            if run.x and len(run.x) != run.rank:
                self.logger.error(f"Lambda has {len(run.x)} coordinates, rank is {run.rank}")
                return False

            if any(v < 0 for v in run.x):
                self.logger.error(f"Lambda is not dominant: {run.x}")
                return False

            if run.c1 is not None and (run.rank != 2 or not (0 < run.c1 < 1)):
                self.logger.error(f"Invalid c1={run.c1} (rank 2 only, 0 < c1 < 1)")
                return False

            if run.method not in METHODS:
                self.logger.error(f"Unknown method: {run.method}")
                return False

            if not (0 < quad.tolerance < 1e-2):
                self.logger.error(f"Tolerance out of range: {quad.tolerance}")
                return False

            if quad.base_points < 16:
                self.logger.error(f"Base grid too coarse: {quad.base_points}")
                return False

            if not (0 < run.eta < 1):
                self.logger.error(f"Invalid eta: {run.eta}")
                return False

            if run.threads < 1:
                self.logger.error(f"Invalid thread count: {run.threads}")
                return False

            self.logger.info("Configuration validation passed")
            return True

        except Exception as e:
            self.logger.error(f"Configuration validation failed: {str(e)}")
            return False

    def print_config_summary(self):
        """Affiche un résumé de la configuration pour debugging."""
        config = self.config
        run = config.run

        out = sys.stderr
        print("\n" + "=" * 60, file=out)
        print("Configuration Summary", file=out)
        print("=" * 60, file=out)
        print(f"Service: {config.service.name} v{config.service.version}", file=out)
        print(f"Log Level: {config.service.log_level}", file=out)
        print(f"Debug Mode: {config.service.debug}", file=out)
        print(f"Command: {run.command} (rank={run.rank}, q={run.q}, c1={run.c1})", file=out)
        print(f"Steps: n={run.n}, lambda={run.x}, method={run.method}", file=out)
        print(f"Quadrature: M0={config.quadrature.base_points}, "
              f"doublings={config.quadrature.max_doublings}, tol={config.quadrature.tolerance}", file=out)
        print(f"Threads: {run.threads}, seed: {run.seed}", file=out)
        print("=" * 60 + "\n", file=out)


# Instance globale du gestionnaire de configuration
config_manager = ConfigManager()
