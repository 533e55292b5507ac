"""
Commande de balayage de certification

Parcourt une région, compare l'oracle à l'estimation fermée et rend le CSV
des cellules avec la bande mesurée.
"""

import logging
from dataclasses import dataclass
from typing import Callable

from core.config import REGIONS, AppConfig
from core.errors import InputError
from models import BandReport
from services.estimates import certify_sweep
from api.density import walk_params
from api.output import sweep_csv


logger = logging.getLogger(__name__)


@dataclass
class SweepOutput:
    """CSV du balayage et bande mesurée."""
    csv: str
    band: BandReport


def create_sweep_command(config: AppConfig) -> Callable[[], SweepOutput]:
    """
    Crée la commande sweep avec la configuration injectée.

    Args:
        config: configuration de l'application (requête comprise)

    Returns:
        Gestionnaire de la commande
    """

    def cmd_sweep() -> SweepOutput:
        """
        Balayage d'une région : CSV n, x1..xr, |x|, d, log_p_oracle,
        log_estimate, ratio, regime, puis une ligne de synthèse.

        Raises:
            InputError: région inconnue ou incompatible avec le rang
        """
        run = config.run
        if run.region not in REGIONS:
            raise InputError(f"unknown region {run.region!r}; expected one of {', '.join(REGIONS)}")
        p = walk_params(run)
        band, rows = certify_sweep(p, run.region, run.nmax, run.eta, run.m, run.threads)
        if not rows:
            logger.warning(f"Region {run.region} is empty for nmax={run.nmax}")
        return SweepOutput(csv=sweep_csv(rows, band, p.rank), band=band)

    return cmd_sweep
