"""
Commandes de vérification

verify SUITE exécute une suite et rend son rapport ; table imprime la
table radiale exacte et vérifie ses lignes (alias de verify table).
"""

import logging
from typing import Any, Callable, Dict, List, Optional

from core.config import SUITES, AppConfig
from core.errors import InputError
from models import RadialTable, SuiteReport
from services.diagnostics import run_suite
from services.radial_dp import build_table
from api.density import walk_params


logger = logging.getLogger(__name__)


def table_document(table: RadialTable) -> Dict[str, Any]:
    """Table radiale sous forme de rationnels exacts écrits en chaînes."""
    return {
        "rank": table.rank,
        "q": table.q,
        "weights": [str(c) for c in table.weights],
        "entries": {
            region: {",".join(str(v) for v in mu): str(prob) for mu, prob in sorted(row.items(), reverse=True)}
            for region, row in table.entries.items()
        },
    }


def first_witness(report: SuiteReport) -> Optional[List[Any]]:
    """Témoin du premier échec d'un rapport, s'il existe."""
    for check in report.checks:
        if not check.passed:
            return check.witness or [check.name]
    for identity in report.identities:
        if not identity.passed:
            return identity.witness or [identity.name]
    return None


def create_verify_commands(config: AppConfig) -> Dict[str, Callable[[], Dict[str, Any]]]:
    """
    Crée les commandes de vérification avec la configuration injectée.

    Args:
        config: configuration de l'application (requête comprise)

    Returns:
        Dictionnaire nom de commande -> gestionnaire
    """

    def cmd_verify() -> Dict[str, Any]:
        """
        Exécute la suite demandée.

        Returns:
            Rapport de la suite (avec la table pour la suite table)

        Raises:
            InputError: suite inconnue
        """
        run = config.run
        if run.suite not in SUITES:
            raise InputError(f"unknown suite {run.suite!r}; expected one of {', '.join(SUITES)}")
        p = walk_params(run)
        report = run_suite(run.suite, p, run)
        document = report.model_dump()
        if not report.passed:
            document["witness"] = first_witness(report)
        if run.suite == "table":
            document["table"] = table_document(build_table(p))
        return document

    def cmd_table() -> Dict[str, Any]:
        config.run.suite = "table"
        return cmd_verify()

    return {"verify": cmd_verify, "table": cmd_table}
