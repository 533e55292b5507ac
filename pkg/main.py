"""
Point d'entrée principal de la ligne de commande

Ce module construit l'analyseur d'arguments, applique la configuration,
aiguille vers les commandes (density, phase, sweep, verify, table) et
transforme les erreurs en documents JSON sur stderr et en codes de sortie :
0 succès, 1 échec numérique ou de vérification, 2 entrée invalide.
"""

import argparse
import logging
import sys
from typing import List, Optional, Sequence

from pydantic import ValidationError

from core.config import METHODS, REGIONS, SUITES, config_manager
from core.errors import InputError, RadialWalkError, VerificationError
from models import parse_rational
from api.density import create_density_commands
from api.output import emit, emit_error, summary_lines, to_json
from api.sweep import create_sweep_command
from api.verify import create_verify_commands


# Configuration du logging
logger = logging.getLogger(__name__)


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _rational(text: str):
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational such as 1/3, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    """
    Construit l'analyseur de la ligne de commande.

    Returns:
        Analyseur avec une sous-commande par famille de commandes
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank", type=int, default=2, help="Rang r (1..6)")
    common.add_argument("--q", type=int, default=2, help="Épaisseur q ≥ 2")
    common.add_argument("--c1", type=_rational, default=None, help="Poids de sphère c₁ (rang 2)")
    common.add_argument("--n", type=int, default=0, help="Nombre de pas")
    common.add_argument("--x", type=_int_list, default=None, help="λ en coordonnées de poids, ex. 3,1")
    common.add_argument("--method", choices=METHODS, default="auto")
    common.add_argument("--tol", type=float, default=1e-8, help="Tolérance de quadrature")
    common.add_argument("--eta", type=float, default=0.3, help="Marge η du régime intérieur")
    common.add_argument("--nmax", type=int, default=60, help="N_max des balayages")
    common.add_argument("--m", type=int, default=4, help="Profondeur de bord m")
    common.add_argument("--out", default=None, help="Fichier de sortie (stdout sinon)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--delta", type=_float_list, default=None, help="δ explicite pour phase")
    common.add_argument("--variant", choices=("envelope", "spherical"), default="envelope")
    common.add_argument("--log-level", dest="log_level", default=None,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    common.add_argument("--debug", action="store_true")

    parser = argparse.ArgumentParser(
        prog="radial-heat",
        description="Densités de transition des marches isotropes sur les immeubles de type Ã_r",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("density", parents=[common], help="Densité pₙ(λ)")
    commands.add_parser("phase", parents=[common], help="Point stationnaire de la phase")
    sweep = commands.add_parser("sweep", parents=[common], help="Balayage de certification")
    sweep.add_argument("region", choices=REGIONS)
    verify = commands.add_parser("verify", parents=[common], help="Suite de vérification")
    verify.add_argument("suite", choices=SUITES)
    commands.add_parser("table", parents=[common], help="Table radiale exacte")
    return parser


def dispatch(command: str) -> int:
    """
    Exécute une commande sur la configuration courante.

    Returns:
        Code de sortie

    Raises:
        VerificationError: si une suite échoue (après émission du rapport)
    """
    config = config_manager.get_config()
    out = config.run.out

    if command in ("density", "phase"):
        record = create_density_commands(config)[command]()
        emit(to_json(record), out)
        return 0

    if command == "sweep":
        result = create_sweep_command(config)()
        emit(result.csv, out)
        sys.stderr.write(to_json(result.band) + "\n")
        return 0

    if command in ("verify", "table"):
        document = create_verify_commands(config)[command]()
        emit(to_json(document), out)
        for line in summary_lines(document):
            sys.stderr.write(line + "\n")
        if not document["passed"]:
            raise VerificationError(f"suite {document['suite']} failed", document.get("witness"))
        return 0

    raise InputError(f"unknown command {command!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Point d'entrée de la ligne de commande.

    Args:
        argv: arguments (sys.argv[1:] par défaut)

    Returns:
        Code de sortie 0, 1 ou 2
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    config_manager.apply_arguments(args)
    config_manager.setup_application_logging()
    config = config_manager.get_config()

    logger.info("=" * 80)
    logger.info(f"{config.service.name} v{config.service.version}: {args.command}")
    logger.info("=" * 80)

    if config.service.debug:
        config_manager.print_config_summary()

    try:
        if not config_manager.validate_config():
            raise InputError("configuration validation failed; see the log for the rejected field")
        return dispatch(args.command)
    except RadialWalkError as e:
        logger.error(f"{e.error_type}: {e.detail}")
        emit_error(e)
        return e.exit_code
    except ValidationError as e:
        error = InputError(str(e))
        logger.error(f"invalid_input: {e}")
        emit_error(error)
        return error.exit_code
    except Exception as e:
        logger.error(f"Unhandled exception: {str(e)}", exc_info=True)
        emit_error(e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
