"""
Rendu des sorties de la ligne de commande

JSON pour les requêtes ponctuelles et les rapports, CSV (RFC 4180, UTF-8,
séparateur décimal '.') pour les balayages. Les flottants du CSV sont écrits
avec 17 chiffres significatifs ; les non-finis deviennent null (JSON) ou
une cellule vide (CSV).
"""

import csv
import io
import json
import logging
import math
import sys
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, List, Optional

from core.errors import NumericError, RadialWalkError
from models import BandReport, SweepRow


logger = logging.getLogger(__name__)


def format_float(value: Optional[float]) -> Optional[str]:
    """Écriture '.17g' d'un flottant, None s'il n'est pas fini."""
    if value is None or not math.isfinite(value):
        return None
    return format(value, ".17g")


def _prepare(value: Any) -> Any:
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): _prepare(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_prepare(v) for v in value]
    return value


def _default(value: Any) -> str:
    # Fraction et autres scalaires exacts
    return str(value)


def to_json(document: Any) -> str:
    """
    Sérialise un document (dict ou modèle) de façon déterministe.

    Les flottants gardent leur repr la plus courte qui se relit à
    l'identique (au plus 17 chiffres significatifs).
    """
    if hasattr(document, "model_dump"):
        document = document.model_dump(by_alias=True)
    return json.dumps(_prepare(document), indent=2, ensure_ascii=False, default=_default, allow_nan=False)


def emit(text: str, out: Optional[str] = None):
    """Écrit un texte sur stdout ou dans le fichier demandé."""
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    with open(out, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    logger.info(f"Output written to {out}")


def sweep_csv(rows: Iterable[SweepRow], band: BandReport, rank: int) -> str:
    """
    CSV d'un balayage : une ligne par cellule puis une ligne de synthèse.

    La ligne de synthèse n'est écrite que si la région n'est pas vide.

    Args:
        rows: lignes du balayage
        band: bande mesurée
        rank: rang (nombre de colonnes x1..xr)

    Returns:
        Texte CSV terminé par CRLF
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    header = ["n", *[f"x{j + 1}" for j in range(rank)], "|x|", "d",
              "log_p_oracle", "log_estimate", "ratio", "regime"]
    writer.writerow(header)
    rows = list(rows)
    for row in rows:
        writer.writerow([
            row.n, *row.x, row.length, row.d,
            format_float(row.log_p_oracle) or "", format_float(row.log_estimate) or "",
            format_float(row.ratio) or "", row.regime,
        ])
    if rows:
        summary = ["summary", *[""] * rank, "", "", "", "",
                   f"c_min={format_float(band.c_min)}", f"c_max={format_float(band.c_max)}"]
        writer.writerow(summary)
    return buffer.getvalue()


def error_document(error: BaseException) -> Dict[str, Any]:
    """Document JSON d'erreur émis sur stderr."""
    document: Dict[str, Any] = {
        "status": "error",
        "error_type": getattr(error, "error_type", "internal_error"),
        "detail": getattr(error, "detail", str(error)),
        "timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
    }
    if isinstance(error, RadialWalkError) and error.witness is not None:
        document["witness"] = list(error.witness)
    if isinstance(error, NumericError) and error.estimates:
        document["estimates"] = list(error.estimates)
    return document


def emit_error(error: BaseException):
    sys.stderr.write(to_json(error_document(error)) + "\n")


def summary_lines(report: Dict[str, Any]) -> List[str]:
    """Résumé lisible d'un rapport de suite, pour stderr."""
    lines = [f"suite {report['suite']}: {'PASS' if report['passed'] else 'FAIL'}"]
    for check in report.get("checks", []):
        lines.append(f"  [{'ok' if check['passed'] else 'FAIL'}] {check['name']}")
    for identity in report.get("identities", []):
        lines.append(f"  [{'ok' if identity['passed'] else 'FAIL'}] {identity['name']} (rank {identity['rank']})")
    return lines
