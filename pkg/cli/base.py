# cli/base.py
from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from cli.reports import to_json
from cli.serializers import ManifestSerializer
from core.errors import EXIT_USAGE, GfixError, UsageError
from core.files import Payload, write_all_atomic, write_text_atomic

logger = logging.getLogger("cli")


def load_manifest(path: str | os.PathLike) -> Dict[str, Any]:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"Manifest not found: {p}")
    try:
        payload = json.loads(p.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, ValueError) as exc:
        raise UsageError(f"Manifest {p} is not valid JSON: {exc}") from exc
    return validate_manifest(payload)


def validate_manifest(payload: Any) -> Dict[str, Any]:
    serializer = ManifestSerializer(data=payload)
    try:
        serializer.is_valid(raise_exception=True)
    except serializers.ValidationError as exc:
        raise UsageError(f"Invalid manifest: {json.dumps(exc.detail, sort_keys=True, default=str)}") from exc
    return dict(serializer.validated_data)


def parse_float_list(text: Optional[str]):
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"Expected a comma-separated list of numbers, got {text!r}.") from exc


class GfixCommand(BaseCommand):
    """
    Base for every gfix subcommand. Subclasses implement `run(**options)`;
    library errors become CommandError with the error's exit code.
    """
    requires_system_checks = []

    def handle(self, *args, **options):
        try:
            return self.run(*args, **options)
        except GfixError as exc:
            logger.error("%s failed: %s: %s", self.command_name(), type(exc).__name__, exc)
            raise CommandError(str(exc), returncode=exc.exit_code) from exc
        except OSError as exc:
            # unreadable inputs and similar; outputs already arrive as OutputPathError
            logger.error("%s failed: %s", self.command_name(), exc)
            raise CommandError(f"{exc.strerror or exc}: {exc.filename}", returncode=EXIT_USAGE) from exc

    def run(self, *args, **options):
        raise NotImplementedError

    def command_name(self) -> str:
        return self.__class__.__module__.rsplit(".", 1)[-1].replace("_", "-")

    def write_outputs(self, outputs: Sequence[Tuple[Optional[str], Payload]]) -> None:
        """Write every requested output file or none of them; entries without a path are skipped."""
        write_all_atomic([(path, data) for path, data in outputs if path])

    def emit_json(self, payload: Dict[str, Any], out: Optional[str]) -> None:
        text = to_json(payload)
        if out:
            write_text_atomic(out, text)
            self.stdout.write(self.style.SUCCESS(f"Wrote {out}"))
        else:
            self.stdout.write(text, ending="")
