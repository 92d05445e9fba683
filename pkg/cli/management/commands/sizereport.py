from dataclasses import asdict
from pathlib import Path

from cli import pipeline
from cli.base import GfixCommand, load_manifest
from core.errors import UsageError
from mlora.sizing import DTYPE_WIDTH, size_report, size_table
from tensor_store.archive import read_archive


class Command(GfixCommand):
    help = "LoRA vs mLoRA parameter and byte accounting for the manifest's layers."

    def add_arguments(self, parser):
        parser.add_argument("base", help="Base weights (.gfxt)")
        parser.add_argument("--manifest", required=True, help="Manifest JSON")
        parser.add_argument("--dtype", choices=sorted(DTYPE_WIDTH), default="f32")
        parser.add_argument("--coded", default=None, help="GFXB stream whose size is added to the table")
        parser.add_argument("--reference-bytes", dest="reference_bytes", type=int, default=None,
                            help="Size of a reference stream for share-of-reference columns")
        parser.add_argument("--out", default=None, help="JSON path (default: stdout)")

    def run(self, *args, **options):
        manifest = load_manifest(options["manifest"])
        base = read_archive(options["base"])
        layers = pipeline.layer_dims(base, manifest)
        if not layers:
            raise UsageError("Manifest selects no layers; nothing to size.")
        report = size_report(layers, options["dtype"])

        coded = None
        if options["coded"]:
            coded_path = Path(options["coded"])
            if not coded_path.exists():
                raise UsageError(f"File not found: {coded_path}")
            coded = coded_path.stat().st_size

        payload = asdict(report)
        payload["megabytes"] = dict(zip(("lora", "mlora"), report.megabytes()))
        payload["layers"] = [
            {"name": layer["name"], "m": m, "n": n, "rank": r}
            for layer, (m, n, r) in zip(manifest["layers"], layers)
        ]
        payload["table"] = size_table(report, coded_bytes=coded, reference_bytes=options["reference_bytes"])
        self.emit_json(payload, options["out"])
