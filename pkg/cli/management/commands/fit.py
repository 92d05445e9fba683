import logging

from cli import pipeline
from cli.base import GfixCommand, load_manifest, parse_float_list
from cli.reports import to_json
from codec.bitstream import encode_bytes
from core.errors import UsageError
from tensor_store.archive import read_archive

logger = logging.getLogger("cli")


class Command(GfixCommand):
    help = "Fit modulation maps to target weights under R + lambda*D and write the GFXB stream."

    def add_arguments(self, parser):
        parser.add_argument("base", help="Base weights (.gfxt)")
        parser.add_argument("target", help="Target (fine-tuned) weights (.gfxt)")
        parser.add_argument("--manifest", required=True, help="Manifest JSON")
        parser.add_argument("--lambda", dest="lambda_", type=float, default=None,
                            help="Rate-distortion tradeoff (default: first manifest lambda)")
        parser.add_argument("--grid", default=None, help="Comma-separated ascending step grid")
        parser.add_argument("--adapters", default=None, help="Adapter archive from `gfix decompose`")
        parser.add_argument("--out", required=True, help="Bitstream to write (.gfxb)")
        parser.add_argument("--report", default=None, help="JSON report path (default: stdout)")

    def run(self, *args, **options):
        manifest = load_manifest(options["manifest"])
        lam = options["lambda_"]
        if lam is None:
            lam = manifest["lambdas"][0]
        if not lam >= 0:
            raise UsageError(f"--lambda must be >= 0, got {lam}.")
        base = read_archive(options["base"])
        target = read_archive(options["target"])
        adapters = read_archive(options["adapters"]) if options["adapters"] else None

        result = pipeline.fit(base, target, manifest, lam, grid=parse_float_list(options["grid"]),
                              adapters=adapters)
        blob, stats = encode_bytes(result.groups)

        report = result.to_report()
        report["stream"] = {
            "path": str(options["out"]),
            "payload_bytes": sum(s.payload_bytes for s in stats),
            "header_bytes": sum(s.header_bytes for s in stats),
        }
        text = to_json(report)

        self.write_outputs([(options["out"], blob), (options["report"], text)])
        logger.info("fit wrote %s bytes=%d groups=%d", options["out"], len(blob), len(stats))
        if options["report"]:
            self.stdout.write(self.style.SUCCESS(f"Wrote {options['report']}"))
        else:
            self.stdout.write(text, ending="")
