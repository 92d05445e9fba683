from cli import pipeline
from cli.base import GfixCommand, load_manifest
from cli.reports import to_json
from tensor_store.archive import archive_to_bytes, read_archive


class Command(GfixCommand):
    help = "Rebuild weights as base + A M_hat B from decoded maps."

    def add_arguments(self, parser):
        parser.add_argument("base", help="Base weights (.gfxt)")
        parser.add_argument("maps", help="Decoded maps archive from `gfix decode`")
        parser.add_argument("--manifest", required=True, help="Manifest JSON")
        parser.add_argument("--adapters", default=None, help="Adapter archive from `gfix decompose`")
        parser.add_argument("--out", required=True, help="Reconstructed weights archive to write (.gfxt)")
        parser.add_argument("--target", default=None, help="Target weights for a per-layer PSNR report")
        parser.add_argument("--peak", type=float, default=None, help="PSNR peak value")
        parser.add_argument("--report", default=None, help="PSNR report path (default: stdout)")

    def run(self, *args, **options):
        manifest = load_manifest(options["manifest"])
        base = read_archive(options["base"])
        maps = read_archive(options["maps"])
        adapters = read_archive(options["adapters"]) if options["adapters"] else None
        target = read_archive(options["target"]) if options["target"] else None

        archive, rebuilt = pipeline.apply_maps(base, maps, manifest, adapters=adapters)
        rows = pipeline.psnr_rows(rebuilt, target, manifest, options["peak"]) if target is not None else None
        text = to_json({"layers": rows}) if rows is not None else None
        report = options["report"] if text is not None else None
        self.write_outputs([(options["out"], archive_to_bytes(archive)), (report, text)])
        if report:
            self.stdout.write(self.style.SUCCESS(f"Wrote {report}"))
        elif text is not None:
            self.stdout.write(text, ending="")
        else:
            self.stdout.write(self.style.SUCCESS(f"Applied {len(rebuilt)} layers into {options['out']}"))
