from cli import pipeline
from cli.base import GfixCommand, load_manifest, parse_float_list
from cli.reports import to_json
from core.conf import gfix_version
from metrics.bdrate import rd_points
from metrics.curves import curve_csv_text
from tensor_store.archive import read_archive


class Command(GfixCommand):
    help = "Sweep lambda and report one rate-distortion point per value."

    def add_arguments(self, parser):
        parser.add_argument("base", help="Base weights (.gfxt)")
        parser.add_argument("target", help="Target weights (.gfxt)")
        parser.add_argument("--manifest", required=True, help="Manifest JSON")
        parser.add_argument("--lambdas", default=None, help="Comma-separated lambdas (default: manifest)")
        parser.add_argument("--grid", default=None, help="Comma-separated ascending step grid")
        parser.add_argument("--adapters", default=None, help="Adapter archive from `gfix decompose`")
        parser.add_argument("--out", default=None, help="JSON report path (default: stdout)")
        parser.add_argument("--bd-csv", dest="bd_csv", default=None,
                            help="Write (rate bits, distortion) pairs for `gfix bdrate --quality-orientation lower`")

    def run(self, *args, **options):
        manifest = load_manifest(options["manifest"])
        base = read_archive(options["base"])
        target = read_archive(options["target"])
        adapters = read_archive(options["adapters"]) if options["adapters"] else None

        results = pipeline.curve(base, target, manifest, parse_float_list(options["lambdas"]),
                                 grid=parse_float_list(options["grid"]), adapters=adapters)
        bd_text = None
        if options["bd_csv"]:
            bd_text = curve_csv_text(rd_points(results), header=("rate_bits", "distortion"),
                                     comment=f"gfix {gfix_version()}")
        points = []
        for r in results:
            rep = r.to_report()
            rep.pop("candidates")
            points.append(rep)
        text = to_json({"points": points})

        self.write_outputs([(options["bd_csv"], bd_text), (options["out"], text)])
        if options["out"]:
            self.stdout.write(self.style.SUCCESS(f"Wrote {options['out']}"))
        else:
            self.stdout.write(text, ending="")
