from cli import pipeline
from cli.base import GfixCommand, load_manifest
from tensor_store.archive import read_archive, write_archive


class Command(GfixCommand):
    help = "Truncated-SVD decomposition of the manifest's layers into mLoRA adapters (A, B, M = 0)."

    def add_arguments(self, parser):
        parser.add_argument("base", help="Base weights (.gfxt)")
        parser.add_argument("--layers", "--manifest", dest="manifest", required=True, help="Manifest JSON")
        parser.add_argument("--out", required=True, help="Adapter archive to write (.gfxt)")

    def run(self, *args, **options):
        manifest = load_manifest(options["manifest"])
        base = read_archive(options["base"])
        adapters = pipeline.decompose(base, manifest)
        if not adapters:
            self.stderr.write(self.style.WARNING("Manifest selects no layers; writing an empty adapter archive."))
        write_archive(pipeline.adapters_archive(adapters), options["out"])
        self.stdout.write(self.style.SUCCESS(f"Decomposed {len(adapters)} layers into {options['out']}"))
