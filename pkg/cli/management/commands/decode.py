from cli import pipeline
from cli.base import GfixCommand
from codec.bitstream import decode
from tensor_store.archive import write_archive


class Command(GfixCommand):
    help = "Decode a GFXB stream into an archive of dequantized modulation maps."

    def add_arguments(self, parser):
        parser.add_argument("stream", help="Bitstream (.gfxb)")
        parser.add_argument("--out", required=True, help="Maps archive to write (.gfxt)")

    def run(self, *args, **options):
        groups = decode(options["stream"])
        archive = pipeline.maps_archive(groups)
        write_archive(archive, options["out"])
        self.stdout.write(self.style.SUCCESS(
            f"Decoded {sum(q.count for q in groups)} maps in {len(groups)} groups into {options['out']}"
        ))
