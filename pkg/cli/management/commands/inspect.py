from pathlib import Path

import numpy as np

from cli.base import GfixCommand
from codec import bitstream
from core.errors import BadMagicError, UsageError
from tensor_store import archive as store
from tensor_store.constants import MAGIC as GFXT_MAGIC


def describe_file(path: Path) -> dict:
    blob = path.read_bytes()
    if blob.startswith(GFXT_MAGIC):
        arc = store.archive_from_bytes(blob, allow_nonfinite=True)
        return {"format": "GFXT", "bytes": len(blob), "metadata": dict(arc.metadata),
                "tensors": store.describe(arc)}
    if blob.startswith(bitstream.MAGIC):
        groups = bitstream.decode_bytes(blob)
        return {
            "format": "GFXB",
            "bytes": len(blob),
            "written_by": bitstream.stream_tool_version(blob),
            "groups": [
                {"rank": q.rank, "count": q.count, "layers": list(q.layer_ids), "step": q.step,
                 "symbols": int(q.symbols.size), "nonzero": int(np.count_nonzero(q.symbols)),
                 "alphabet": int(np.unique(q.symbols).size)}
                for q in groups
            ],
        }
    raise BadMagicError(f"{path} is neither a GFXT archive nor a GFXB stream.")


class Command(GfixCommand):
    help = "Describe a GFXT archive or GFXB stream as JSON."

    def add_arguments(self, parser):
        parser.add_argument("path", help="File to inspect")
        parser.add_argument("--out", default=None, help="JSON path (default: stdout)")

    def run(self, *args, **options):
        path = Path(options["path"])
        if not path.exists():
            raise UsageError(f"File not found: {path}")
        self.emit_json(describe_file(path), options["out"])
