import numpy as np

from alignment.mmd import argmin_point, mmd_scan, offset_profile
from alignment.noise import NoiseSchedule, SampleSet
from cli.base import GfixCommand, parse_float_list
from cli.reports import to_csv
from core.errors import UsageError
from tensor_store.archive import read_archive, single_tensor


def parse_steps(text: str, total_steps: int):
    """'start:stop:step' (stop exclusive, clipped to the schedule) or a comma list."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError(text)
            start, stop = parts[0], min(parts[1], total_steps)
            step = parts[2] if len(parts) == 3 else 1
            if step < 1:
                raise ValueError(text)
            return list(range(start, stop, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise UsageError(f"--t expects start:stop[:step] or a comma list of integers, got {text!r}.") from exc


def load_samples(path: str, name, label: str) -> SampleSet:
    t = single_tensor(read_archive(path), name)
    data = t.data if t.rank == 1 else t.data.reshape(t.shape[0], -1)
    return SampleSet(samples=np.asarray(data, dtype=np.float64), label=label)


class Command(GfixCommand):
    help = "MMD between degraded samples and noise-perturbed references across the noise schedule."

    def add_arguments(self, parser):
        parser.add_argument("--degraded", required=True, help="Degraded samples (.gfxt, first axis = samples)")
        parser.add_argument("--reference", required=True, help="Reference samples (.gfxt)")
        parser.add_argument("--tensor", default=None, help="Tensor name inside both archives (default: first)")
        parser.add_argument("--t", dest="t_steps", default="0:1000:25", help="Steps as start:stop:step or a list")
        parser.add_argument("--bandwidth", type=float, default=None, help="RBF bandwidth (default: median heuristic)")
        parser.add_argument("--seed", type=int, default=None)
        parser.add_argument("--steps", type=int, default=None, help="Schedule length T")
        parser.add_argument("--unbiased", action="store_true", help="Use the unbiased estimator")
        parser.add_argument("--out", default=None, help="CSV path (default: stdout)")
        parser.add_argument("--offsets", default=None,
                            help="Also write MMD at offsets around the selected step to this CSV")
        parser.add_argument("--offset-values", dest="offset_values", default=None,
                            help="Comma-separated offsets (default from settings)")

    def run(self, *args, **options):
        schedule = NoiseSchedule.linear(options["steps"])
        degraded = load_samples(options["degraded"], options["tensor"], "degraded")
        reference = load_samples(options["reference"], options["tensor"], "reference")
        t_list = parse_steps(options["t_steps"], schedule.total_steps)

        points = mmd_scan(degraded, reference, schedule, t_list, options["bandwidth"], options["seed"],
                          unbiased=options["unbiased"])
        text = to_csv(("t", "mmd2", "normalized"), [(p.t, p.mmd2, p.normalized) for p in points])

        offsets_text = None
        if options["offsets"]:
            offsets = parse_float_list(options["offset_values"])
            offsets = [int(o) for o in offsets] if offsets is not None else None
            t_opt = argmin_point(points).t
            rows = offset_profile(degraded, reference, schedule, t_opt, offsets, options["bandwidth"],
                                  options["seed"])
            offsets_text = to_csv(("offset", "t", "mmd2", "normalized"),
                                  [(r.offset, r.t, r.mmd2, r.normalized) for r in rows])

        self.write_outputs([(options["offsets"], offsets_text), (options["out"], text)])
        if options["out"]:
            self.stdout.write(self.style.SUCCESS(f"Wrote {len(points)} scan points to {options['out']}"))
        else:
            self.stdout.write(text, ending="")
