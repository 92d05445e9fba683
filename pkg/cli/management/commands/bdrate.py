from cli.base import GfixCommand
from metrics.bdrate import bd_rate, curve_from_pairs
from metrics.curves import read_curve_csv


class Command(GfixCommand):
    help = "BD-rate of a test curve against an anchor curve, in percent."

    def add_arguments(self, parser):
        parser.add_argument("--test", required=True, help="Test curve CSV (rate, quality)")
        parser.add_argument("--anchor", required=True, help="Anchor curve CSV (rate, quality)")
        parser.add_argument("--quality-orientation", dest="orientation", choices=("higher", "lower"),
                            default="higher", help="Whether higher or lower quality values are better")

    def run(self, *args, **options):
        higher = options["orientation"] == "higher"
        test = curve_from_pairs(read_curve_csv(options["test"]), higher_is_better=higher)
        anchor = curve_from_pairs(read_curve_csv(options["anchor"]), higher_is_better=higher)
        self.stdout.write(f"{bd_rate(test, anchor):.2f}")
