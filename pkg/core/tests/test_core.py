import pytest
from django.test import override_settings

from core.conf import DEFAULTS, gfix_setting, gfix_version
from core.errors import (
    EXIT_FORMAT, EXIT_NUMERICAL, EXIT_USAGE, BadMagicError, DuplicateNameError, IllConditionedError,
    NonFiniteError, OutputPathError, ShapeMismatchError, TruncatedPayloadError, UsageError,
)
from core.files import atomic_write, write_all_atomic, write_bytes_atomic, write_text_atomic


def test_exit_codes_follow_error_family():
    assert ShapeMismatchError.exit_code == EXIT_USAGE == 2
    assert DuplicateNameError.exit_code == EXIT_USAGE
    assert BadMagicError.exit_code == TruncatedPayloadError.exit_code == EXIT_FORMAT == 3
    assert NonFiniteError.exit_code == EXIT_NUMERICAL == 4


def test_usage_errors_are_value_errors():
    with pytest.raises(ValueError):
        raise ShapeMismatchError("bad shape")


def test_ill_conditioned_carries_index():
    err = IllConditionedError("tiny singular value", index=3)
    assert err.index == 3
    assert err.exit_code == EXIT_NUMERICAL


def test_gfix_setting_reads_settings_and_falls_back():
    assert gfix_setting("SEED") == 1234
    with override_settings(GFIX={"SEED": 7}):
        assert gfix_setting("SEED") == 7
        # keys missing from an overridden dict fall back to built-in defaults
        assert gfix_setting("PMF_PRECISION_BITS") == DEFAULTS["PMF_PRECISION_BITS"]


def test_version_string():
    assert gfix_version() == "1.0.0"
    with override_settings(GFIX_VERSION="9.9.9"):
        assert gfix_version() == "9.9.9"


def test_atomic_write_replaces_on_success(tmp_path):
    target = tmp_path / "out" / "file.bin"
    write_bytes_atomic(target, b"abc")
    assert target.read_bytes() == b"abc"
    write_text_atomic(target, "xyz")
    assert target.read_text() == "xyz"


def test_atomic_write_leaves_no_partial_output(tmp_path):
    target = tmp_path / "file.bin"
    target.write_bytes(b"old")
    with pytest.raises(UsageError):
        with atomic_write(target) as fh:
            fh.write(b"partial")
            raise UsageError("boom")
    assert target.read_bytes() == b"old"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["file.bin"]


def test_unwritable_target_is_a_usage_error(tmp_path):
    (tmp_path / "blocker").write_bytes(b"")
    with pytest.raises(OutputPathError) as exc:
        write_text_atomic(tmp_path / "blocker" / "r.json", "{}")
    assert exc.value.exit_code == EXIT_USAGE


def test_write_all_lands_every_file(tmp_path):
    write_all_atomic([(tmp_path / "a.bin", b"\x01\x02"), (tmp_path / "sub" / "b.txt", "text")])
    assert (tmp_path / "a.bin").read_bytes() == b"\x01\x02"
    assert (tmp_path / "sub" / "b.txt").read_text() == "text"


def test_write_all_leaves_nothing_when_one_target_fails(tmp_path):
    (tmp_path / "blocker").write_bytes(b"")
    with pytest.raises(OutputPathError):
        write_all_atomic([(tmp_path / "s.gfxb", b"stream"), (tmp_path / "blocker" / "r.json", "{}")])
    assert sorted(p.name for p in tmp_path.iterdir()) == ["blocker"]


def test_write_all_rejects_repeated_targets(tmp_path):
    with pytest.raises(OutputPathError):
        write_all_atomic([(tmp_path / "x", b"1"), (tmp_path / "." / "x", b"2")])
    assert not (tmp_path / "x").exists()
