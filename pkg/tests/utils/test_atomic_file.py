"""
Tests for atomic output files.
"""

import pytest
from src.errors import OutputError
from src.utils.atomic_file import AtomicOutputFile


class TestAtomicOutputFile:
    """Tests for AtomicOutputFile."""

    def test_replaces_target_on_success(self, tmp_path):
        """Test the target holds the new text and no temporary file remains."""
        target = tmp_path / "results" / "sweep.csv"
        target.parent.mkdir()
        target.write_text("old\n", encoding="utf-8")

        with AtomicOutputFile(target) as f:
            f.write("method,b_bar\n")

        assert target.read_text(encoding="utf-8") == "method,b_bar\n"
        assert [p.name for p in target.parent.iterdir()] == ["sweep.csv"]

    def test_creates_parent_directory(self, tmp_path):
        """Test missing parent directories are created."""
        target = tmp_path / "a" / "b" / "table.txt"

        with AtomicOutputFile(str(target)) as f:
            f.write("x")

        assert target.read_text(encoding="utf-8") == "x"

    def test_keeps_old_file_on_error(self, tmp_path):
        """Test an exception discards the partial output and keeps the old file."""
        target = tmp_path / "table.txt"
        target.write_text("complete\n", encoding="utf-8")

        with pytest.raises(RuntimeError):
            with AtomicOutputFile(target) as f:
                f.write("partial")
                raise RuntimeError("interrupted")

        assert target.read_text(encoding="utf-8") == "complete\n"
        assert [p.name for p in tmp_path.iterdir()] == ["table.txt"]

    def test_unix_newlines(self, tmp_path):
        """Test newlines are written as LF."""
        target = tmp_path / "out.csv"

        with AtomicOutputFile(target) as f:
            f.write("a\nb\n")

        assert target.read_bytes() == b"a\nb\n"

    def test_parent_is_a_file(self, tmp_path):
        """Test a parent path that is a regular file raises OutputError."""
        blocker = tmp_path / "results"
        blocker.write_text("not a directory", encoding="utf-8")

        with pytest.raises(OutputError) as excinfo:
            with AtomicOutputFile(blocker / "sweep.csv") as f:
                f.write("x")

        assert excinfo.value.code == "unwritable_path"
        assert excinfo.value.path == str(blocker / "sweep.csv")

    def test_target_is_a_directory(self, tmp_path):
        """Test replacing a directory fails with OutputError and leaves no temp file."""
        target = tmp_path / "table.txt"
        target.mkdir()

        with pytest.raises(OutputError):
            with AtomicOutputFile(target) as f:
                f.write("x")

        assert [p.name for p in tmp_path.iterdir()] == ["table.txt"]
