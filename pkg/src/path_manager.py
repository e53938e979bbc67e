"""Output directory layout for experiment runs."""

from pathlib import Path


class PathManager:
    """Manages the output tree: reports/, bodies/, traces/ and logs/"""

    def __init__(self, out_root: Path, log_dir: str = "logs"):
        self.out_root = Path(out_root).resolve()
        self.reports = self.out_root / "reports"
        self.bodies = self.out_root / "bodies"
        self.traces = self.out_root / "traces"
        self.logs = self.out_root / log_dir

        for dir_path in (self.reports, self.bodies, self.traces, self.logs):
            dir_path.mkdir(parents=True, exist_ok=True)

    def resolve(self, name: str | Path, kind: str = "reports") -> Path:
        """
        Resolve a file name inside one of the output sub-directories.

        Raises:
            ValueError: if the resolved path leaves the output root
        """
        base = getattr(self, kind, None)
        if not isinstance(base, Path):
            raise ValueError(f"Unknown output kind: {kind}")
        if ".." in Path(name).parts:
            raise ValueError("Path traversal not allowed")

        resolved = (base / name).resolve()
        if not str(resolved).startswith(str(self.out_root)):
            raise ValueError("Path escapes output root")
        return resolved

    def get_relative_path(self, absolute_path: Path) -> str:
        try:
            return str(Path(absolute_path).resolve().relative_to(self.out_root))
        except ValueError:
            return str(absolute_path)
