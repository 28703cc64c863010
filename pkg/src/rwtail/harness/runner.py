"""Run an experiment and write its CSV tables and ``report.json`` atomically."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from .. import __version__, kernels
from ..errors import RWTailError
from ..montecarlo import CHUNK_ROWS
from ..serialize import jsonable
from .config import ExperimentConfig
from .experiments import REGISTRY

SEED_DERIVATION = "numpy SeedSequence(master_seed, spawn_key=(chunk_index,)) -> PCG64"


class ExperimentError(RWTailError, RuntimeError):
    """A library error raised while running a named experiment."""


@dataclass
class RunReport:
    config: dict
    version: str
    verdict: str
    summary: dict
    tables: list = field(default_factory=list)
    wall_clock_s: float = 0.0
    rng: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return jsonable({"config": self.config, "version": self.version, "verdict": self.verdict,
                         "summary": self.summary, "tables": self.tables, "wall_clock_s": self.wall_clock_s,
                         "rng": self.rng})


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float) or hasattr(v, "dtype"):
        try:
            return format(float(v), ".17g")
        except (TypeError, ValueError):
            pass
    return str(v)


def csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue().encode("utf-8")


def atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(cfg: ExperimentConfig, out_dir=None) -> RunReport:
    """Execute ``cfg``; when ``out_dir`` is given, write tables and ``report.json`` there."""
    exp = REGISTRY[cfg.experiment]
    start = time.perf_counter()
    try:
        outcome = exp.run(cfg)
    except RWTailError as exc:
        raise ExperimentError(f"experiment {cfg.experiment!r} failed: {exc}") from exc
    elapsed = time.perf_counter() - start
    files = []
    if out_dir is not None:
        out = Path(out_dir)
        for name, (header, rows) in outcome.tables.items():
            fname = f"{name}.csv"
            atomic_write(out / fname, csv_bytes(header, rows))
            files.append(fname)
    report = RunReport(cfg.to_dict(), __version__, outcome.verdict, outcome.summary, files, elapsed,
                       {"master_seed": cfg.seed, "derivation": SEED_DERIVATION, "chunk_rows": CHUNK_ROWS,
                        "kernel_backend": kernels.BACKEND})
    if out_dir is not None:
        report.tables.append("report.json")
        atomic_write(Path(out_dir) / "report.json",
                     (json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n").encode("utf-8"))
    return report
