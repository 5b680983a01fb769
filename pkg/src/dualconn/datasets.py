"""Figure datasets and their CSV form.

A file starts with ``# key: value`` provenance lines, then one header line,
then rows. Numbers are written with 17 significant digits so that reading
the file back recovers every float exactly.
"""
from __future__ import annotations

import subprocess
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["FigureDataset", "FIGURE_COLUMNS", "write_csv", "read_csv", "version_string"]

_PAIRS = ("c3_scell1", "c3_scell2", "c3_mcell", "c4_scell1", "c4_scell2", "c4_mcell", "c5_scell1", "c5_mcell")


def _fig5_cols():
    cols = ["sweep_value"]
    for c in (3, 4, 5):
        cols += [
            f"c{c}_decoupled_se", f"c{c}_suboptimal_se",
            f"c{c}_sir_decoupled_db", f"c{c}_sir_suboptimal_db", f"c{c}_sir_gain_db",
            f"c{c}_aggregate_dude_se", f"c{c}_aggregate_suboptimal_se",
            f"c{c}_gain_diff_se", f"c{c}_gain_ratio",
            f"c{c}_mc_decoupled_se", f"c{c}_mc_decoupled_hw",
            f"c{c}_mc_suboptimal_se", f"c{c}_mc_suboptimal_hw",
        ]
    return tuple(cols)


FIGURE_COLUMNS = {
    "fig2": (
        "sweep_value", "p_case1", "p_case2", "p_case3", "p_case4", "p_case5", "p_case6",
        "p_dude", "p_dualconn", "p_scell", "dude_over_dualconn",
        "mc_dude", "mc_dude_hw", "mc_dualconn", "mc_dualconn_hw", "mc_scell", "mc_scell_hw",
    ),
    "fig3": (
        "sweep_value", "dc_dude", "dc_dualconn", "dc_scell",
        "single_coupled_mcell", "single_decoupled", "single_coupled_scell",
        "mc_single_decoupled", "mc_single_decoupled_hw",
    ),
    "fig4": ("distance_m",) + tuple(f"pdf_{p}" for p in _PAIRS) + tuple(f"hist_{p}" for p in _PAIRS),
    "fig5a": _fig5_cols(),
    "fig5b": _fig5_cols(),
    "fig6": ("sweep_value",) + tuple(
        f"c{c}_{k}"
        for c in (3, 4)
        for k in ("dude_link1_se", "dude_link2_se", "dude_se", "bl1_link1_se", "bl1_link2_se", "bl1_se",
                  "dude_minus_bl1_se", "mc_dude_se", "mc_bl1_se")
    ),
    "fig7": ("sweep_value",) + tuple(
        f"c{c}_{k}"
        for c in (3, 4, 5)
        for k in ("dude_se", "bl2_se", "bl3_se", "mc_dude_se", "mc_bl2_se", "mc_bl3_se")
    ),
}


@dataclass(frozen=True)
class FigureDataset:
    figure_id: str
    columns: tuple
    data: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = FIGURE_COLUMNS.get(self.figure_id)
        if expected is None:
            raise ValueError(f"unknown figure id {self.figure_id!r}")
        if tuple(self.columns) != expected:
            raise ValueError(f"{self.figure_id}: columns do not match the fixed header")
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] != len(expected):
            raise ValueError(f"{self.figure_id}: expected {len(expected)} columns, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError(f"{self.figure_id}: every value must be finite")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_rows(cls, figure_id: str, rows, provenance=None) -> "FigureDataset":
        cols = FIGURE_COLUMNS[figure_id]
        data = np.array([[row[c] for c in cols] for row in rows], dtype=np.float64).reshape(-1, len(cols))
        return cls(figure_id, cols, data, dict(provenance or {}))

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]


def version_string() -> str:
    """``<package version>+g<short hash>[.dirty]`` when inside a git checkout."""
    from . import __version__

    here = Path(__file__).resolve().parent
    try:
        rev = subprocess.run(
            ["git", "describe", "--always", "--dirty"], cwd=here, capture_output=True, text=True, timeout=5
        )
    except (OSError, subprocess.SubprocessError):
        return __version__
    tag = rev.stdout.strip()
    if rev.returncode != 0 or not tag:
        return __version__
    return f"{__version__}+g{tag.replace('-dirty', '.dirty')}"


def _fmt(v) -> str:
    return format(float(v), ".17g")


def write_csv(ds: FigureDataset, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# figure: {ds.figure_id}"]
    for k, v in ds.provenance.items():
        lines.append(f"# {k}: {v}")
    lines.append(",".join(ds.columns))
    for row in ds.data:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path) -> FigureDataset:
    prov, header, rows = {}, None, []
    figure_id = None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            if key == "figure":
                figure_id = value
            else:
                prov[key] = value
        elif header is None:
            header = tuple(line.split(","))
        elif line:
            rows.append([float(v) for v in line.split(",")])
    if figure_id is None or header is None:
        raise ValueError(f"{path}: missing figure id or header")
    return FigureDataset(figure_id, header, np.array(rows, dtype=np.float64).reshape(-1, len(header)), prov)
