"""
Files written by a run: whitespace-column snapshots, the convergence table,
the JSON run summary and the msgpack cache of converged equilibria.
"""

from io import StringIO
from pathlib import Path
from typing import Optional

import numpy as np
from msgpack import packb, unpackb
from msgpack.exceptions import UnpackException
from pydantic import BaseModel, Field

from gfswe.scheme.cases import ConvergenceRow
from gfswe.util.exceptions import NonFiniteError
from gfswe.util.fs import put_file, safe_name, try_read_file
from gfswe.util.log import LOG

SNAPSHOT_COLUMNS = ("x", "h", "q", "u", "b", "eta", "K", "pert")
CONVERGENCE_COLUMNS = ("N_e", "L2(h)", "EOA(h)", "L2(q)", "EOA(q)")
NUMBER_FORMAT = "%.16e"


class RunSummary(BaseModel):
    case: str
    scheme: str
    order: int
    cells: int
    final_time: float
    steps: int
    steady_reached: bool
    residual_norm: Optional[float] = None
    l2_h: Optional[float] = None
    l2_q: Optional[float] = None
    q_drift: Optional[float] = None
    k_drift: Optional[float] = None
    k_spread: Optional[float] = None
    upsilon_drift: Optional[float] = None
    files: list[str] = Field(default_factory=list)


def snapshot_text(
    x: np.ndarray,
    h: np.ndarray,
    q: np.ndarray,
    b: np.ndarray,
    k: Optional[np.ndarray],
    pert: np.ndarray,
    time: float,
) -> str:
    """
    One row per interior cell. The K column is left out when `k` is None.

    Raises:
        NonFiniteError: If any value to be written is NaN or inf.
    """
    columns = {
        "x": x,
        "h": h,
        "q": q,
        "u": q / h,
        "b": b,
        "eta": h + b,
        "K": k,
        "pert": pert,
    }
    names = [name for name in SNAPSHOT_COLUMNS if columns[name] is not None]
    table = np.column_stack([columns[name] for name in names])
    bad = ~np.isfinite(table)
    if bad.any():
        raise NonFiniteError(cell=int(np.flatnonzero(bad.any(axis=1))[0]), time=time)
    buffer = StringIO()
    np.savetxt(buffer, table, fmt=NUMBER_FORMAT, header=" ".join(names), comments="")
    return buffer.getvalue()


def snapshot_path(out: Path, case: str, scheme: str, order: int, cells: int, label: str) -> Path:
    return Path(out) / f"{safe_name(case, scheme, f'p{order}', f'N{cells}', label)}.dat"


def _format_order(value: Optional[float]) -> str:
    return "--" if value is None else f"{value:.2f}"


def convergence_text(rows: list[ConvergenceRow]) -> str:
    lines = [" ".join(CONVERGENCE_COLUMNS)]
    for row in rows:
        lines.append(
            f"{row.n_cells} {row.l2_h:.4e} {_format_order(row.eoa_h)} {row.l2_q:.4e} {_format_order(row.eoa_q)}"
        )
    return "\n".join(lines) + "\n"


def write_text(path: Path, text: str) -> Path:
    if not put_file(text, path):
        raise OSError(f"could not write {path}")
    LOG.debug(f"wrote {path}")
    return path


def write_summary(path: Path, summary: RunSummary) -> Path:
    return write_text(path, summary.model_dump_json(indent=2) + "\n")


def equilibrium_cache_path(out: Path, case: str, scheme: str, order: int, cells: int) -> Path:
    return Path(out) / f"{safe_name('equilibrium', case, scheme, f'p{order}', f'N{cells}')}.msgpack"


def save_equilibrium(path: Path, meta: dict, h: np.ndarray, q: np.ndarray) -> bool:
    payload = packb({**meta, "h": [float(v) for v in h], "q": [float(v) for v in q]})
    return put_file(payload, path)


def load_equilibrium(path: Path, meta: dict) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Cached (h, q), or None when the file is missing, unreadable or made for other settings."""
    raw = try_read_file(path)
    if raw is None:
        return None
    try:
        data = unpackb(raw)
    except (UnpackException, ValueError) as e:
        LOG.warning(f"ignoring corrupt equilibrium cache {path}: {e}")
        return None
    if not isinstance(data, dict) or any(data.get(k) != v for k, v in meta.items()):
        LOG.info(f"equilibrium cache {path} does not match this run, recomputing")
        return None
    h, q = np.asarray(data["h"], dtype=float), np.asarray(data["q"], dtype=float)
    if h.shape != (meta["n_cells"],) or q.shape != h.shape:
        return None
    return h, q
