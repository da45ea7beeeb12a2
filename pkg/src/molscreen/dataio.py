"""Dataset ingestion and artifact writing.

All file formats are plain CSV/JSON, UTF-8, LF line endings, '.' decimals,
headers mandatory. Output artifacts embed the resolved run configuration:
JSON artifacts as a ``config`` key, CSV artifacts as a single leading
``#`` comment line (our readers skip it; the header follows). Writes are
atomic (temp file + rename).
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .molgraph import MolGraphError, MolecularGraph, canonical_smiles, parse_smiles

FORMAT_VERSION = 1


class DataError(ValueError):
    pass


class DuplicateMolecule(DataError):
    pass


class InvalidPce(DataError):
    pass


@dataclass(frozen=True)
class DatasetRecord:
    smiles: str
    canonical: str
    graph: MolecularGraph
    pce: float
    doi: str | None = None


@dataclass(frozen=True)
class Dataset:
    name: str
    records: tuple[DatasetRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    def graphs(self) -> list[MolecularGraph]:
        return [r.graph for r in self.records]

    def targets(self) -> np.ndarray:
        return np.array([r.pce for r in self.records], dtype=np.float64)


def load_dataset(path: str | Path, require_pce: bool = True) -> Dataset:
    """Load a molecule dataset (CSV ``smiles,pce[,doi]``).

    Efficiencies must lie in (0, 100); duplicate canonical structures are
    rejected with :class:`DuplicateMolecule`.
    """
    path = Path(path)
    records: list[DatasetRecord] = []
    seen: dict[str, int] = {}
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(_skip_comments(handle))
        if reader.fieldnames is None or "smiles" not in reader.fieldnames:
            raise DataError(f"dataset {path} needs a 'smiles' column")
        if require_pce and "pce" not in reader.fieldnames:
            raise DataError(f"dataset {path} needs a 'pce' column")
        for row_no, row in enumerate(reader, start=2):
            smiles = (row.get("smiles") or "").strip()
            try:
                graph = parse_smiles(smiles)
                canon = canonical_smiles(graph)
            except MolGraphError as exc:
                raise DataError(f"row {row_no}: {smiles!r}: {exc}") from exc
            if canon in seen:
                raise DuplicateMolecule(
                    f"row {row_no}: duplicate of row {seen[canon]} ({smiles!r})"
                )
            seen[canon] = row_no
            pce = 0.0
            if "pce" in (reader.fieldnames or []):
                text = (row.get("pce") or "").strip()
                if text:
                    pce = float(text)
                    if not (0.0 < pce < 100.0):
                        raise InvalidPce(
                            f"row {row_no}: pce {pce} outside (0, 100)"
                        )
                elif require_pce:
                    raise InvalidPce(f"row {row_no}: missing pce value")
            doi = (row.get("doi") or "").strip() or None
            records.append(
                DatasetRecord(
                    smiles=smiles, canonical=canon, graph=graph, pce=pce, doi=doi
                )
            )
    return Dataset(name=path.stem, records=tuple(records))


def _skip_comments(handle):
    for line in handle:
        if line.startswith("#"):
            continue
        yield line


def dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_float(value: float) -> str:
    """Shortest round-trip decimal text for a float ('.' separator)."""
    return repr(float(value))


def matrix_csv_text(matrix, config_echo: dict) -> str:
    """Feature matrix as CSV with block-tagged header and a config comment."""
    lines = ["# " + json.dumps(config_echo, sort_keys=True)]
    lines.append(",".join(["smiles"] + matrix.tagged_names))
    for row_id, row in zip(matrix.ids, matrix.values):
        lines.append(",".join([row_id] + [format_float(v) for v in row]))
    return "\n".join(lines) + "\n"
