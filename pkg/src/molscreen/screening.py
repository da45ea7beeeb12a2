"""Five-tier candidate screening funnel.

Tier order: vocabulary filter, scaffold gate, top-fraction ranking by
predicted efficiency, property thresholds, availability of a CAS code.
Survivor sets are nested, every dropped record carries exactly one
(tier, cause) reason, and the whole run is deterministic: records are
keyed and ordered by canonical SMILES, so permuting the input file changes
nothing in the report.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import selection
from .features import (
    DESCRIPTOR_NAMES,
    KeySet,
    LatentTable,
    assemble,
    default_keyset,
    descriptors,
    load_keyset,
    load_latents,
)
from .models import load_model
from .molgraph import MolGraphError, MolecularGraph, canonical_smiles, parse_smiles
from .scaffold import ScaffoldRegistry, classify, load_registry


class ScreeningError(ValueError):
    pass


@dataclass
class PoolRecord:
    smiles: str
    canonical: str
    graph: MolecularGraph
    cas: str | None = None
    group_id: int | None = None
    predicted_pce: float | None = None
    donor_number: float | None = None
    dipole_moment: float | None = None
    hba: int | None = None


@dataclass(frozen=True)
class CandidatePool:
    records: tuple[PoolRecord, ...]  # sorted by canonical SMILES, unique
    provenance: str
    parse_failures: tuple[tuple[int, str, str], ...]  # (row, smiles, reason)
    merged_duplicates: int


@dataclass(frozen=True)
class PropertyThresholds:
    dn_min: float = float("-inf")
    dm_min: float = float("-inf")
    ha_min: int = 0


@dataclass(frozen=True)
class FunnelConfig:
    pool: Path
    registry: Path
    model: Path
    pipeline: Path
    blocks: tuple[str, ...]
    top_fraction: float
    thresholds: PropertyThresholds
    properties: Path | None = None
    cas: Path | None = None
    keyset: Path | None = None
    latents: Path | None = None
    vocabulary_elements: frozenset[str] | None = None
    require_latent: bool = False
    raw: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path) -> "FunnelConfig":
        path = Path(path)
        base = path.parent
        with path.open(encoding="utf-8") as handle:
            data = json.load(handle)

        def resolve(key: str, required: bool = True) -> Path | None:
            value = data.get(key)
            if value is None:
                if required:
                    raise ScreeningError(f"funnel config misses {key!r}")
                return None
            return (base / value).resolve() if not Path(value).is_absolute() else Path(value)

        fraction = float(data.get("top_fraction", 0.01))
        if not (0.0 < fraction <= 1.0):
            raise ScreeningError("top_fraction must be in (0, 1]")
        thresholds = data.get("thresholds", {})

        def threshold(key: str, default: float) -> float:
            value = thresholds.get(key)
            return default if value is None else float(value)

        vocab = data.get("vocabulary", {})
        elements = vocab.get("elements")
        return cls(
            pool=resolve("pool"),
            registry=resolve("registry"),
            model=resolve("model"),
            pipeline=resolve("pipeline"),
            blocks=tuple(data.get("blocks", ["D"])),
            top_fraction=fraction,
            thresholds=PropertyThresholds(
                dn_min=threshold("dn_min", float("-inf")),
                dm_min=threshold("dm_min", float("-inf")),
                ha_min=int(thresholds.get("ha_min", 0) or 0),
            ),
            properties=resolve("properties", required=False),
            cas=resolve("cas", required=False),
            keyset=resolve("keyset", required=False),
            latents=resolve("latents", required=False),
            vocabulary_elements=(
                frozenset(elements) if elements is not None else None
            ),
            require_latent=bool(vocab.get("require_latent", False)),
            raw=data,
        )


@dataclass(frozen=True)
class TierOutcome:
    name: str
    input_count: int
    survivor_count: int
    drops: dict[str, int]


@dataclass(frozen=True)
class ScreeningReport:
    pool_size: int
    parse_failures: int
    merged_duplicates: int
    tiers: tuple[TierOutcome, ...]
    final: tuple[PoolRecord, ...]
    config_echo: dict

    def to_dict(self) -> dict:
        return {
            "pool_size": self.pool_size,
            "parse_failures": self.parse_failures,
            "merged_duplicates": self.merged_duplicates,
            "tiers": [
                {
                    "name": t.name,
                    "input": t.input_count,
                    "survivors": t.survivor_count,
                    "drops": dict(sorted(t.drops.items())),
                }
                for t in self.tiers
            ],
            "final": [
                {
                    "canonical_smiles": r.canonical,
                    "smiles": r.smiles,
                    "predicted_pce": r.predicted_pce,
                    "scaffold_group": r.group_id,
                    "donor_number": r.donor_number,
                    "dipole_moment": r.dipole_moment,
                    "hba": r.hba,
                    "cas": r.cas,
                }
                for r in self.final
            ],
            "config": self.config_echo,
        }

    def render_text(self) -> str:
        lines = [
            f"pool: {self.pool_size} unique records "
            f"({self.parse_failures} unparseable rows dropped at load, "
            f"{self.merged_duplicates} duplicates merged)",
            "",
            f"{'tier':<12} {'in':>8} {'out':>8}  drops",
            "-" * 48,
        ]
        for tier in self.tiers:
            drop_text = (
                ", ".join(f"{k}={v}" for k, v in sorted(tier.drops.items()))
                or "-"
            )
            lines.append(
                f"{tier.name:<12} {tier.input_count:>8} "
                f"{tier.survivor_count:>8}  {drop_text}"
            )
        lines.append("")
        lines.append("top candidates:")
        for r in self.final[:20]:
            cas = r.cas or "-"
            lines.append(
                f"  {r.predicted_pce:7.3f}  group {r.group_id}  cas {cas:<12} {r.canonical}"
            )
        return "\n".join(lines) + "\n"


def top_count(n: int, fraction: float) -> int:
    """Survivor count of the ranking tier: ceil(n * fraction)."""
    if n == 0:
        return 0
    return math.ceil(n * fraction)


def load_pool(path: str | Path) -> CandidatePool:
    """Read a candidate pool CSV (``smiles[,cas]``).

    Unparseable rows are set aside with their reason; duplicate canonical
    structures are merged, keeping the lexicographically smallest spelling
    and CAS code so the pool is independent of row order.
    """
    path = Path(path)
    by_canonical: dict[str, PoolRecord] = {}
    failures: list[tuple[int, str, str]] = []
    merged = 0
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or "smiles" not in reader.fieldnames:
            raise ScreeningError(f"pool {path} needs a 'smiles' column")
        has_cas = "cas" in (reader.fieldnames or [])
        for row_no, row in enumerate(reader, start=2):
            smiles = (row.get("smiles") or "").strip()
            cas = (row.get("cas") or "").strip() if has_cas else ""
            try:
                graph = parse_smiles(smiles)
                canon = canonical_smiles(graph)
            except MolGraphError as exc:
                failures.append((row_no, smiles, str(exc)))
                continue
            existing = by_canonical.get(canon)
            if existing is None:
                by_canonical[canon] = PoolRecord(
                    smiles=smiles, canonical=canon, graph=graph, cas=cas or None
                )
            else:
                merged += 1
                if smiles < existing.smiles:
                    existing.smiles = smiles
                if cas:
                    if existing.cas is None or cas < existing.cas:
                        existing.cas = cas
    records = tuple(by_canonical[c] for c in sorted(by_canonical))
    return CandidatePool(
        records=records,
        provenance=str(path),
        parse_failures=tuple(failures),
        merged_duplicates=merged,
    )


def load_property_table(path: str | Path) -> dict[str, dict]:
    """Property table CSV ``smiles,donor_number,dipole_moment[,hba]``;
    blank cells mean the value is missing."""
    path = Path(path)
    table: dict[str, dict] = {}
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        needed = {"smiles", "donor_number", "dipole_moment"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            raise ScreeningError(
                f"property table {path} needs columns smiles,donor_number,dipole_moment"
            )
        for row_no, row in enumerate(reader, start=2):
            smiles = (row.get("smiles") or "").strip()
            try:
                canon = canonical_smiles(parse_smiles(smiles))
            except MolGraphError as exc:
                raise ScreeningError(f"property row {row_no}: {smiles!r}: {exc}")
            entry = {}
            for key in ("donor_number", "dipole_moment"):
                text = (row.get(key) or "").strip()
                entry[key] = float(text) if text else None
            hba_text = (row.get("hba") or "").strip()
            entry["hba"] = int(hba_text) if hba_text else None
            table[canon] = entry
    return table


def load_cas_table(path: str | Path) -> dict[str, str]:
    path = Path(path)
    table: dict[str, str] = {}
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or not {"smiles", "cas"}.issubset(reader.fieldnames):
            raise ScreeningError(f"CAS table {path} needs columns smiles,cas")
        for row_no, row in enumerate(reader, start=2):
            smiles = (row.get("smiles") or "").strip()
            cas = (row.get("cas") or "").strip()
            if not cas:
                continue
            try:
                canon = canonical_smiles(parse_smiles(smiles))
            except MolGraphError as exc:
                raise ScreeningError(f"CAS row {row_no}: {smiles!r}: {exc}")
            if canon not in table or cas < table[canon]:
                table[canon] = cas
    return table


def tier_vocab(
    records: list[PoolRecord],
    elements: frozenset[str] | None,
    latents: LatentTable | None = None,
    require_latent: bool = False,
) -> tuple[list[PoolRecord], dict[str, int]]:
    """Keep molecules covered by the element vocabulary and, when a latent
    table is enforced, present in it."""
    survivors: list[PoolRecord] = []
    drops: dict[str, int] = {}
    for record in records:
        if elements is not None:
            used = {a.element for a in record.graph.atoms}
            if not used.issubset(elements):
                drops["element_not_in_vocabulary"] = (
                    drops.get("element_not_in_vocabulary", 0) + 1
                )
                continue
        if require_latent and (
            latents is None or record.canonical not in latents.vectors
        ):
            drops["missing_latent"] = drops.get("missing_latent", 0) + 1
            continue
        survivors.append(record)
    return survivors, drops


def tier_scaffold(
    records: list[PoolRecord], registry: ScaffoldRegistry
) -> tuple[list[PoolRecord], dict[str, int]]:
    survivors: list[PoolRecord] = []
    drops: dict[str, int] = {}
    for record in records:
        gate = classify(record.graph, registry)
        if gate.known:
            record.group_id = gate.group_id
            survivors.append(record)
        else:
            drops["novel_scaffold"] = drops.get("novel_scaffold", 0) + 1
    return survivors, drops


def tier_rank(
    records: list[PoolRecord],
    model,
    pipeline: selection.SelectionPipeline,
    blocks,
    keyset: KeySet | None,
    latents: LatentTable | None,
    top_fraction: float,
) -> tuple[list[PoolRecord], dict[str, int]]:
    """Predict for every record and keep the ceil(n * fraction) highest,
    ranked descending with canonical-SMILES tie-break."""
    if not records:
        return [], {}
    matrix = assemble(
        [r.graph for r in records], blocks, keyset=keyset, latents=latents
    )
    X = selection.apply(pipeline, matrix).values
    predictions = model.predict(X)
    for record, value in zip(records, predictions):
        record.predicted_pce = float(value)
    ranked = sorted(records, key=lambda r: (-r.predicted_pce, r.canonical))
    keep = top_count(len(ranked), top_fraction)
    survivors = sorted(ranked[:keep], key=lambda r: r.canonical)
    dropped = len(ranked) - keep
    drops = {"below_rank_cutoff": dropped} if dropped else {}
    return survivors, drops


def tier_properties(
    records: list[PoolRecord],
    table: dict[str, dict],
    thresholds: PropertyThresholds,
) -> tuple[list[PoolRecord], dict[str, int]]:
    """Threshold filter on donor number, dipole moment and H-bond-acceptor
    count. Records with no tabulated DN or DM are dropped and counted
    separately; a missing HA falls back to the computed descriptor."""
    survivors: list[PoolRecord] = []
    drops: dict[str, int] = {}
    hba_position = DESCRIPTOR_NAMES.index("hba_count")
    for record in records:
        entry = table.get(record.canonical, {})
        dn = entry.get("donor_number")
        dm = entry.get("dipole_moment")
        hba = entry.get("hba")
        if hba is None:
            hba = int(descriptors(record.graph)[hba_position])
        record.donor_number = dn
        record.dipole_moment = dm
        record.hba = hba
        if dn is None or dm is None:
            drops["missing_property"] = drops.get("missing_property", 0) + 1
            continue
        if dn >= thresholds.dn_min and dm >= thresholds.dm_min and hba >= thresholds.ha_min:
            survivors.append(record)
        else:
            drops["below_property_threshold"] = (
                drops.get("below_property_threshold", 0) + 1
            )
    return survivors, drops


def tier_cas(
    records: list[PoolRecord], table: dict[str, str]
) -> tuple[list[PoolRecord], dict[str, int]]:
    survivors: list[PoolRecord] = []
    drops: dict[str, int] = {}
    for record in records:
        cas = table.get(record.canonical) or record.cas
        if cas:
            record.cas = cas
            survivors.append(record)
        else:
            drops["no_cas_code"] = drops.get("no_cas_code", 0) + 1
    return survivors, drops


def run_funnel(config: FunnelConfig) -> ScreeningReport:
    """Execute the five tiers in order and assemble the report.

    All configured inputs are loaded (and validated) before tier 1 runs;
    any load failure aborts the whole run.
    """
    pool = load_pool(config.pool)
    registry = load_registry(config.registry)
    model = load_model(config.model)
    pipeline = selection.SelectionPipeline.load(config.pipeline)
    keyset = None
    if "K" in config.blocks:
        keyset = load_keyset(config.keyset) if config.keyset else default_keyset()
    latents = load_latents(config.latents) if config.latents else None
    if "Z" in config.blocks and latents is None:
        raise ScreeningError("Z block configured without a latent table")
    prop_table = (
        load_property_table(config.properties) if config.properties else {}
    )
    cas_table = load_cas_table(config.cas) if config.cas else {}

    records = list(pool.records)
    tiers: list[TierOutcome] = []

    def run_tier(name, func, *args) -> list[PoolRecord]:
        nonlocal records
        survivors, drops = func(records, *args)
        tiers.append(
            TierOutcome(
                name=name,
                input_count=len(records),
                survivor_count=len(survivors),
                drops=drops,
            )
        )
        records = survivors
        return survivors

    run_tier(
        "vocabulary",
        tier_vocab,
        config.vocabulary_elements,
        latents,
        config.require_latent,
    )
    run_tier("scaffold", tier_scaffold, registry)
    run_tier(
        "rank",
        tier_rank,
        model,
        pipeline,
        config.blocks,
        keyset,
        latents,
        config.top_fraction,
    )
    run_tier("properties", tier_properties, prop_table, config.thresholds)
    run_tier("cas", tier_cas, cas_table)

    final = tuple(
        sorted(records, key=lambda r: (-(r.predicted_pce or 0.0), r.canonical))
    )
    return ScreeningReport(
        pool_size=len(pool.records),
        parse_failures=len(pool.parse_failures),
        merged_duplicates=pool.merged_duplicates,
        tiers=tuple(tiers),
        final=final,
        config_echo=config.raw,
    )
