"""File formats, atomic artifact writing, and run manifests.

Formats (all UTF-8, LF line endings):

* Interaction file: TSV with header
  ``case_id  date  plaintiff_firm  defendant_firm  case_type  outcome``;
  dates are ISO-8601, outcome is ``P`` or ``D``.  Multiple firms on one
  side are separated by ``;`` and expand to the full plaintiff x defendant
  cross product on ingestion.
* Model file: first line ``ahpi-model v1``, then one
  ``entity<TAB>label<TAB>score`` line per entity (id order) and one
  ``type<TAB>name<TAB>eps<TAB>q`` line per type, numbers printed with 12
  significant digits.
* External ranking: ``rank<TAB>firm name`` lines.
* Name counts: ``count<TAB>string`` lines; canonical map:
  ``raw<TAB>canonical`` lines.
* Parser config: ``key=value`` lines with repeatable keys ``keyword``,
  ``replace`` (``OLD=>NEW``), and ``expansion`` (``OLD=>NEW``).

Artifacts are written atomically (temp file in the target directory, then
rename), and every pipeline stage records a manifest JSON with input
hashes, configuration, seed, and library version.
"""

import hashlib
import json
import os
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    EmptyOutputError,
    FileFormatError,
    MalformedHeaderError,
)
from .evaluate import ExternalRanking
from .model import (
    EntityId,
    InteractionRecord,
    InteractionType,
    ModelParams,
    Winner,
)
from .names import ParseConfig, PartyRole, parse_attorney_substring

INTERACTION_HEADER = (
    "case_id",
    "date",
    "plaintiff_firm",
    "defendant_firm",
    "case_type",
    "outcome",
)
MODEL_MAGIC = "ahpi-model v1"

# Exit codes shared with the CLI; distinct per error family.
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISSING_FILE = 3
EXIT_BAD_FORMAT = 4
EXIT_EMPTY_OUTPUT = 5
EXIT_INFEASIBLE = 6
EXIT_NUMERICAL = 7


@dataclass(frozen=True)
class InteractionFileRow:
    """One line of the interaction TSV (before or after expansion)."""

    case_id: str
    date: date
    plaintiff_firm: str
    defendant_firm: str
    case_type: str
    outcome: str  # "P" or "D"


@contextmanager
def atomic_path(target):
    """Yield a temp path that replaces ``target`` only on successful exit."""
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(target, text: str) -> None:
    with atomic_path(target) as tmp:
        tmp.write_text(text, encoding="utf-8", newline="\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# --- interaction TSV --------------------------------------------------------

def read_interaction_rows(path) -> tuple[list[InteractionFileRow], list[str]]:
    """Parse the interaction TSV; invalid rows become diagnostics, not rows."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such interaction file: {path}")
    rows: list[InteractionFileRow] = []
    diagnostics: list[str] = []
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n").rstrip("\r")
        if tuple(header.split("\t")) != INTERACTION_HEADER:
            expected = "\t".join(INTERACTION_HEADER)
            raise MalformedHeaderError(
                f"expected header {expected!r}, got {header!r}", path=path, line=1
            )
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != len(INTERACTION_HEADER):
                diagnostics.append(f"line {lineno}: expected 6 fields, got {len(fields)}")
                continue
            case_id, date_text, pla, dfd, ctype, outcome = fields
            if not all((case_id, date_text, pla, dfd, ctype, outcome)):
                diagnostics.append(f"line {lineno}: empty field")
                continue
            if outcome not in ("P", "D"):
                diagnostics.append(f"line {lineno}: outcome must be P or D, got {outcome!r}")
                continue
            try:
                when = date.fromisoformat(date_text)
            except ValueError:
                diagnostics.append(f"line {lineno}: unparseable date {date_text!r}")
                continue
            rows.append(InteractionFileRow(case_id, when, pla, dfd, ctype, outcome))
    return rows, diagnostics


def write_interaction_rows(path, rows: Sequence[InteractionFileRow]) -> None:
    lines = ["\t".join(INTERACTION_HEADER)]
    for r in rows:
        lines.append(
            "\t".join(
                (r.case_id, r.date.isoformat(), r.plaintiff_firm, r.defendant_firm, r.case_type, r.outcome)
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def expand_rows(
    rows: Sequence[InteractionFileRow],
    canonical_map: Mapping[str, str] | None = None,
) -> tuple[list[InteractionFileRow], list[str]]:
    """Expand multi-firm rows to pairwise rows and canonicalize names.

    A row with firms ``a;b`` vs ``c;d;e`` becomes the 6 pairwise rows of
    the cross product, plaintiff-major order, all sharing the case id and
    date.  Pairs whose two firms collapse to the same canonical name are
    dropped with a diagnostic.
    """
    canonical_map = canonical_map or {}
    out: list[InteractionFileRow] = []
    diagnostics: list[str] = []
    for r in rows:
        plaintiffs = [canonical_map.get(f.strip(), f.strip()) for f in r.plaintiff_firm.split(";") if f.strip()]
        defendants = [canonical_map.get(f.strip(), f.strip()) for f in r.defendant_firm.split(";") if f.strip()]
        if not plaintiffs or not defendants:
            diagnostics.append(f"case {r.case_id}: a side has no firms")
            continue
        for p in plaintiffs:
            for d in defendants:
                if p == d:
                    diagnostics.append(f"case {r.case_id}: {p!r} appears on both sides; pair skipped")
                    continue
                out.append(InteractionFileRow(r.case_id, r.date, p, d, r.case_type, r.outcome))
    return out, diagnostics


def rows_to_records(
    rows: Sequence[InteractionFileRow],
) -> tuple[list[InteractionRecord], list[EntityId], list[InteractionType]]:
    """Build records with dense entity/type ids assigned by first appearance."""
    if not rows:
        raise EmptyOutputError("no usable interaction rows")
    entity_ids: dict[str, EntityId] = {}
    entities: list[EntityId] = []
    type_ids: dict[str, InteractionType] = {}
    types: list[InteractionType] = []

    def _entity(label: str) -> EntityId:
        ent = entity_ids.get(label)
        if ent is None:
            ent = EntityId(len(entities), label)
            entity_ids[label] = ent
            entities.append(ent)
        return ent

    def _type(name: str) -> InteractionType:
        t = type_ids.get(name)
        if t is None:
            t = InteractionType(len(types), name)
            type_ids[name] = t
            types.append(t)
        return t

    records = [
        InteractionRecord(
            plaintiff=_entity(r.plaintiff_firm),
            defendant=_entity(r.defendant_firm),
            itype=_type(r.case_type),
            winner=Winner(r.outcome),
            timestamp=r.date,
        )
        for r in rows
    ]
    return records, entities, types


def records_to_rows(
    records: Sequence[InteractionRecord], case_ids: Sequence[str] | None = None
) -> list[InteractionFileRow]:
    if case_ids is None:
        case_ids = [f"case-{i:06d}" for i in range(len(records))]
    return [
        InteractionFileRow(
            case_id=cid,
            date=r.timestamp,
            plaintiff_firm=r.plaintiff.label,
            defendant_firm=r.defendant.label,
            case_type=r.itype.name,
            outcome=r.winner.value,
        )
        for cid, r in zip(case_ids, records)
    ]


def ingest(
    path,
    canonical_map: Mapping[str, str] | None = None,
    strict: bool = False,
) -> tuple[list[InteractionRecord], list[EntityId], list[InteractionType], list[str]]:
    """Read, validate, expand, and canonicalize an interaction file.

    Invalid rows are skipped and reported with line numbers; in strict
    mode any diagnostic aborts the ingest instead.
    """
    rows, diagnostics = read_interaction_rows(path)
    expanded, more = expand_rows(rows, canonical_map)
    diagnostics.extend(more)
    if strict and diagnostics:
        raise FileFormatError(
            f"{len(diagnostics)} invalid row(s), first: {diagnostics[0]}", path=path
        )
    if not expanded:
        raise EmptyOutputError("no valid interactions after expansion", path=path)
    records, entities, types = rows_to_records(expanded)
    return records, entities, types, diagnostics


# --- model file --------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.12g}"


def save_model(
    path,
    params: ModelParams,
    entities: Sequence[EntityId],
    types: Sequence[InteractionType],
) -> None:
    if len(entities) != params.n_entities or len(types) != params.n_types:
        raise FileFormatError("entities/types do not match the parameter shapes")
    lines = [MODEL_MAGIC]
    for e in sorted(entities, key=lambda e: e.id):
        if "\t" in e.label or "\n" in e.label:
            raise FileFormatError(f"entity label {e.label!r} contains tab or newline")
        lines.append(f"entity\t{e.label}\t{_fmt(params.scores[e.id])}")
    for t in sorted(types, key=lambda t: t.id):
        if "\t" in t.name or "\n" in t.name:
            raise FileFormatError(f"type name {t.name!r} contains tab or newline")
        lines.append(f"type\t{t.name}\t{_fmt(params.privileges[t.id])}\t{_fmt(params.valences[t.id])}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_model(path) -> tuple[ModelParams, list[EntityId], list[InteractionType]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such model file: {path}")
    with open(path, encoding="utf-8") as fh:
        magic = fh.readline().rstrip("\n")
        if magic != MODEL_MAGIC:
            raise MalformedHeaderError(
                f"expected {MODEL_MAGIC!r}, got {magic!r}", path=path, line=1
            )
        entities: list[EntityId] = []
        scores: list[float] = []
        types: list[InteractionType] = []
        eps: list[float] = []
        qs: list[float] = []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            try:
                if fields[0] == "entity" and len(fields) == 3:
                    entities.append(EntityId(len(entities), fields[1]))
                    scores.append(float(fields[2]))
                elif fields[0] == "type" and len(fields) == 4:
                    types.append(InteractionType(len(types), fields[1]))
                    eps.append(float(fields[2]))
                    qs.append(float(fields[3]))
                else:
                    raise ValueError("unrecognized line")
            except ValueError as exc:
                raise FileFormatError(f"bad model line: {exc}", path=path, line=lineno) from exc
    if not entities or not types:
        raise EmptyOutputError("model file lists no entities or no types", path=path)
    params = ModelParams(scores=scores, privileges=eps, valences=qs)
    return params, entities, types


# --- rankings, counts, canonical maps ---------------------------------------

def load_ranking(path, name: str | None = None, canonical_map: Mapping[str, str] | None = None) -> ExternalRanking:
    """Read a ``rank<TAB>firm name`` file; names are lowercased and canonicalized."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such ranking file: {path}")
    canonical_map = canonical_map or {}
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise FileFormatError("expected rank<TAB>firm name", path=path, line=lineno)
            try:
                rank = float(fields[0])
            except ValueError as exc:
                raise FileFormatError(f"bad rank {fields[0]!r}", path=path, line=lineno) from exc
            label = fields[1].strip().lower()
            entries.append((canonical_map.get(label, label), rank))
    if not entries:
        raise EmptyOutputError("ranking file has no entries", path=path)
    return ExternalRanking(name=name or path.stem, entries=tuple(entries))


def read_name_counts(path) -> dict[str, int]:
    """Read ``count<TAB>string`` lines into a frequency table."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such counts file: {path}")
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise FileFormatError("expected count<TAB>string", path=path, line=lineno)
            try:
                n = int(fields[0])
            except ValueError as exc:
                raise FileFormatError(f"bad count {fields[0]!r}", path=path, line=lineno) from exc
            if n <= 0:
                raise FileFormatError(f"count must be positive, got {n}", path=path, line=lineno)
            counts[fields[1]] = counts.get(fields[1], 0) + n
    if not counts:
        raise EmptyOutputError("counts file has no entries", path=path)
    return counts


def write_canonical_map(path, canonical: Mapping[str, str]) -> None:
    lines = [f"{raw}\t{rep}" for raw, rep in sorted(canonical.items())]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_canonical_map(path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such canonical map: {path}")
    mapping: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise FileFormatError("expected raw<TAB>canonical", path=path, line=lineno)
            mapping[fields[0]] = fields[1]
    return mapping


def load_parse_config(path) -> ParseConfig:
    """Read parser tables from a ``key=value`` file (keys are repeatable)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such parser config: {path}")
    base = ParseConfig()
    keywords = list(base.keywords)
    replacements = list(base.replacements)
    expansions = list(base.expansions)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FileFormatError("expected key=value", path=path, line=lineno)
            key, _, value = line.partition("=")
            key = key.strip()
            if key == "keyword":
                keywords.append(value.strip().lower())
            elif key in ("replace", "expansion"):
                if "=>" not in value:
                    raise FileFormatError("expected OLD=>NEW", path=path, line=lineno)
                old, _, new = value.partition("=>")
                pair = (old, new)
                if key == "replace":
                    replacements.append(pair)
                else:
                    expansions.append(pair)
            else:
                raise FileFormatError(f"unknown key {key!r}", path=path, line=lineno)
    return ParseConfig(
        expansions=tuple(expansions),
        keywords=tuple(keywords),
        replacements=tuple(replacements),
    )


# --- attorney-case assembly ---------------------------------------------------

def interactions_from_attorney_substrings(
    substrings: Sequence[str], config: ParseConfig | None = None
) -> tuple[list[str], list[str]] | None:
    """Assemble one case's plaintiff and defendant firm lists, or None.

    Discards (returns None) cases with fewer than two counsel lines, a
    counsel line naming both roles, or a side with no extracted firm.
    """
    if len(substrings) < 2:
        return None
    config = config or ParseConfig()
    plaintiffs: list[str] = []
    defendants: list[str] = []
    for text in substrings:
        roles_seen = set()
        rest = text
        while " for " in rest:
            _, _, rest = rest.partition(" for ")
            low = rest.strip().strip(".,;: ").lower()
            if low.startswith("plaintiff"):
                roles_seen.add(PartyRole.PLAINTIFF)
            elif low.startswith("defendant"):
                roles_seen.add(PartyRole.DEFENDANT)
        if len(roles_seen) > 1:
            return None  # one counsel line serving both sides: ambiguous case
        parsed = parse_attorney_substring(text, config)
        if parsed is None or parsed.role is PartyRole.OTHER:
            continue
        bucket = plaintiffs if parsed.role is PartyRole.PLAINTIFF else defendants
        for firm in parsed.firms:
            if firm not in bucket:
                bucket.append(firm)
    if not plaintiffs or not defendants:
        return None
    return plaintiffs, defendants


# --- manifests ----------------------------------------------------------------

def write_manifest(
    path,
    subcommand: str,
    config: Mapping,
    inputs: Mapping[str, str | Path],
    outputs: Iterable[str],
    seed: int | None = None,
) -> None:
    """Record what a stage consumed and produced, with input hashes."""
    from . import __version__

    manifest = {
        "tool": "ahpi",
        "version": __version__,
        "subcommand": subcommand,
        "seed": seed,
        "config": dict(sorted(config.items())),
        "inputs": {
            name: {"path": str(p), "sha256": sha256_file(p)} for name, p in sorted(inputs.items())
        },
        "outputs": sorted(str(o) for o in outputs),
    }
    atomic_write_text(path, json.dumps(manifest, indent=2, default=str) + "\n")


def verify_manifest(path) -> list[str]:
    """Re-hash a manifest's inputs; returns a list of mismatch descriptions."""
    manifest = json.loads(Path(path).read_text(encoding="utf-8"))
    problems = []
    for name, entry in manifest.get("inputs", {}).items():
        p = Path(entry["path"])
        if not p.exists():
            problems.append(f"{name}: missing {p}")
        elif sha256_file(p) != entry["sha256"]:
            problems.append(f"{name}: hash mismatch for {p}")
    return problems
