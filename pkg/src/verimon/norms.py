"""Norm template parsing, validation and queries.

A norm template is the reusable definition of a standard: its assurance
levels, objectives, verification process templates, required document kinds
and checklist question banks. Templates are pure data loaded from UTF-8
JSON documents (see ``data/norm_template.schema.json``); supporting a new
standard means authoring a new template file, never code.

Loaded templates are immutable and safe for unrestricted concurrent reads.
"""

from __future__ import annotations

import io
import json
import re
import threading
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, BinaryIO, Iterable

from .errors import ParseError, UnknownLevel, UnknownNorm, UnknownProcess, ValidationError

_ID_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


class FailureCondition(str, Enum):
    Catastrophic = "Catastrophic"
    Hazardous = "Hazardous"
    Major = "Major"
    Minor = "Minor"
    NoEffect = "NoEffect"

    @property
    def severity(self) -> int:
        """0 is the most severe class."""
        return _SEVERITY_ORDER.index(self)


_SEVERITY_ORDER = [
    FailureCondition.Catastrophic,
    FailureCondition.Hazardous,
    FailureCondition.Major,
    FailureCondition.Minor,
    FailureCondition.NoEffect,
]


class Applicability(str, Enum):
    Required = "Required"
    RequiredWithIndependence = "RequiredWithIndependence"
    NotRequired = "NotRequired"

    @property
    def strength(self) -> int:
        if self is Applicability.RequiredWithIndependence:
            return 2
        if self is Applicability.Required:
            return 1
        return 0

    @property
    def applies(self) -> bool:
        return self is not Applicability.NotRequired


class ChecklistScope(str, Enum):
    Process = "Process"
    Document = "Document"


class DocumentKind(str, Enum):
    Plan = "Plan"
    Standard = "Standard"
    Requirements = "Requirements"
    Design = "Design"
    Code = "Code"
    TestArtifact = "TestArtifact"
    Other = "Other"


class NonMonotoneApplicability(UserWarning):
    """An objective is required at a less restrictive level but not at a
    more restrictive one. Real norms do this, so it is a warning only."""


@dataclass(frozen=True)
class AssuranceLevel:
    symbol: str
    rank: int
    failure_condition: FailureCondition


@dataclass(frozen=True)
class Question:
    question_id: str
    text: str
    objective_refs: tuple[str, ...] = ()


@dataclass(frozen=True)
class ChecklistTemplate:
    template_id: str
    scope: ChecklistScope
    questions: tuple[Question, ...]

    def question(self, question_id: str) -> Question | None:
        for q in self.questions:
            if q.question_id == question_id:
                return q
        return None


@dataclass(frozen=True)
class DocumentSpec:
    spec_id: str
    name: str
    kind: DocumentKind
    document_checklist_template: str  # ChecklistTemplate id, scope Document


@dataclass(frozen=True)
class ProcessTemplate:
    process_id: str
    name: str
    checklist_template: ChecklistTemplate
    expected_document_kinds: tuple[str, ...] = ()  # DocumentSpec ids


@dataclass(frozen=True)
class Objective:
    objective_id: str
    text: str
    process_ref: str
    applicability: dict[str, Applicability] = field(hash=False, default_factory=dict)


@dataclass(frozen=True)
class NormTemplate:
    norm_id: str
    title: str
    assurance_levels: tuple[AssuranceLevel, ...]
    process_templates: tuple[ProcessTemplate, ...]
    document_specs: tuple[DocumentSpec, ...]
    objectives: tuple[Objective, ...]
    # question banks for document reviews, keyed by template_id; document
    # specs reference into this map so several specs can share one bank
    document_checklist_templates: dict[str, ChecklistTemplate] = field(hash=False, default_factory=dict)

    # -- lookups -------------------------------------------------------------

    def has_level(self, symbol: str) -> bool:
        return any(lv.symbol == symbol for lv in self.assurance_levels)

    def level(self, symbol: str) -> AssuranceLevel:
        for lv in self.assurance_levels:
            if lv.symbol == symbol:
                return lv
        raise UnknownLevel(f"norm {self.norm_id!r} has no assurance level {symbol!r}", level=symbol)

    def process_template(self, process_id: str) -> ProcessTemplate:
        for pt in self.process_templates:
            if pt.process_id == process_id:
                return pt
        raise UnknownProcess(f"norm {self.norm_id!r} has no process {process_id!r}", process=process_id)

    def document_spec(self, spec_id: str) -> DocumentSpec | None:
        for spec in self.document_specs:
            if spec.spec_id == spec_id:
                return spec
        return None

    def objective(self, objective_id: str) -> Objective | None:
        for obj in self.objectives:
            if obj.objective_id == objective_id:
                return obj
        return None

    def checklist_template(self, template_id: str) -> ChecklistTemplate | None:
        for ct in self._all_checklist_templates():
            if ct.template_id == template_id:
                return ct
        return None

    def _all_checklist_templates(self) -> Iterable[ChecklistTemplate]:
        seen: set[str] = set()
        for pt in self.process_templates:
            if pt.checklist_template.template_id not in seen:
                seen.add(pt.checklist_template.template_id)
                yield pt.checklist_template
        for ct in self.document_checklist_templates.values():
            if ct.template_id not in seen:
                seen.add(ct.template_id)
                yield ct

    def question_applicable(self, question: Question, level_symbol: str) -> bool:
        """A question is asked at a level when it has no objective references
        (unconditional) or at least one referenced objective applies."""
        if not question.objective_refs:
            return True
        for ref in question.objective_refs:
            obj = self.objective(ref)
            if obj is not None and obj.applicability[level_symbol].applies:
                return True
        return False

    def instance_questions(self, template: ChecklistTemplate, level_symbol: str) -> tuple[Question, ...]:
        """The questions a fresh checklist instance carries at a level."""
        self.level(level_symbol)
        return tuple(q for q in template.questions if self.question_applicable(q, level_symbol))


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------

def resolve_objectives(template: NormTemplate, level: str) -> list[tuple[Objective, Applicability]]:
    """Objectives applicable at the level, template order preserved."""
    template.level(level)
    out: list[tuple[Objective, Applicability]] = []
    for obj in template.objectives:
        flag = obj.applicability[level]
        if flag.applies:
            out.append((obj, flag))
    return out


def required_documents(template: NormTemplate, level: str) -> list[DocumentSpec]:
    """Document specs reachable from any process template that has at least
    one applicable objective at the level. No duplicates, stable order."""
    template.level(level)
    applicable_processes = {obj.process_ref for obj, _ in resolve_objectives(template, level)}
    out: list[DocumentSpec] = []
    seen: set[str] = set()
    for pt in template.process_templates:
        if pt.process_id not in applicable_processes:
            continue
        for spec_id in pt.expected_document_kinds:
            if spec_id in seen:
                continue
            seen.add(spec_id)
            spec = template.document_spec(spec_id)
            assert spec is not None  # guaranteed by load-time validation
            out.append(spec)
    return out


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def load_norm_template(source: bytes | bytearray | BinaryIO) -> NormTemplate:
    """Parse and fully validate a norm template document.

    Raises ParseError for malformed JSON (with line and column) and
    ValidationError for any broken invariant, naming the offending element.
    """
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    else:
        raw = source.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"template is not valid UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            line=exc.lineno,
            column=exc.colno,
        ) from exc
    return _build_template(doc)


def load_norm_template_file(path: str | Path) -> NormTemplate:
    with open(path, "rb") as fh:
        return load_norm_template(fh)


def _check_keys(obj: dict, path: str, required: Iterable[str], optional: Iterable[str] = ()) -> None:
    required = set(required)
    allowed = required | set(optional)
    missing = required - obj.keys()
    if missing:
        raise ValidationError(f"{path}: missing field {sorted(missing)[0]!r}", element=path)
    unknown = obj.keys() - allowed
    if unknown:
        raise ValidationError(f"{path}: unknown field {sorted(unknown)[0]!r}", element=path)


def _expect(value: Any, type_: type, path: str) -> Any:
    if type_ is int and isinstance(value, bool):
        raise ValidationError(f"{path}: expected {type_.__name__}, got bool", element=path)
    if not isinstance(value, type_):
        raise ValidationError(f"{path}: expected {type_.__name__}, got {type(value).__name__}", element=path)
    return value


def _expect_id(value: Any, path: str) -> str:
    _expect(value, str, path)
    if not _ID_PATTERN.match(value):
        raise ValidationError(
            f"{path}: identifier {value!r} must match {_ID_PATTERN.pattern}", element=path
        )
    return value


def _expect_enum(value: Any, enum: type[Enum], path: str) -> Any:
    _expect(value, str, path)
    try:
        return enum(value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum)  # type: ignore[attr-defined]
        raise ValidationError(f"{path}: {value!r} is not one of {allowed}", element=path) from None


def _parse_checklist_template(raw: Any, path: str) -> ChecklistTemplate:
    _expect(raw, dict, path)
    _check_keys(raw, path, ["template_id", "scope", "questions"])
    template_id = _expect_id(raw["template_id"], f"{path}.template_id")
    scope = _expect_enum(raw["scope"], ChecklistScope, f"{path}.scope")
    questions_raw = _expect(raw["questions"], list, f"{path}.questions")
    questions: list[Question] = []
    seen_q: set[str] = set()
    for i, q in enumerate(questions_raw):
        qpath = f"{path}.questions[{i}]"
        _expect(q, dict, qpath)
        _check_keys(q, qpath, ["question_id", "text"], ["objective_refs"])
        qid = _expect_id(q["question_id"], f"{qpath}.question_id")
        if qid in seen_q:
            raise ValidationError(
                f"{qpath}: duplicate question_id {qid!r} in template {template_id!r}", element=qid
            )
        seen_q.add(qid)
        text = _expect(q["text"], str, f"{qpath}.text")
        refs_raw = q.get("objective_refs", [])
        _expect(refs_raw, list, f"{qpath}.objective_refs")
        refs = tuple(_expect(r, str, f"{qpath}.objective_refs[{j}]") for j, r in enumerate(refs_raw))
        questions.append(Question(question_id=qid, text=text, objective_refs=refs))
    return ChecklistTemplate(template_id=template_id, scope=scope, questions=tuple(questions))


def _build_template(doc: Any) -> NormTemplate:
    _expect(doc, dict, "template")
    _check_keys(doc, "template", ["norm_id", "title", "assurance_levels", "processes", "documents", "objectives"])

    norm_id = _expect_id(doc["norm_id"], "norm_id")
    title = _expect(doc["title"], str, "title")

    # assurance levels: most restrictive first, ranks strictly increasing from 0
    levels_raw = _expect(doc["assurance_levels"], list, "assurance_levels")
    if not levels_raw:
        raise ValidationError("assurance_levels: must not be empty", element="assurance_levels")
    levels: list[AssuranceLevel] = []
    seen_symbols: set[str] = set()
    for i, lv in enumerate(levels_raw):
        lpath = f"assurance_levels[{i}]"
        _expect(lv, dict, lpath)
        _check_keys(lv, lpath, ["symbol", "rank", "failure_condition"])
        symbol = _expect_id(lv["symbol"], f"{lpath}.symbol")
        if symbol in seen_symbols:
            raise ValidationError(f"{lpath}: duplicate level symbol {symbol!r}", element=symbol)
        seen_symbols.add(symbol)
        rank = _expect(lv["rank"], int, f"{lpath}.rank")
        condition = _expect_enum(lv["failure_condition"], FailureCondition, f"{lpath}.failure_condition")
        levels.append(AssuranceLevel(symbol=symbol, rank=rank, failure_condition=condition))
    if levels[0].rank != 0:
        raise ValidationError(
            f"assurance_levels[0]: most restrictive level {levels[0].symbol!r} must have rank 0",
            element=levels[0].symbol,
        )
    for prev, cur in zip(levels, levels[1:]):
        if cur.rank <= prev.rank:
            raise ValidationError(
                f"assurance_levels: rank of {cur.symbol!r} must exceed rank of {prev.symbol!r}",
                element=cur.symbol,
            )
        if cur.failure_condition.severity < prev.failure_condition.severity:
            raise ValidationError(
                f"assurance_levels: failure condition of {cur.symbol!r} is more severe than "
                f"that of lower-ranked {prev.symbol!r}",
                element=cur.symbol,
            )

    # checklist template definitions are collected as they appear so that
    # document entries can share one by referencing its id
    templates_by_id: dict[str, ChecklistTemplate] = {}

    def define_template(ct: ChecklistTemplate, path: str) -> ChecklistTemplate:
        if ct.template_id in templates_by_id:
            raise ValidationError(
                f"{path}: duplicate checklist template_id {ct.template_id!r}", element=ct.template_id
            )
        templates_by_id[ct.template_id] = ct
        return ct

    processes_raw = _expect(doc["processes"], list, "processes")
    processes: list[ProcessTemplate] = []
    seen_pids: set[str] = set()
    for i, p in enumerate(processes_raw):
        ppath = f"processes[{i}]"
        _expect(p, dict, ppath)
        _check_keys(p, ppath, ["process_id", "name", "checklist_template"], ["expected_document_kinds"])
        pid = _expect_id(p["process_id"], f"{ppath}.process_id")
        if pid in seen_pids:
            raise ValidationError(f"{ppath}: duplicate process_id {pid!r}", element=pid)
        seen_pids.add(pid)
        name = _expect(p["name"], str, f"{ppath}.name")
        ct = define_template(_parse_checklist_template(p["checklist_template"], f"{ppath}.checklist_template"), ppath)
        if ct.scope is not ChecklistScope.Process:
            raise ValidationError(
                f"{ppath}.checklist_template: template {ct.template_id!r} must have scope Process",
                element=ct.template_id,
            )
        if not ct.questions:
            raise ValidationError(
                f"{ppath}.checklist_template: template {ct.template_id!r} must define at least one question",
                element=ct.template_id,
            )
        kinds_raw = p.get("expected_document_kinds", [])
        _expect(kinds_raw, list, f"{ppath}.expected_document_kinds")
        kinds = tuple(
            _expect(k, str, f"{ppath}.expected_document_kinds[{j}]") for j, k in enumerate(kinds_raw)
        )
        processes.append(ProcessTemplate(process_id=pid, name=name, checklist_template=ct, expected_document_kinds=kinds))

    # documents: checklist is defined inline (object) or shared by id (string)
    documents_raw = _expect(doc["documents"], list, "documents")
    doc_entries: list[tuple[str, str, DocumentKind, Any, str]] = []
    seen_sids: set[str] = set()
    for i, d in enumerate(documents_raw):
        dpath = f"documents[{i}]"
        _expect(d, dict, dpath)
        _check_keys(d, dpath, ["spec_id", "name", "kind", "document_checklist_template"])
        sid = _expect_id(d["spec_id"], f"{dpath}.spec_id")
        if sid in seen_sids:
            raise ValidationError(f"{dpath}: duplicate spec_id {sid!r}", element=sid)
        seen_sids.add(sid)
        dname = _expect(d["name"], str, f"{dpath}.name")
        kind = _expect_enum(d["kind"], DocumentKind, f"{dpath}.kind")
        ref = d["document_checklist_template"]
        if isinstance(ref, dict):
            ct = define_template(_parse_checklist_template(ref, f"{dpath}.document_checklist_template"), dpath)
            ref = ct.template_id
        else:
            _expect(ref, str, f"{dpath}.document_checklist_template")
        doc_entries.append((sid, dname, kind, ref, dpath))

    documents: list[DocumentSpec] = []
    for sid, dname, kind, ref, dpath in doc_entries:
        ct = templates_by_id.get(ref)
        if ct is None:
            raise ValidationError(
                f"{dpath}: document {sid!r} references undefined checklist template {ref!r}",
                element=ref,
            )
        if ct.scope is not ChecklistScope.Document:
            raise ValidationError(
                f"{dpath}: checklist template {ref!r} of document {sid!r} must have scope Document",
                element=ref,
            )
        documents.append(DocumentSpec(spec_id=sid, name=dname, kind=kind, document_checklist_template=ref))

    # objectives
    objectives_raw = _expect(doc["objectives"], list, "objectives")
    objectives: list[Objective] = []
    seen_oids: set[str] = set()
    for i, o in enumerate(objectives_raw):
        opath = f"objectives[{i}]"
        _expect(o, dict, opath)
        _check_keys(o, opath, ["objective_id", "text", "process_ref", "applicability"])
        oid = _expect_id(o["objective_id"], f"{opath}.objective_id")
        if oid in seen_oids:
            raise ValidationError(f"{opath}: duplicate objective_id {oid!r}", element=oid)
        seen_oids.add(oid)
        text = _expect(o["text"], str, f"{opath}.text")
        pref = _expect(o["process_ref"], str, f"{opath}.process_ref")
        if pref not in seen_pids:
            raise ValidationError(
                f"{opath}: objective {oid!r} references unknown process {pref!r}", element=pref
            )
        app_raw = _expect(o["applicability"], dict, f"{opath}.applicability")
        applicability: dict[str, Applicability] = {}
        for symbol in seen_symbols:
            if symbol not in app_raw:
                raise ValidationError(
                    f"{opath}.applicability: objective {oid!r} missing entry for level {symbol!r}",
                    element=oid,
                )
        for key, value in app_raw.items():
            if key not in seen_symbols:
                raise ValidationError(
                    f"{opath}.applicability: objective {oid!r} names unknown level {key!r}",
                    element=key,
                )
            applicability[key] = _expect_enum(value, Applicability, f"{opath}.applicability.{key}")
        objectives.append(Objective(objective_id=oid, text=text, process_ref=pref, applicability=applicability))

    # cross references out of questions
    for pt in processes:
        for q in pt.checklist_template.questions:
            for ref in q.objective_refs:
                if ref not in seen_oids:
                    raise ValidationError(
                        f"question {q.question_id!r} of template {pt.checklist_template.template_id!r} "
                        f"references unknown objective {ref!r}",
                        element=ref,
                    )
    for ct in templates_by_id.values():
        for q in ct.questions:
            for ref in q.objective_refs:
                if ref not in seen_oids:
                    raise ValidationError(
                        f"question {q.question_id!r} of template {ct.template_id!r} "
                        f"references unknown objective {ref!r}",
                        element=ref,
                    )

    # every document spec must be expected by at least one process
    expected_anywhere: set[str] = set()
    for pt in processes:
        for spec_id in pt.expected_document_kinds:
            if spec_id not in seen_sids:
                raise ValidationError(
                    f"process {pt.process_id!r} expects unknown document spec {spec_id!r}",
                    element=spec_id,
                )
            expected_anywhere.add(spec_id)
    for spec in documents:
        if spec.spec_id not in expected_anywhere:
            raise ValidationError(
                f"document spec {spec.spec_id!r} is not expected by any process template",
                element=spec.spec_id,
            )

    template = NormTemplate(
        norm_id=norm_id,
        title=title,
        assurance_levels=tuple(levels),
        process_templates=tuple(processes),
        document_specs=tuple(documents),
        objectives=tuple(objectives),
        document_checklist_templates={
            tid: ct for tid, ct in templates_by_id.items() if ct.scope is ChecklistScope.Document
        },
    )
    _warn_non_monotone(template)
    return template


def _warn_non_monotone(template: NormTemplate) -> None:
    ordered = sorted(template.assurance_levels, key=lambda lv: lv.rank)
    for obj in template.objectives:
        strengths = [obj.applicability[lv.symbol].strength for lv in ordered]
        for prev, cur in zip(strengths, strengths[1:]):
            if cur > prev:
                warnings.warn(
                    f"objective {obj.objective_id!r} of norm {template.norm_id!r} is non-monotone: "
                    "required at a less restrictive level but not at a more restrictive one",
                    NonMonotoneApplicability,
                    stacklevel=3,
                )
                break


def template_to_dict(template: NormTemplate) -> dict[str, Any]:
    """Regenerate the external document form of a template. Shared document
    checklist banks are emitted inline at their first use and referenced by
    id afterwards; the result loads back to an equal template."""

    def question_dict(q: Question) -> dict[str, Any]:
        return {"question_id": q.question_id, "text": q.text, "objective_refs": list(q.objective_refs)}

    def checklist_dict(ct: ChecklistTemplate) -> dict[str, Any]:
        return {
            "template_id": ct.template_id,
            "scope": ct.scope.value,
            "questions": [question_dict(q) for q in ct.questions],
        }

    emitted: set[str] = set()
    documents: list[dict[str, Any]] = []
    for spec in template.document_specs:
        ref = spec.document_checklist_template
        if ref in emitted:
            value: Any = ref
        else:
            emitted.add(ref)
            value = checklist_dict(template.document_checklist_templates[ref])
        documents.append({
            "spec_id": spec.spec_id,
            "name": spec.name,
            "kind": spec.kind.value,
            "document_checklist_template": value,
        })

    return {
        "norm_id": template.norm_id,
        "title": template.title,
        "assurance_levels": [
            {"symbol": lv.symbol, "rank": lv.rank, "failure_condition": lv.failure_condition.value}
            for lv in template.assurance_levels
        ],
        "processes": [
            {
                "process_id": pt.process_id,
                "name": pt.name,
                "checklist_template": checklist_dict(pt.checklist_template),
                "expected_document_kinds": list(pt.expected_document_kinds),
            }
            for pt in template.process_templates
        ],
        "documents": documents,
        "objectives": [
            {
                "objective_id": o.objective_id,
                "text": o.text,
                "process_ref": o.process_ref,
                "applicability": {k: v.value for k, v in o.applicability.items()},
            }
            for o in template.objectives
        ],
    }


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

class NormRegistry:
    """id -> template map. Reads are lock-free; additions are serialized."""

    def __init__(self) -> None:
        self._templates: dict[str, NormTemplate] = {}
        self._lock = threading.Lock()

    def add(self, template: NormTemplate) -> None:
        with self._lock:
            if template.norm_id in self._templates:
                raise ValidationError(
                    f"norm {template.norm_id!r} is already registered", element=template.norm_id
                )
            self._templates[template.norm_id] = template

    def get(self, norm_id: str) -> NormTemplate:
        try:
            return self._templates[norm_id]
        except KeyError:
            raise UnknownNorm(f"no norm registered under {norm_id!r}", norm=norm_id) from None

    def norm_ids(self) -> list[str]:
        return sorted(self._templates)

    def templates(self) -> list[NormTemplate]:
        return [self._templates[k] for k in self.norm_ids()]

    @classmethod
    def from_directory(cls, directory: str | Path) -> "NormRegistry":
        registry = cls()
        directory = Path(directory)
        for path in sorted(directory.glob("*.json")):
            if path.name.endswith(".schema.json"):
                continue
            registry.add(load_norm_template_file(path))
        return registry


def load_bundled_template(name: str = "do178b_demo") -> NormTemplate:
    """Load one of the norm templates shipped inside the package."""
    data = _bundled_bytes(f"{name}.norm.json")
    return load_norm_template(io.BytesIO(data))


def _bundled_bytes(filename: str) -> bytes:
    from importlib import resources

    return resources.files("verimon.data").joinpath(filename).read_bytes()
