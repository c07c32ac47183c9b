"""Workspace: the one write path shared by the CLI and the HTTP service.

A workspace ties together the norm registry (bundled templates plus any
template directory), the event-sourced project store, and the fixture
script runner. Every mutation, whichever surface it enters through, goes
authorize -> project operation -> audit append.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .errors import ParseError, ValidationError
from .norms import NormRegistry, NormTemplate, load_norm_template, load_norm_template_file
from .project import Answer, AnswerValue, ObservationState, ProjectParameterization
from .roles import Role

BUNDLED_NORMS = ("do178b_demo",)

_SCRIPT_FORMAT = 1


def build_registry(norm_dir: str | Path | None = None, include_bundled: bool = True) -> NormRegistry:
    """Registry of the templates in ``norm_dir`` plus the bundled ones.
    A directory template with a bundled id overrides the bundled copy."""
    registry = NormRegistry()
    if norm_dir is not None and Path(norm_dir).is_dir():
        for path in sorted(Path(norm_dir).glob("*.json")):
            if path.name.endswith(".schema.json"):
                continue
            registry.add(load_norm_template_file(path))
    if include_bundled:
        from .norms import load_bundled_template

        for name in BUNDLED_NORMS:
            template = load_bundled_template(name)
            if template.norm_id not in registry.norm_ids():
                registry.add(template)
    return registry


class Workspace:
    def __init__(self, store_root: str | Path, norm_dir: str | Path | None = None,
                 include_bundled: bool = True, sync: bool = True) -> None:
        from .store import ProjectStore

        self.norm_dir = Path(norm_dir) if norm_dir is not None else None
        self.registry = build_registry(self.norm_dir, include_bundled)
        self.store = ProjectStore(store_root, self.registry, sync=sync)

    def add_norm(self, data: bytes) -> NormTemplate:
        """Validate, register and (when a template directory is configured)
        persist a norm template."""
        template = load_norm_template(data)
        self.registry.add(template)
        if self.norm_dir is not None:
            self.norm_dir.mkdir(parents=True, exist_ok=True)
            (self.norm_dir / f"{template.norm_id}.json").write_bytes(data)
        return template

    # -- fixture scripts -------------------------------------------------------

    def run_script(self, script: dict[str, Any], default_actor: str = "admin") -> dict[str, Any]:
        """Execute a fixture script: a deterministic command sequence driven
        through the normal write path. Returns a load summary."""
        if not isinstance(script, dict):
            raise ValidationError("fixture script must be a JSON object")
        if script.get("fixture_format") != _SCRIPT_FORMAT:
            raise ValidationError(
                f"unsupported fixture_format {script.get('fixture_format')!r}, expected {_SCRIPT_FORMAT}"
            )
        commands = script.get("commands")
        if not isinstance(commands, list):
            raise ValidationError("fixture script needs a 'commands' list")
        default_project = script.get("project_id")

        events = 0
        projects: list[str] = []
        with self.store.bulk():
            for index, command in enumerate(commands):
                try:
                    events += self._run_command(command, default_actor, default_project, projects)
                except ValidationError:
                    raise
                except Exception as exc:
                    raise ValidationError(f"commands[{index}] ({command.get('op')}): {exc}") from exc
        return {"commands": len(commands), "events": events, "projects": projects}

    def _run_command(self, command: Any, default_actor: str, default_project: str | None,
                     projects: list[str]) -> int:
        if not isinstance(command, dict) or "op" not in command:
            raise ValidationError("each command must be an object with an 'op' field")
        op = command["op"]
        actor = command.get("actor", default_actor)
        project_id = command.get("project_id", default_project)

        if op == "create_project":
            params = ProjectParameterization.from_dict(command["params"])
            self.store.create_project(actor, params)
            projects.append(params.project_id)
            return 1
        if project_id is None:
            raise ValidationError(f"command {op!r} needs a project_id")
        if op == "answer_checklist":
            answer = Answer(value=AnswerValue(command["answer"]),
                            justification=command.get("justification"))
            self.store.answer_checklist(actor, project_id, command["checklist"],
                                        command["question"], answer)
            return 1
        if op == "register_item":
            self.store.register_item(actor, project_id, command["process"], command["spec"],
                                     command["title"], command["version"],
                                     item_id=command.get("item_id"))
            return 1
        if op == "open_observation":
            count = command.get("count", 1)
            if not isinstance(count, int) or count < 1:
                raise ValidationError("open_observation count must be a positive integer")
            text = command["text"]
            for k in range(1, count + 1):
                body = text if count == 1 else f"{text} ({k} of {count})"
                self.store.open_observation(actor, project_id, command["item"], body)
            return count
        if op == "transition_observation":
            self.store.transition_observation(actor, project_id, command["observation"],
                                              ObservationState(command["to"]), command["comment"])
            return 1
        if op == "resolve_close_all":
            return self._resolve_close_all(command, project_id)
        if op == "assign_user":
            self.store.assign_user(actor, project_id, command["user"], Role(command["role"]),
                                   display_name=command.get("display_name"))
            return 1
        if op == "edit_parameterization":
            self.store.edit_parameterization(actor, project_id, command["life_cycle"])
            return 1
        raise ValidationError(f"unknown fixture op {op!r}")

    def _resolve_close_all(self, command: dict[str, Any], project_id: str) -> int:
        """Resolve and close every currently open observation, in project
        traversal order. Bulk-closure convenience for fixture scripts."""
        resolver = command["resolver"]
        closer = command["closer"]
        resolve_comment = command.get("resolve_comment", "addressed in the revised baseline")
        close_comment = command.get("close_comment", "verified in the revised baseline")
        project = self.store.get(project_id)
        open_ids = [o.observation_id for o in project.all_observations()
                    if o.state is ObservationState.Open]
        for oid in open_ids:
            self.store.transition_observation(resolver, project_id, oid,
                                              ObservationState.Resolved, resolve_comment)
            self.store.transition_observation(closer, project_id, oid,
                                              ObservationState.Closed, close_comment)
        return 2 * len(open_ids)


def load_script_file(path: str | Path) -> dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read fixture script {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"fixture script {path} is not valid JSON: line {exc.lineno}: {exc.msg}",
                         line=exc.lineno) from exc
