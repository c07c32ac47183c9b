"""HTTP+JSON service over a workspace.

Bearer tokens map to user ids; project roles come from the project's own
user list, with a server-side platform role table gating the platform-scoped
actions (norm upload, project creation). Every mutating request runs
authorize -> project operation -> audit append and answers with the freshly
recomputed project status report, so a client needs no second round trip.
Failed requests append nothing.
"""

from __future__ import annotations

import json
import logging
import re
import tempfile
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any

from .app import Workspace
from .canonical import canonical_dumps
from .errors import (
    ChainCorruption,
    DocumentKindUnassignable,
    DuplicateItemId,
    DuplicateObservationId,
    EmptyText,
    IllegalTransition,
    LastManagerRemoval,
    MissingJustification,
    NoVerificationManager,
    ParseError,
    PermissionDenied,
    StorageFailure,
    UnknownChecklist,
    UnknownItem,
    UnknownLevel,
    UnknownNorm,
    UnknownObservation,
    UnknownProcess,
    UnknownProject,
    UnknownQuestion,
    UnknownSelector,
    UnknownSequence,
    ValidationError,
    VerimonError,
)
from .norms import template_to_dict
from .project import Answer, ObservationState, Project, ProjectParameterization
from .roles import Action, Role, authorize
from .status import (
    cc_check,
    item_status,
    nonconformity_metrics,
    view_configuration_items,
    view_observations,
    view_process_status,
)

logger = logging.getLogger("verimon.service")

_MAX_BODY = 10 * 1024 * 1024

_STATUS_BY_ERROR: dict[type, int] = {
    PermissionDenied: 403,
    UnknownNorm: 404,
    UnknownProject: 404,
    UnknownProcess: 404,
    UnknownChecklist: 404,
    UnknownQuestion: 404,
    UnknownItem: 404,
    UnknownObservation: 404,
    UnknownLevel: 404,
    UnknownSelector: 404,
    UnknownSequence: 404,
    IllegalTransition: 409,
    DuplicateItemId: 409,
    DuplicateObservationId: 409,
    LastManagerRemoval: 409,
    DocumentKindUnassignable: 409,
    ChainCorruption: 409,
    ParseError: 400,
    ValidationError: 400,
    MissingJustification: 400,
    EmptyText: 400,
    NoVerificationManager: 400,
    StorageFailure: 500,
}


def error_status(exc: VerimonError) -> int:
    for cls in type(exc).__mro__:
        if cls in _STATUS_BY_ERROR:
            return _STATUS_BY_ERROR[cls]
    return 500


@dataclass
class AuthConfig:
    """token -> user mapping plus the platform-scoped role table."""

    tokens: dict[str, str] = field(default_factory=dict)
    platform_roles: dict[str, Role] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "AuthConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise StorageFailure(f"cannot read token file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"token file {path} is not valid JSON: {exc.msg}", line=exc.lineno) from exc
        tokens = raw.get("tokens")
        if not isinstance(tokens, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in tokens.items()
        ):
            raise ValidationError("token file needs a 'tokens' object mapping token -> user_id")
        platform_raw = raw.get("platform_roles", {})
        platform: dict[str, Role] = {}
        for user_id, role in platform_raw.items():
            try:
                platform[user_id] = Role(role)
            except ValueError:
                raise ValidationError(f"token file: unknown platform role {role!r} for {user_id!r}") from None
        return cls(tokens=tokens, platform_roles=platform)

    def user_for_token(self, token: str) -> str | None:
        return self.tokens.get(token)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, context: dict | None = None) -> None:
        super().__init__(message)
        self.status = status
        self.body = {"error_code": code, "message": message, "context": context or {}}


def _wrap(exc: VerimonError) -> ApiError:
    return ApiError(error_status(exc), exc.code, exc.message, exc.context)


class VerimonHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], workspace: Workspace, auth: AuthConfig) -> None:
        super().__init__(address, ApiHandler)
        self.workspace = workspace
        self.auth = auth


Route = tuple[str, re.Pattern, str]

_ROUTES: list[Route] = [
    ("GET", re.compile(r"^/norms$"), "get_norms"),
    ("POST", re.compile(r"^/norms$"), "post_norms"),
    ("GET", re.compile(r"^/projects$"), "get_projects"),
    ("POST", re.compile(r"^/projects$"), "post_projects"),
    ("GET", re.compile(r"^/projects/([^/]+)/status$"), "get_status"),
    ("GET", re.compile(r"^/projects/([^/]+)/metrics$"), "get_metrics"),
    ("GET", re.compile(r"^/projects/([^/]+)/processes/([^/]+)$"), "get_process"),
    ("PUT", re.compile(r"^/projects/([^/]+)/checklists/([^/]+)/answers/([^/]+)$"), "put_answer"),
    ("POST", re.compile(r"^/projects/([^/]+)/processes/([^/]+)/items$"), "post_item"),
    ("GET", re.compile(r"^/projects/([^/]+)/items/([^/]+)$"), "get_item"),
    ("POST", re.compile(r"^/projects/([^/]+)/items/([^/]+)/observations$"), "post_observation"),
    ("POST", re.compile(r"^/projects/([^/]+)/observations/([^/]+)/transitions$"), "post_transition"),
    ("GET", re.compile(r"^/projects/([^/]+)/evidence$"), "get_evidence"),
    ("PUT", re.compile(r"^/projects/([^/]+)/users/([^/]+)$"), "put_user"),
]


class ApiHandler(BaseHTTPRequestHandler):
    server: VerimonHTTPServer  # narrowed type
    protocol_version = "HTTP/1.1"

    # -- plumbing ---------------------------------------------------------------

    def log_message(self, fmt: str, *args: Any) -> None:
        logger.info("%s %s", self.address_string(), fmt % args)

    def _send_json(self, status: int, payload: Any) -> None:
        data = (canonical_dumps(payload) + "\n").encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self._cors()
        self.end_headers()
        self.wfile.write(data)

    def _send_bytes(self, status: int, data: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self._cors()
        self.end_headers()
        self.wfile.write(data)

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Authorization, Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS")

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        if length > _MAX_BODY:
            raise ApiError(413, "BodyTooLarge", "request body exceeds the size limit")
        return self.rfile.read(length) if length else b""

    def _json_body(self) -> Any:
        raw = self._read_body()
        if not raw:
            raise ApiError(400, "ParseError", "request body must be JSON")
        try:
            return json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ApiError(400, "ParseError", f"request body is not valid JSON: {exc}") from exc

    def _authenticate(self) -> str:
        header = self.headers.get("Authorization") or ""
        if not header.startswith("Bearer "):
            raise ApiError(401, "Unauthorized", "missing bearer token")
        user = self.server.auth.user_for_token(header[len("Bearer "):].strip())
        if user is None:
            raise ApiError(401, "Unauthorized", "unknown token")
        return user

    def _platform_authorize(self, user: str, action: Action) -> None:
        role = self.server.auth.platform_roles.get(user)
        if role is None or not authorize(role, action):
            raise ApiError(403, "PermissionDenied",
                           f"user {user!r} may not perform {action.value} at platform scope",
                           {"actor": user, "action": action.value})

    def _read_authorize(self, project: Project, user: str, action: Action) -> None:
        """Project-scoped read access: membership role first, platform role
        as a fallback for operators who are not project members."""
        member = project.find_user(user)
        if member is not None and authorize(member.role, action):
            return
        platform = self.server.auth.platform_roles.get(user)
        if platform is not None and authorize(platform, action):
            return
        raise ApiError(403, "PermissionDenied",
                       f"user {user!r} may not perform {action.value} on project {project.project_id!r}",
                       {"actor": user, "action": action.value})

    # -- dispatch ---------------------------------------------------------------

    def _dispatch(self, method: str) -> None:
        from urllib.parse import urlparse

        parsed = urlparse(self.path)
        try:
            user = self._authenticate()
            for route_method, pattern, name in _ROUTES:
                if route_method != method:
                    continue
                match = pattern.match(parsed.path)
                if match:
                    handler = getattr(self, name)
                    handler(user, *match.groups(), query=parsed.query)
                    return
            raise ApiError(404, "UnknownRoute", f"no route for {method} {parsed.path}")
        except ApiError as exc:
            self._send_json(exc.status, exc.body)
        except VerimonError as exc:
            wrapped = _wrap(exc)
            self._send_json(wrapped.status, wrapped.body)
        except Exception:  # pragma: no cover - defensive
            logger.exception("unhandled error for %s %s", method, self.path)
            self._send_json(500, {"error_code": "InternalError", "message": "internal error", "context": {}})

    def do_GET(self) -> None:
        self._dispatch("GET")

    def do_POST(self) -> None:
        self._dispatch("POST")

    def do_PUT(self) -> None:
        self._dispatch("PUT")

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    # -- norm and project collections ---------------------------------------------

    def get_norms(self, user: str, query: str = "") -> None:
        ws = self.server.workspace
        norms = [
            {
                "norm_id": t.norm_id,
                "title": t.title,
                "assurance_levels": [lv.symbol for lv in t.assurance_levels],
                "processes": [pt.process_id for pt in t.process_templates],
            }
            for t in ws.registry.templates()
        ]
        self._send_json(200, {"norms": norms})

    def post_norms(self, user: str, query: str = "") -> None:
        self._platform_authorize(user, Action.ManageNorms)
        template = self.server.workspace.add_norm(self._read_body())
        self._send_json(201, {"norm_id": template.norm_id, "title": template.title,
                              "template": template_to_dict(template)})

    def get_projects(self, user: str, query: str = "") -> None:
        ws = self.server.workspace
        rows = []
        platform_role = self.server.auth.platform_roles.get(user)
        for project_id in ws.store.project_ids():
            project = ws.store.get(project_id)
            member = project.find_user(user)
            role = member.role if member else platform_role
            if role is None or not authorize(role, Action.ReadStatus):
                continue
            row = project.summary()
            row["your_role"] = role.value
            row["project_status"] = cc_check(project).project_status.value
            rows.append(row)
        self._send_json(200, {"projects": rows})

    def post_projects(self, user: str, query: str = "") -> None:
        self._platform_authorize(user, Action.CreateProject)
        params = ProjectParameterization.from_dict(self._json_body())
        mutation, record = self.server.workspace.store.create_project(user, params)
        self._send_json(201, {
            "project": mutation.project.summary(),
            "sequence": record.sequence,
            "report": cc_check(mutation.project).to_dict(),
        })

    # -- project reads ----------------------------------------------------------

    def _project_for_read(self, project_id: str, user: str, action: Action) -> Project:
        project = self.server.workspace.store.get(project_id)
        self._read_authorize(project, user, action)
        return project

    def get_status(self, user: str, project_id: str, query: str = "") -> None:
        project = self._project_for_read(project_id, user, Action.ReadStatus)
        self._send_json(200, cc_check(project).to_dict())

    def get_metrics(self, user: str, project_id: str, query: str = "") -> None:
        project = self._project_for_read(project_id, user, Action.ReadStatus)
        self._send_json(200, nonconformity_metrics(project).to_dict())

    def get_process(self, user: str, project_id: str, process_id: str, query: str = "") -> None:
        project = self._project_for_read(project_id, user, Action.ReadAll)
        view = view_process_status(project, process_id)
        view["items"] = view_configuration_items(project, process_id)
        report = cc_check(project)
        for row in report.processes:
            if row.process_id == process_id:
                view["process_status"] = row.process_status.value
                view["pending_reasons"] = [r.to_dict() for r in row.pending_reasons]
        self._send_json(200, view)

    def get_item(self, user: str, project_id: str, item_id: str, query: str = "") -> None:
        project = self._project_for_read(project_id, user, Action.ReadAll)
        _, item = project.find_item(item_id)
        self._send_json(200, {
            "item": item.to_dict(),
            "status": item_status(item).to_dict(),
            "observations": view_observations(project, item_id),
        })

    def get_evidence(self, user: str, project_id: str, query: str = "") -> None:
        from urllib.parse import parse_qs

        project = self._project_for_read(project_id, user, Action.ReadAll)
        params = parse_qs(query)
        up_to = None
        if "up_to" in params:
            try:
                up_to = int(params["up_to"][0])
            except ValueError:
                raise ApiError(400, "ValidationError", "up_to must be an integer") from None
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / f"{project.project_id}-evidence.zip"
            self.server.workspace.store.export_evidence(project_id, out, up_to_sequence=up_to)
            data = out.read_bytes()
        self._send_bytes(200, data, "application/zip")

    # -- mutations ----------------------------------------------------------------

    def _mutation_response(self, status: int, extra: dict[str, Any], mutation: Any, record: Any) -> None:
        body = dict(extra)
        body["sequence"] = record.sequence
        body["report"] = cc_check(mutation.project).to_dict()
        self._send_json(status, body)

    def put_answer(self, user: str, project_id: str, checklist_id: str, question_id: str,
                   query: str = "") -> None:
        answer = Answer.from_dict(self._json_body())
        store = self.server.workspace.store
        mutation, record = store.answer_checklist(user, project_id, checklist_id, question_id, answer)
        self._mutation_response(200, {"checklist": mutation.result.to_dict()}, mutation, record)

    def post_item(self, user: str, project_id: str, process_id: str, query: str = "") -> None:
        body = self._json_body()
        if not isinstance(body, dict):
            raise ApiError(400, "ValidationError", "body must be an object")
        for key in ("spec_id", "title", "version_label"):
            if not isinstance(body.get(key), str):
                raise ApiError(400, "ValidationError", f"body needs string field {key!r}")
        store = self.server.workspace.store
        mutation, record = store.register_item(
            user, project_id, process_id, body["spec_id"], body["title"], body["version_label"],
            item_id=body.get("item_id"),
        )
        self._mutation_response(201, {"item": mutation.result.to_dict()}, mutation, record)

    def post_observation(self, user: str, project_id: str, item_id: str, query: str = "") -> None:
        body = self._json_body()
        if not isinstance(body, dict) or not isinstance(body.get("text"), str):
            raise ApiError(400, "ValidationError", "body needs a string field 'text'")
        store = self.server.workspace.store
        mutation, record = store.open_observation(user, project_id, item_id, body["text"])
        self._mutation_response(201, {"observation": mutation.result.to_dict()}, mutation, record)

    def post_transition(self, user: str, project_id: str, observation_id: str, query: str = "") -> None:
        body = self._json_body()
        if not isinstance(body, dict) or not isinstance(body.get("to_state"), str) \
                or not isinstance(body.get("comment"), str):
            raise ApiError(400, "ValidationError", "body needs string fields 'to_state' and 'comment'")
        try:
            to_state = ObservationState(body["to_state"])
        except ValueError:
            raise ApiError(400, "ValidationError",
                           f"to_state must be one of Open, Resolved, Closed, got {body['to_state']!r}") from None
        store = self.server.workspace.store
        mutation, record = store.transition_observation(user, project_id, observation_id, to_state,
                                                        body["comment"])
        self._mutation_response(200, {"observation": mutation.result.to_dict()}, mutation, record)

    def put_user(self, user: str, project_id: str, user_id: str, query: str = "") -> None:
        body = self._json_body()
        if not isinstance(body, dict) or not isinstance(body.get("role"), str):
            raise ApiError(400, "ValidationError", "body needs a string field 'role'")
        try:
            role = Role(body["role"])
        except ValueError:
            raise ApiError(400, "ValidationError", f"unknown role {body['role']!r}") from None
        store = self.server.workspace.store
        mutation, record = store.assign_user(user, project_id, user_id, role,
                                             display_name=body.get("display_name"))
        users = [u.to_dict() for u in mutation.project.parameterization.users]
        self._mutation_response(200, {"users": users}, mutation, record)


class ApiService:
    """In-process service wrapper: start, query the bound port, stop."""

    def __init__(self, workspace: Workspace, auth: AuthConfig, host: str = "127.0.0.1",
                 port: int = 0) -> None:
        self.server = VerimonHTTPServer((host, port), workspace, auth)
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self.server.server_address[1]

    @property
    def base_url(self) -> str:
        host, port = self.server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "ApiService":
        self._thread = threading.Thread(
            target=lambda: self.server.serve_forever(poll_interval=0.05), daemon=True
        )
        self._thread.start()
        return self

    def serve_forever(self) -> None:
        self.server.serve_forever()

    def stop(self) -> None:
        self.server.shutdown()
        self.server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
