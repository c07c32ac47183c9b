"""Command line entry point.

Exit codes: 0 success, 1 domain error (validation, permission, corruption),
2 usage error. ``--format json`` output is canonical (sorted keys, stable
bytes) so it can be golden-file tested; ``--format csv`` is available where
a tabular export is defined (metrics, roles).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from . import fixtures
from .app import Workspace, build_registry, load_script_file
from .canonical import canonical_dumps
from .errors import StorageFailure, ValidationError, VerimonError
from .norms import load_norm_template_file, template_to_dict
from .project import Answer, AnswerValue, ObservationState
from .roles import Role, matrix_rows
from .status import cc_check, nonconformity_metrics, view_observations, view_project_status

PROG = "verimon"


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted both before and after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--store", default=argparse.SUPPRESS, metavar="PATH",
                        help="store directory (event logs live here)")
    common.add_argument("--norm-dir", default=argparse.SUPPRESS, metavar="PATH",
                        help="directory of norm template files (default: <store>/norms)")
    common.add_argument("--format", choices=["human", "json", "csv"], default=argparse.SUPPRESS,
                        help="output format")
    common.add_argument("--as", dest="actor", default=argparse.SUPPRESS, metavar="USER",
                        help="acting user id for mutations")

    parser = argparse.ArgumentParser(
        prog=PROG,
        parents=[common],
        description="Verification process monitoring: norm checklists, non-conformities, "
                    "status computation and audit evidence.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(group: Any, name: str, **kwargs: Any) -> argparse.ArgumentParser:
        return group.add_parser(name, parents=[common], **kwargs)

    norm = sub.add_parser("norm", help="norm template tools").add_subparsers(dest="sub", required=True)
    validate = add(norm, "validate", help="check a template file")
    validate.add_argument("file")
    add(norm, "list", help="list registered norms")
    show = add(norm, "show", help="print one norm template")
    show.add_argument("norm_id")

    project = sub.add_parser("project", help="project lifecycle").add_subparsers(dest="sub", required=True)
    create = add(project, "create", help="instantiate a project from a parameterization file")
    create.add_argument("--params", required=True, metavar="FILE")
    status = add(project, "status", help="print the project status report")
    status.add_argument("project_id")
    metrics = add(project, "metrics", help="print non-conformity metrics")
    metrics.add_argument("project_id")
    add(project, "list", help="list projects")

    item = sub.add_parser("item", help="configuration items").add_subparsers(dest="sub", required=True)
    register = add(item, "register", help="register a configuration item")
    register.add_argument("project_id")
    register.add_argument("--process", required=True)
    register.add_argument("--spec", required=True)
    register.add_argument("--title", required=True)
    register.add_argument("--version", required=True)
    register.add_argument("--item-id", default=None)

    checklist = sub.add_parser("checklist", help="checklist answers").add_subparsers(dest="sub", required=True)
    answer = add(checklist, "answer", help="record one answer")
    answer.add_argument("project_id")
    answer.add_argument("checklist_id")
    answer.add_argument("question_id")
    answer.add_argument("value", choices=[v.value for v in AnswerValue])
    answer.add_argument("--justification", default=None)

    obs = sub.add_parser("obs", help="non-conformities").add_subparsers(dest="sub", required=True)
    obs_open = add(obs, "open", help="open an observation against an item")
    obs_open.add_argument("project_id")
    obs_open.add_argument("item_id")
    obs_open.add_argument("--text", required=True)
    obs_tr = add(obs, "transition", help="resolve, close or reopen an observation")
    obs_tr.add_argument("project_id")
    obs_tr.add_argument("observation_id")
    obs_tr.add_argument("to_state", choices=[s.value for s in ObservationState])
    obs_tr.add_argument("--comment", required=True)
    obs_list = add(obs, "list", help="list an item's observations")
    obs_list.add_argument("project_id")
    obs_list.add_argument("item_id")

    evidence = sub.add_parser("evidence", help="certification evidence").add_subparsers(dest="sub", required=True)
    export = add(evidence, "export", help="export a self-verifying evidence archive")
    export.add_argument("project_id")
    export.add_argument("--out", required=True, metavar="FILE")
    export.add_argument("--up-to", type=int, default=None, metavar="SEQ")

    fx = sub.add_parser("fixtures", help="fixture scripts").add_subparsers(dest="sub", required=True)
    load = add(fx, "load", help="run a fixture script (file path or bundled name)")
    load.add_argument("script")

    roles = sub.add_parser("roles", help="permission policy").add_subparsers(dest="sub", required=True)
    add(roles, "show", help="print the role/action matrix")

    serve = add(sub, "serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8799)
    serve.add_argument("--tokens", default=None, metavar="FILE",
                       help="token file (default: <store>/tokens.json)")

    return parser


def _norm_dir(args: argparse.Namespace) -> Path:
    return Path(args.norm_dir) if args.norm_dir else Path(args.store) / "norms"


def _workspace(args: argparse.Namespace) -> Workspace:
    return Workspace(args.store, norm_dir=_norm_dir(args))


def _print_json(payload: Any) -> None:
    print(canonical_dumps(payload))


def _require_format(args: argparse.Namespace, *allowed: str) -> None:
    if args.format not in allowed:
        raise UsageError(f"--format {args.format} is not supported here (use {', '.join(allowed)})")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def cmd_norm(args: argparse.Namespace) -> int:
    if args.sub == "validate":
        template = load_norm_template_file(args.file)
        if args.format == "json":
            _print_json({"norm_id": template.norm_id, "valid": True})
        else:
            print(f"OK: {args.file} defines norm {template.norm_id!r} "
                  f"({len(template.process_templates)} processes, "
                  f"{len(template.objectives)} objectives)")
        return 0
    registry = build_registry(_norm_dir(args))
    if args.sub == "list":
        _require_format(args, "human", "json")
        rows = [{"norm_id": t.norm_id, "title": t.title} for t in registry.templates()]
        if args.format == "json":
            _print_json({"norms": rows})
        else:
            for row in rows:
                print(f"{row['norm_id']:24s} {row['title']}")
        return 0
    if args.sub == "show":
        _require_format(args, "human", "json")
        template = registry.get(args.norm_id)
        if args.format == "json":
            _print_json(template_to_dict(template))
        else:
            print(f"{template.norm_id}: {template.title}")
            print(f"levels: {', '.join(lv.symbol for lv in template.assurance_levels)}")
            for pt in template.process_templates:
                print(f"  process {pt.process_id} ({pt.name}): "
                      f"{len(pt.checklist_template.questions)} questions, "
                      f"expects {', '.join(pt.expected_document_kinds) or 'no documents'}")
        return 0
    raise UsageError(f"unknown norm subcommand {args.sub!r}")


def cmd_project(args: argparse.Namespace) -> int:
    ws = _workspace(args)
    if args.sub == "create":
        from .project import ProjectParameterization

        try:
            raw = json.loads(Path(args.params).read_text(encoding="utf-8"))
        except OSError as exc:
            raise StorageFailure(f"cannot read {args.params}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.params} is not valid JSON: line {exc.lineno}: {exc.msg}") from exc
        params = ProjectParameterization.from_dict(raw)
        mutation, record = ws.store.create_project(args.actor, params)
        report = cc_check(mutation.project)
        if args.format == "json":
            _print_json({"project": mutation.project.summary(), "sequence": record.sequence,
                         "report": report.to_dict()})
        else:
            print(f"created project {params.project_id} "
                  f"({len(mutation.project.processes)} processes, "
                  f"{len(mutation.project.all_items())} configuration items); "
                  f"status {report.project_status.value}")
        return 0
    if args.sub == "status":
        _require_format(args, "human", "json")
        project = ws.store.get(args.project_id)
        report = cc_check(project)
        if args.format == "json":
            _print_json(report.to_dict())
        else:
            print(f"project {report.project_id}: {report.project_status.value}")
            for row in view_project_status(project):
                print(f"  {row['process_id']:32s} {row['process_status']:10s} "
                      f"pending reasons: {row['pending_count']}")
        return 0
    if args.sub == "metrics":
        project = ws.store.get(args.project_id)
        metrics = nonconformity_metrics(project)
        if args.format == "csv":
            sys.stdout.write(metrics.to_csv())
        elif args.format == "json":
            _print_json(metrics.to_dict())
        else:
            print(f"{'process':32s} {'opened':>7s} {'resolved':>9s} {'closed':>7s} {'open':>6s}")
            for row in metrics.per_process:
                print(f"{row.process_id:32s} {row.opened:7d} {row.resolved:9d} "
                      f"{row.closed:7d} {row.still_open:6d}")
            t = metrics.totals
            print(f"{'TOTAL':32s} {t.opened:7d} {t.resolved:9d} {t.closed:7d} {t.still_open:6d}")
        return 0
    if args.sub == "list":
        _require_format(args, "human", "json")
        rows = []
        for project_id in ws.store.project_ids():
            project = ws.store.get(project_id)
            rows.append({**project.summary(),
                         "project_status": cc_check(project).project_status.value})
        if args.format == "json":
            _print_json({"projects": rows})
        else:
            for row in rows:
                print(f"{row['project_id']:32s} {row['norm_ref']:16s} {row['assurance_level']:4s} "
                      f"{row['project_status']}")
        return 0
    raise UsageError(f"unknown project subcommand {args.sub!r}")


def cmd_item(args: argparse.Namespace) -> int:
    ws = _workspace(args)
    mutation, record = ws.store.register_item(
        args.actor, args.project_id, args.process, args.spec, args.title, args.version,
        item_id=args.item_id,
    )
    if args.format == "json":
        _print_json({"item": mutation.result.to_dict(), "sequence": record.sequence})
    else:
        print(f"registered item {mutation.result.item_id} under process {args.process}")
    return 0


def cmd_checklist(args: argparse.Namespace) -> int:
    ws = _workspace(args)
    answer = Answer(value=AnswerValue(args.value), justification=args.justification)
    mutation, record = ws.store.answer_checklist(args.actor, args.project_id, args.checklist_id,
                                                 args.question_id, answer)
    report = cc_check(mutation.project)
    if args.format == "json":
        _print_json({"checklist": mutation.result.to_dict(), "sequence": record.sequence,
                     "project_status": report.project_status.value})
    else:
        print(f"{args.checklist_id} {args.question_id} = {args.value}; "
              f"project status {report.project_status.value}")
    return 0


def cmd_obs(args: argparse.Namespace) -> int:
    ws = _workspace(args)
    if args.sub == "open":
        mutation, record = ws.store.open_observation(args.actor, args.project_id, args.item_id,
                                                     args.text)
        if args.format == "json":
            _print_json({"observation": mutation.result.to_dict(), "sequence": record.sequence})
        else:
            print(f"opened {mutation.result.observation_id} on {args.item_id}")
        return 0
    if args.sub == "transition":
        mutation, record = ws.store.transition_observation(
            args.actor, args.project_id, args.observation_id, ObservationState(args.to_state),
            args.comment,
        )
        report = cc_check(mutation.project)
        if args.format == "json":
            _print_json({"observation": mutation.result.to_dict(), "sequence": record.sequence,
                         "project_status": report.project_status.value})
        else:
            print(f"{args.observation_id} -> {args.to_state}; "
                  f"project status {report.project_status.value}")
        return 0
    if args.sub == "list":
        _require_format(args, "human", "json")
        project = ws.store.get(args.project_id)
        rows = view_observations(project, args.item_id)
        if args.format == "json":
            _print_json({"observations": rows})
        else:
            if not rows:
                print(f"no observations on {args.item_id}")
            for row in rows:
                print(f"{row['observation_id']:10s} {row['state']:9s} {row['text']}")
        return 0
    raise UsageError(f"unknown obs subcommand {args.sub!r}")


def cmd_evidence(args: argparse.Namespace) -> int:
    ws = _workspace(args)
    manifest = ws.store.export_evidence(args.project_id, args.out, up_to_sequence=args.up_to)
    if args.format == "json":
        _print_json({"manifest": manifest, "path": str(args.out)})
    else:
        print(f"wrote {args.out}: {manifest['record_count']} records, "
              f"chain head {manifest['chain_head_hash'][:16]}...")
    return 0


def cmd_fixtures(args: argparse.Namespace) -> int:
    ws = _workspace(args)
    if args.script in fixtures.BUNDLED_SCRIPTS and not Path(args.script).exists():
        script = fixtures.bundled_script(args.script)
    else:
        script = load_script_file(args.script)
    summary = ws.run_script(script, default_actor=args.actor)
    if args.format == "json":
        _print_json(summary)
    else:
        print(f"loaded {summary['commands']} commands -> {summary['events']} events; "
              f"projects: {', '.join(summary['projects']) or '(none created)'}")
    return 0


def cmd_roles(args: argparse.Namespace) -> int:
    rows = matrix_rows()
    if args.format == "csv":
        sys.stdout.write("role,action,allowed\r\n")
        for row in rows:
            sys.stdout.write(f"{row['role']},{row['action']},{row['allowed']}\r\n")
    elif args.format == "json":
        grouped: dict[str, list[str]] = {}
        for row in rows:
            if row["allowed"] == "yes":
                grouped.setdefault(row["role"], []).append(row["action"])
        _print_json({"roles": grouped})
    else:
        actions = sorted({row["action"] for row in rows})
        width = max(len(a) for a in actions) + 2
        roles = [r.value for r in Role]
        print(" " * width + "  ".join(f"{r[:12]:>12s}" for r in roles))
        allowed = {(row["role"], row["action"]): row["allowed"] for row in rows}
        for action in actions:
            marks = "  ".join(f"{'yes' if allowed[(r, action)] == 'yes' else '-':>12s}" for r in roles)
            print(f"{action:{width}s}{marks}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import ApiService, AuthConfig

    tokens_path = Path(args.tokens) if args.tokens else Path(args.store) / "tokens.json"
    if not tokens_path.exists():
        raise StorageFailure(
            f"token file {tokens_path} not found; create one (see the demo token file shipped "
            f"with the package) or pass --tokens"
        )
    auth = AuthConfig.from_file(tokens_path)
    ws = _workspace(args)
    try:
        service = ApiService(ws, auth, host=args.host, port=args.port)
    except OSError as exc:
        raise StorageFailure(f"cannot bind {args.host}:{args.port}: {exc}") from exc
    print(f"serving on {service.base_url} (store: {args.store})")
    try:
        service.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


_COMMANDS = {
    "norm": cmd_norm,
    "project": cmd_project,
    "item": cmd_item,
    "checklist": cmd_checklist,
    "obs": cmd_obs,
    "evidence": cmd_evidence,
    "fixtures": cmd_fixtures,
    "roles": cmd_roles,
    "serve": cmd_serve,
}


_GLOBAL_DEFAULTS = {"store": "verimon-store", "norm_dir": None, "format": "human", "actor": "admin"}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in _GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except VerimonError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
