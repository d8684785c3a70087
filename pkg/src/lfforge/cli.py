"""The `forge` command line: tool generation, rendering, validation,
the HTTP service, and scripted offline replays."""

from __future__ import annotations

import json
import sys
import tempfile
from importlib import resources
from pathlib import Path

import click

from .diagram import render_json, render_svg, synthesize
from .gateway import (
    GatewayConfig,
    GatewayError,
    OpenAiGateway,
    ScriptedMockGateway,
    ScriptMismatchError,
)
from .grammar import parse_grammar
from .layout import layout
from .lf.parser import parse_model
from .lf.validator import validate
from .orchestrator import Orchestrator, SessionStore
from .toolgen import ToolgenError, generate_all, load_tool_files, write_tool_files
from .tools import ToolRegistry, build_registry

FIXTURE_GRAMMAR = "linguafranca-subset.fg"


def _print_diagnostics(diagnostics, stream=None) -> None:
    for d in diagnostics:
        click.echo(
            f"{d.severity} {d.code} [{d.span.line}:{d.span.col}] {d.message}",
            err=stream is sys.stderr,
        )


def _load_grammar_text(grammar_path: Path | None) -> str:
    if grammar_path is not None:
        return grammar_path.read_text(encoding="utf-8")
    return (resources.files("lfforge") / "fixtures" / FIXTURE_GRAMMAR).read_text(encoding="utf-8")


def _registry_from_grammar(grammar_path: Path | None) -> ToolRegistry:
    text = _load_grammar_text(grammar_path)
    result = parse_grammar(text)
    if not result.ok:
        _print_diagnostics(result.diagnostics, sys.stderr)
        raise click.ClickException("grammar does not parse")
    report = generate_all(result.grammar)
    for rule_name, reason in report.errors:
        click.echo(f"warning: skipping rule {rule_name}: {reason}", err=True)
    return build_registry(report.pairs)


@click.group()
def main() -> None:
    """Modeling workbench for a Lingua Franca subset."""


@main.command()
@click.argument("grammar", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False, path_type=Path),
              default=Path("."), help="Directory for tools.json and templates.json.")
def toolgen(grammar: Path, out_dir: Path) -> None:
    """Generate tool definitions and syntax templates from a grammar file."""
    result = parse_grammar(grammar.read_text(encoding="utf-8"))
    if not result.ok:
        _print_diagnostics(result.diagnostics, sys.stderr)
        raise SystemExit(1)
    try:
        report = generate_all(result.grammar)
    except ToolgenError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(1)
    for rule_name, reason in report.errors:
        click.echo(f"warning: rule {rule_name} not generated: {reason}", err=True)
    tools_path, templates_path = write_tool_files(report, out_dir)
    click.echo(f"wrote {tools_path} ({len(report.pairs)} tools) and {templates_path}")


@main.command()
@click.argument("model", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("-o", "--out", "out_path", type=click.Path(dir_okay=False, path_type=Path),
              required=True)
@click.option("--format", "fmt", type=click.Choice(["svg", "json"]), default="svg")
def render(model: Path, out_path: Path, fmt: str) -> None:
    """Render a model file to an SVG diagram or a JSON render spec."""
    result = parse_model(model.read_text(encoding="utf-8"))
    if not result.ok:
        _print_diagnostics(result.diagnostics, sys.stderr)
        raise SystemExit(1)
    laid_out = layout(synthesize(result.model))
    text = render_svg(laid_out) if fmt == "svg" else render_json(laid_out)
    out_path.write_text(text, encoding="utf-8", newline="\n")
    click.echo(f"wrote {out_path}")


@main.command("validate")
@click.argument("model", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def validate_cmd(model: Path) -> None:
    """Parse and validate a model file; prints diagnostics as JSON."""
    result = parse_model(model.read_text(encoding="utf-8"))
    diagnostics = result.diagnostics if not result.ok else validate(result.model)
    click.echo(json.dumps([d.to_json() for d in diagnostics], indent=2))
    if any(d.severity == "error" for d in diagnostics):
        raise SystemExit(1)


@main.command()
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--tools", "tools_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help="tools.json (with templates.json beside it); "
              "defaults to tools generated from the bundled grammar.")
@click.option("--mock", "mock_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help="Scripted gateway instead of a live endpoint.")
@click.option("--ui-dir", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.option("--cors-origin", "cors_origins", multiple=True)
@click.option("--api-key", envvar="FORGE_API_KEY", default="")
@click.option("--base-url", envvar="FORGE_BASE_URL", default="https://api.openai.com/v1")
@click.option("--chat-model", envvar="FORGE_CHAT_MODEL", default="o4-mini")
@click.option("--transcribe-model", envvar="FORGE_TRANSCRIBE_MODEL", default="whisper-1")
def serve(
    port: int,
    host: str,
    data_dir: Path,
    tools_path: Path | None,
    mock_path: Path | None,
    ui_dir: Path | None,
    cors_origins: tuple[str, ...],
    api_key: str,
    base_url: str,
    chat_model: str,
    transcribe_model: str,
) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    if tools_path is not None:
        templates_path = tools_path.with_name("templates.json")
        try:
            pairs = load_tool_files(tools_path, templates_path)
        except (OSError, json.JSONDecodeError, KeyError, ToolgenError) as exc:
            raise click.ClickException(f"cannot load tools from {tools_path}: {exc}")
        registry = build_registry(pairs)
    else:
        registry = _registry_from_grammar(None)

    if mock_path is not None:
        gateway = ScriptedMockGateway.from_file(mock_path)
    else:
        gateway = OpenAiGateway(
            GatewayConfig(
                base_url=base_url,
                api_key=api_key,
                chat_model=chat_model,
                transcription_model=transcribe_model,
            )
        )
    orchestrator = Orchestrator(SessionStore(data_dir), gateway, registry)
    app = create_app(orchestrator, ui_dir=ui_dir, cors_origins=list(cors_origins) or None)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--mock", "mock_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--prompts", "prompts_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Where session state and diagram artifacts go (default: temp dir).")
@click.option("--grammar", "grammar_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
def repl(
    mock_path: Path,
    prompts_path: Path,
    data_dir: Path | None,
    grammar_path: Path | None,
) -> None:
    """Replay a scripted session: one prompt per line against a mock gateway."""
    if data_dir is None:
        data_dir = Path(tempfile.mkdtemp(prefix="forge-repl-"))
        click.echo(f"artifacts in {data_dir}")
    registry = _registry_from_grammar(grammar_path)
    gateway = ScriptedMockGateway.from_file(mock_path)
    orchestrator = Orchestrator(SessionStore(data_dir), gateway, registry)
    session = orchestrator.create_session()
    prompts = [line.strip() for line in prompts_path.read_text(encoding="utf-8").splitlines()]
    prompts = [p for p in prompts if p and not p.startswith("#")]

    failed = False
    for i, prompt in enumerate(prompts, 1):
        click.echo(f"\n[{i}] > {prompt}")
        try:
            turn = orchestrator.submit_prompt(session, prompt)
        except ScriptMismatchError as exc:
            click.echo(f"script mismatch:\n{exc}", err=True)
            raise SystemExit(1)
        except GatewayError as exc:
            click.echo(f"gateway error: {exc}", err=True)
            raise SystemExit(1)
        if turn.failed:
            click.echo(f"turn failed: {turn.error}", err=True)
            failed = True
            continue
        stages = "  ".join(f"{stage}={ms:.1f}ms" for stage, ms in turn.timings.items())
        click.echo(f"    stages: {stages}")
        errors = [d for d in turn.diagnostics if d.severity == "error"]
        click.echo(
            f"    model {'updated' if turn.model_updated else 'unchanged'}, "
            f"{len(errors)} error(s)"
        )
        for d in turn.diagnostics:
            click.echo(f"      {d.severity} {d.code}: {d.message}")

    click.echo("\nfinal model:")
    click.echo(session.current_model_text.rstrip("\n"))
    final_errors = (
        [d for d in validate(session.current_model) if d.severity == "error"]
        if session.current_model is not None
        else [None]
    )
    if failed or final_errors:
        click.echo("replay finished with errors", err=True)
        raise SystemExit(1)
    click.echo(f"\nreplay ok: {len(prompts)} turns, session {session.id}")


if __name__ == "__main__":
    main()
