#!/usr/bin/env python3
"""
upg-kolchin CLI - exact computations with UPG outer automorphisms of free groups.

Reports go to stdout as JSON (default) or text; logs go to stderr.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import typer

from . import __version__
from .config.settings import ConfigManager, ConfigValidationError, OutputFormat, RunConfig
from .core.automorphisms.automorphism import Automorphism
from .core.automorphisms.unipotent_linalg import (fixed_lattice, is_unipotent, is_unitriangular,
                                                  trivial_mod3)
from .core.dynamics.growth_dynamics import (class_key, fit_eventual_polynomial, growth_samples,
                                            limit_length_function)
from .core.kolchin.kolchin_driver import run
from .core.kolchin.representatives import find_triangular
from .core.trees.free_factor import FreeFactorSystem, free_factor_support
from .core.trees.tree_space import free_rose_tree, tree_from_system
from .core.words.subgroup_core import contains, fold as fold_words
from .core.words.word_core import Basis, CyclicWord
from .models.schemas import AutomorphismInput, KolchinInput, parse_input
from .services.system_logger import LogCategory, get_logger, setup_logging
from .utils.error_handler import InputValidationError, KolchinError, handle_cli_errors

SCHEMA_VERSION = "1"

app = typer.Typer(help="Exact computations with UPG outer automorphisms of free groups")
auto_app = typer.Typer(help="Inspect a single automorphism")
config_app = typer.Typer(help="Inspect the effective configuration")
app.add_typer(auto_app, name="auto")
app.add_typer(config_app, name="config")

logger = get_logger()


def _state(ctx: typer.Context) -> Dict[str, Any]:
    return ctx.obj if isinstance(ctx.obj, dict) else {'format': 'json', 'run': RunConfig()}


def _run_config(ctx: typer.Context) -> RunConfig:
    return _state(ctx)['run']


def _text_lines(value: Any, indent: int = 0) -> List[str]:
    pad = "  " * indent
    if isinstance(value, dict):
        lines = []
        for key in sorted(value):
            item = value[key]
            if isinstance(item, (dict, list)) and item:
                lines.append(f"{pad}{key}:")
                lines.extend(_text_lines(item, indent + 1))
            else:
                lines.append(f"{pad}{key}: {item}")
        return lines
    if isinstance(value, list):
        lines = []
        for item in value:
            if isinstance(item, dict):
                lines.append(f"{pad}-")
                lines.extend(_text_lines(item, indent + 1))
            else:
                lines.append(f"{pad}- {item}")
        return lines
    return [f"{pad}{value}"]


def emit(ctx: typer.Context, command: str, payload: Dict[str, Any], log: List[str] = None):
    """Write a report; text mode is derived from the JSON payload"""
    report = {'schema': SCHEMA_VERSION, 'command': command, 'status': 'ok'}
    report.update(payload)
    if _state(ctx)['format'] == 'text':
        for line in log or []:
            typer.echo(line)
        for line in _text_lines(report):
            typer.echo(line)
    else:
        typer.echo(json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False))


def _split(text: str) -> List[str]:
    return [part.strip() for part in text.split(",")]


def _automorphism(rank: Optional[int], images: str, inverse: str) -> Automorphism:
    request = {'images': _split(images), 'inverse_images': _split(inverse)}
    if rank is not None:
        request['rank'] = rank
    return parse_input(AutomorphismInput, request).to_automorphism()


def _infer_rank(rank: Optional[int], words: List[str]) -> int:
    if rank is not None:
        return rank
    letters = [ch.lower() for w in words for ch in w if ch.isalpha()]
    return max((ord(ch) - ord('a') + 1 for ch in letters), default=1)


@app.callback()
def main(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="JSON configuration file"),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING or ERROR"),
    json_logs: bool = typer.Option(False, "--json-logs", help="Structured JSON logs on stderr"),
    format: Optional[OutputFormat] = typer.Option(None, "--format", "-f", help="Report format"),
):
    """Exact computations with UPG outer automorphisms of free groups."""
    manager = ConfigManager(config_file=str(config) if config else None)
    try:
        settings = manager.load_config()
    except ConfigValidationError as e:
        typer.echo(f"configuration error: {e}", err=True)
        raise typer.Exit(1)
    setup_logging(log_level or settings.logging.level,
                  json_logs or settings.logging.json_logs, settings.logging.log_file)
    run_config = settings.run
    if format is not None:
        run_config = run_config.with_overrides(output_format=format)
    ctx.obj = {'format': run_config.output_format.value, 'run': run_config, 'manager': manager}
    logger.debug(LogCategory.CLI, 'main', f"upg-kolchin {__version__}",
                 details={'format': run_config.output_format.value})


@app.command()
@handle_cli_errors('fold')
def fold(
    ctx: typer.Context,
    word: List[str] = typer.Option(..., "--word", "-w", help="Generator of the subgroup"),
    rank: Optional[int] = typer.Option(None, "--rank", "-n", help="Rank of the free group"),
    member: List[str] = typer.Option([], "--member", "-m", help="Word to test for membership"),
):
    """Fold generators into the core graph of the subgroup they generate."""
    basis = Basis.standard(_infer_rank(rank, word + member))
    H = fold_words(basis.parse_many(word))
    payload = {'subgroup': H.to_dict(basis)}
    if member:
        payload['membership'] = {w: contains(H, basis.parse(w)).member for w in member}
    emit(ctx, 'fold', payload)


@auto_app.command("check")
@handle_cli_errors('auto check')
def auto_check(
    ctx: typer.Context,
    images: str = typer.Option(..., "--images", "-i", help="Comma separated images of the basis"),
    inverse: str = typer.Option(..., "--inverse", help="Comma separated images under the inverse"),
    rank: Optional[int] = typer.Option(None, "--rank", "-n"),
):
    """Validate an automorphism and report its action on homology."""
    phi = _automorphism(rank, images, inverse)
    M = phi.abelianization()
    unipotent = is_unipotent(M)
    payload = {
        'rank': phi.rank,
        'automorphism': phi.to_dict(),
        'abelianization': [[int(M[i, j]) for j in range(M.cols)] for i in range(M.rows)],
        'unipotent': unipotent,
        'unitriangular': is_unitriangular(M),
        'trivial_mod3': trivial_mod3(M),
        'fixed_lattice_rank': len(fixed_lattice(M)),
    }
    if unipotent:
        try:
            rep = find_triangular(phi, FreeFactorSystem.trivial(phi.rank), _run_config(ctx))
            payload['triangular'] = rep.map.to_dict()
        except KolchinError as e:
            payload['triangular'] = None
            payload['triangular_failure'] = e.code
    emit(ctx, 'auto check', payload)


@app.command()
@handle_cli_errors('growth')
def growth(
    ctx: typer.Context,
    images: str = typer.Option(..., "--images", "-i"),
    inverse: str = typer.Option(..., "--inverse"),
    word: List[str] = typer.Option(..., "--word", "-w", help="Conjugacy class to iterate"),
    rank: Optional[int] = typer.Option(None, "--rank", "-n"),
    window: Optional[int] = typer.Option(None, "--window", help="Number of iterates sampled"),
):
    """Fit ℓ(φ^k(w)) on the unit rose to an eventual polynomial in k."""
    phi = _automorphism(rank, images, inverse)
    config = _run_config(ctx).with_overrides(window=window).for_rank(phi.rank)
    basis = Basis.standard(phi.rank)
    T = free_rose_tree(phi.rank)
    reports = []
    for text in word:
        w = basis.parse(text)
        samples = growth_samples(T, phi, w, config.window)
        fit = fit_eventual_polynomial(samples, config.d_max, config.margin)
        entry = {'query': text}
        entry.update(fit.to_dict())
        reports.append(entry)
    emit(ctx, 'growth', {'rank': phi.rank, 'window': config.window, 'reports': reports})


@app.command()
@handle_cli_errors('limit')
def limit(
    ctx: typer.Context,
    images: str = typer.Option(..., "--images", "-i"),
    inverse: str = typer.Option(..., "--inverse"),
    word: List[str] = typer.Option(..., "--word", "-w", help="Query class"),
    rank: Optional[int] = typer.Option(None, "--rank", "-n"),
    factor: List[str] = typer.Option([], "--factor", help="Comma separated basis of a collapsed free factor"),
):
    """Limit length function of the iterates of T under φ, normalized by the growth degree."""
    phi = _automorphism(rank, images, inverse)
    config = _run_config(ctx).for_rank(phi.rank)
    basis = Basis.standard(phi.rank)
    system = FreeFactorSystem.parse(phi.rank, [_split(f) for f in factor]) if factor \
        else FreeFactorSystem.trivial(phi.rank)
    T = tree_from_system(system)
    rep = find_triangular(phi, system, config)
    queries = basis.parse_many(word)
    result = limit_length_function(T, rep.map, queries, config)
    reports = []
    for text, w in zip(word, queries):
        fit = result.fits.get(class_key(w))
        entry = {'query': text, 'limit': str(result(w))}
        if fit is not None:
            entry.update(fit.to_dict())
        reports.append(entry)
    emit(ctx, 'limit', {'rank': phi.rank, 'tree': T.to_dict(), 'degree': result.degree,
                        'representative': rep.map.to_dict(), 'reports': reports})


@app.command()
@handle_cli_errors('support')
def support(
    ctx: typer.Context,
    word: List[str] = typer.Option(..., "--word", "-w", help="Conjugacy class to carry"),
    rank: Optional[int] = typer.Option(None, "--rank", "-n"),
):
    """Smallest free factor system carrying the given conjugacy classes."""
    n = _infer_rank(rank, word)
    basis = Basis.standard(n)
    config = _run_config(ctx)
    classes = [CyclicWord.of(basis.parse(w)) for w in word]
    system = free_factor_support(classes, n, config.whitehead_depth, config.support_state_cap)
    emit(ctx, 'support', {'rank': n, 'words': list(word), 'support': system.to_dict(basis)})


@app.command()
@handle_cli_errors('kolchin')
def kolchin(
    ctx: typer.Context,
    input_file: Path = typer.Argument(..., help="JSON file with rank, generators and config"),
):
    """Find a common fixed tree and filtered graph for a finite set of UPG automorphisms."""
    try:
        data = json.loads(input_file.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise InputValidationError(f"cannot read {input_file}: {e}")
    job = parse_input(KolchinInput, data)
    config = job.run_config(_run_config(ctx))
    result = run(job.automorphisms(), config, job.initial_system(), job.supplied_maps())
    emit(ctx, 'kolchin', result.to_dict(), log=[r.format() for r in result.history])


@config_app.command("show")
def config_show(ctx: typer.Context):
    """Print the effective configuration."""
    manager = _state(ctx).get('manager') or ConfigManager()
    manager.get_config()
    emit(ctx, 'config show', {'config': manager.export_config()})


def cli():
    app()


if __name__ == "__main__":
    cli()
