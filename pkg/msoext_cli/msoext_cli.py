#!/usr/bin/env python3
"""
msoext CLI - decide MSO formulas with global and local cardinality constraints.

Commands:
1. solve   - dispatch an instance to the nd, treewidth or oracle path
2. oracle  - brute-force an instance and compare with the main path
3. gen     - write benchmark instances from the problem encoders
4. decomp  - emit neighborhood or tree decompositions
5. config  - show and change persisted solver limits

Exit codes: 0 SAT, 1 UNSAT, 2 input error, 3 resource limit, 4 unsupported.
"""

import functools
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import click

from . import __version__, config_dir as default_config_dir
from .core.graph import check_decomposition, nd_decomposition, read_graph, relabel_by_types, type_graph, write_graph
from .core.treedecomp import (
    check_tree_decomposition, heuristic_tree_decomposition, make_nice, read_td, write_td,
)
from .logic.constraints import IntervalSet
from .logic.instance import Fragment, Instance, format_instance, read_instance, write_instance
from .problems.encoders import (
    encode_balanced_partitioning, encode_capacitated_dominating_set, encode_domination_family,
    encode_equitable_coloring, encode_equitable_connected_partition, encode_graph_motif,
)
from .problems.reductions import (
    build_clique_gadget, encode_lcc_subset, format_set_multicover, gadget_cover, lcc_from_instance,
    lcc_to_msog, lcc_to_set_multicover, random_multicolored_clique,
)
from .solver_operations import PARAMETERS, SolverOperations
from .tw.solver import BACKENDS
from .utils.config_manager import LIMIT_KEYS, ConfigManager
from .utils.debug_logger import debug_log, debug_step
from .utils.exceptions import MSOError, ResourceLimit, UnsupportedError, ValidationError
from .utils.logger import get_logger, log_crash, setup_logging
from .utils.validators import GENERATORS, validate_generator

logger = logging.getLogger(__name__)

EXIT_SAT = 0
EXIT_UNSAT = 1
EXIT_INPUT = 2
EXIT_LIMIT = 3
EXIT_UNSUPPORTED = 4

VERDICT_COMMANDS = ("solve", "oracle")


def exit_code_for(error: Exception) -> int:
    if isinstance(error, ResourceLimit):
        return EXIT_LIMIT
    if isinstance(error, UnsupportedError):
        return EXIT_UNSUPPORTED
    return EXIT_INPUT


def handle_errors(command: str) -> Callable:
    """Run a command body returning an exit code; map failures to exit codes and log the run."""
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(ctx: click.Context, *args, **kwargs):
            start = time.perf_counter()
            verdict = ""
            try:
                code = func(ctx, *args, **kwargs)
                if command in VERDICT_COMMANDS:
                    verdict = {EXIT_SAT: "SAT", EXIT_UNSAT: "UNSAT"}.get(code, "")
            except MSOError as e:
                code = exit_code_for(e)
                click.echo(click.style(f"✗ {type(e).__name__}: {e}", fg='red'), err=True)
                get_logger().log_error(e, context=command)
            except OSError as e:
                code = EXIT_INPUT
                click.echo(click.style(f"✗ {e}", fg='red'), err=True)
                get_logger().log_error(e, context=command)
            except Exception as e:
                code = EXIT_INPUT
                log_crash(e, context=command)
                click.echo(click.style(f"✗ Internal error: {e}", fg='red'), err=True)
            duration = time.perf_counter() - start
            get_logger().log_command_execution(command, sys.argv[1:], code in (EXIT_SAT, EXIT_UNSAT),
                                               duration, verdict)
            ctx.exit(code)
        return wrapper
    return decorator


def emit(text: str, out: Optional[str]) -> None:
    """Write ``text`` to ``out`` or stdout."""
    if out:
        Path(out).write_text(text)
        click.echo(click.style(f"✓ Wrote {out}", fg='green'), err=True)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def emit_json(data: Any, out: Optional[str] = None) -> None:
    emit(json.dumps(data, indent=2, sort_keys=True) + "\n", out)


def emit_instance(inst: Instance, out: Optional[str]) -> None:
    if out:
        write_instance(inst, out)
        click.echo(click.style(f"✓ Wrote {out}", fg='green'), err=True)
    else:
        emit(format_instance(inst), None)


@click.group()
@click.option('--config-dir', default=str(default_config_dir),
              help='Configuration directory for config.json and logs (default: ~/.msoext)')
@click.option('--debug', is_flag=True, help='Enable debug logging')
@click.version_option(__version__, prog_name='msoext')
@click.pass_context
def cli(ctx: click.Context, config_dir: str, debug: bool):
    """
    msoext - model checking MSO with cardinality constraints

    Examples:
        msoext solve --param nd --fragment gl-lin inst.msoi
        msoext solve --param tw inst.msoi --emit-csp dump.csp
        msoext gen clique-lcc --k 3 --n 2 --planted --out gadget.msoi
        msoext decomp --nd graph.gr
    """
    ctx.ensure_object(dict)
    config_path = Path(config_dir).expanduser().resolve()
    config_path.mkdir(parents=True, exist_ok=True)

    solver_logger = setup_logging(str(config_path), "DEBUG" if debug else "INFO")
    ctx.call_on_close(solver_logger.cleanup)
    solver_logger.app_logger.debug(f"Config directory: {config_path}")

    ctx.obj['DEBUG'] = debug
    ctx.obj['CONFIG'] = ConfigManager(config_path)


# ----------------------------------------------------------------------------
# solve / oracle
# ----------------------------------------------------------------------------

def limit_options(func: Callable) -> Callable:
    for name, help_text in reversed([
        ('--max-shapes', 'Cap on shapes enumerated by the FPT solver'),
        ('--max-sigma', 'Cap on extended numerical assignments visited by the XP solver'),
        ('--max-table', 'Cap on CSP relation and DP table sizes'),
        ('--mc-work-cap', 'Cap on model-checking work per formula'),
        ('--brute-force-cap', 'Largest l*n the brute-force paths accept'),
    ]):
        func = click.option(name, type=click.IntRange(min=1), default=None, help=help_text)(func)
    return func


def resolve_limits(ctx: click.Context, **flags: Optional[int]):
    """Flag over config file over built-in default."""
    return ctx.obj['CONFIG'].limits().override(**flags)


def status_line(verdict: str, path: str, extra: str = "") -> None:
    color = 'green' if verdict == "SAT" else 'yellow'
    mark = "✓" if verdict == "SAT" else "✗"
    click.echo(click.style(f"{mark} {verdict} via {path}{extra}", fg=color), err=True)


@debug_step("Loading instance")
def load_instance(ctx: click.Context, path: str) -> Instance:
    return read_instance(path)


@cli.command()
@click.argument('instance', type=click.Path(exists=True, dir_okay=False))
@click.option('--param', type=click.Choice(PARAMETERS), default='auto', show_default=True,
              help='Structural parameter whose algorithm runs')
@click.option('--fragment', default=None, help='Fragment to check the instance against (e.g. gl-lin)')
@click.option('--oracle', is_flag=True, help='Force the brute-force oracle')
@click.option('--backend', type=click.Choice(BACKENDS), default=None,
              help='Treewidth predicate backend (default from config)')
@click.option('--td', 'td_path', type=click.Path(exists=True, dir_okay=False),
              help='Tree decomposition file for the treewidth path')
@click.option('--emit-csp', type=click.Path(dir_okay=False), default=None,
              help='Write the assembled CSP of the treewidth path')
@click.option('--fair', type=click.IntRange(min=1), default=None,
              help='Minimize max_v |N(v) & X_i| for this 1-based variable')
@click.option('--jobs', type=click.IntRange(min=1), default=1, show_default=True,
              help='Worker threads across pre-evaluations')
@click.option('--timings', is_flag=True, help='Include per-phase timings in the report')
@click.option('--output', '-o', type=click.Path(dir_okay=False), default=None, help='Write the report here')
@limit_options
@click.pass_context
@handle_errors("solve")
@debug_log
def solve(ctx: click.Context, instance: str, param: str, fragment: Optional[str], oracle: bool,
          backend: Optional[str], td_path: Optional[str], emit_csp: Optional[str], fair: Optional[int],
          jobs: int, timings: bool, output: Optional[str], **flags: Optional[int]) -> int:
    """Decide INSTANCE; the witness is re-verified before the report is written."""
    inst = load_instance(ctx, instance)
    limits = resolve_limits(ctx, **flags)
    ntd = None
    if td_path:
        td = read_td(td_path)
        problem = check_tree_decomposition(inst.graph, td)
        if problem:
            raise ValidationError(f"Tree decomposition {td_path}: {problem}")
        ntd = make_nice(inst.graph, td)
    ops = SolverOperations(inst, limits, backend or ctx.obj['CONFIG'].get_backend(), jobs, ntd)
    tag = Fragment.parse(fragment) if fragment else None
    report = ops.solve(param, tag, oracle, emit_csp, fair)

    extra = f", weight {report.weight}" if report.weight is not None else ""
    if report.fair is not None:
        extra += f", fair value {report.fair}"
    status_line(report.verdict, report.path, extra)
    emit(report.to_json(timings) + "\n", output)
    return EXIT_SAT if report.verdict == "SAT" else EXIT_UNSAT


@cli.command()
@click.argument('instance', type=click.Path(exists=True, dir_okay=False))
@click.option('--compare/--no-compare', default=True, show_default=True,
              help='Also run the automatically chosen solver path and compare')
@click.option('--param', type=click.Choice(PARAMETERS), default='auto', show_default=True)
@limit_options
@click.pass_context
@handle_errors("oracle")
@debug_log
def oracle(ctx: click.Context, instance: str, compare: bool, param: str, **flags: Optional[int]) -> int:
    """Brute-force INSTANCE, optionally checking the main path agrees on verdict and weight."""
    inst = load_instance(ctx, instance)
    limits = resolve_limits(ctx, **flags)
    backend = ctx.obj['CONFIG'].get_backend()
    reference = SolverOperations(inst, limits, backend).solve(oracle=True)
    out: Dict[str, Any] = {"oracle": reference.as_dict()}
    agree = True
    if compare:
        main = SolverOperations(inst, limits, backend).solve(param)
        agree = main.verdict == reference.verdict and main.weight == reference.weight
        out["main"] = main.as_dict()
        out["agree"] = agree
    status_line(reference.verdict, "oracle", "" if agree else " (main path disagrees)")
    emit_json(out)
    if not agree:
        logger.error(f"Oracle and main path disagree on {instance}")
        return EXIT_INPUT
    return EXIT_SAT if reference.verdict == "SAT" else EXIT_UNSAT


# ----------------------------------------------------------------------------
# gen
# ----------------------------------------------------------------------------

def int_list(text: Optional[str], what: str) -> Optional[List[int]]:
    if text is None:
        return None
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"{what} must be a comma-separated list of integers, got '{text}'")


def require(value: Any, option: str, generator: str) -> Any:
    if value is None:
        raise ValidationError(f"Generator '{generator}' needs {option}")
    return value


def write_sidecar(out: str, payload: Dict[str, Any]) -> Path:
    path = Path(f"{out}.witness.json")
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def domination_params(kind: str, n: int, opts: Dict[str, Any]) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    if opts['demands'] is not None:
        params['demands'] = int_list(opts['demands'], '--demands')
    if opts['capacities'] is not None:
        params['capacities'] = int_list(opts['capacities'], '--capacities')
    if opts['sigma'] is not None:
        params['sigma'] = IntervalSet.parse(opts['sigma'])
    if opts['rho'] is not None:
        params['rho'] = IntervalSet.parse(opts['rho'])
    if opts['degrees'] is not None:
        params['degrees'] = [IntervalSet.parse(opts['degrees'])] * n
    if opts['bound'] is not None:
        params['bound'] = opts['bound']
    if opts['minimize']:
        params['minimize'] = True
    return params


@cli.command()
@click.argument('generator', type=click.Choice(GENERATORS))
@click.option('--graph', 'graph_path', type=click.Path(exists=True, dir_okay=False), help='Input graph file')
@click.option('--from', 'from_path', type=click.Path(exists=True, dir_okay=False),
              help='LCC subset instance (multicover)')
@click.option('--k', type=click.IntRange(min=1), default=None, help='Number of parts or colors')
@click.option('--n', type=click.IntRange(min=1), default=None, help='Vertices per color class (clique-lcc)')
@click.option('--m', type=click.IntRange(min=0), default=None, help='Edges per class pair (clique-lcc)')
@click.option('--planted', is_flag=True, help='Plant a multicolored clique and write a witness sidecar')
@click.option('--msog', is_flag=True, help='Emit the marker-clique global-constraint form (clique-lcc)')
@click.option('--seed', type=int, default=None, help='Generator seed (default: $MSOEXT_SEED or 0)')
@click.option('--capacities', default=None, help='Comma-separated capacities')
@click.option('--capacity', type=click.IntRange(min=0), default=None, help='Uniform capacity')
@click.option('--demands', default=None, help='Comma-separated demands (VectorDominatingSet)')
@click.option('--kind', default=None, help='Domination family member')
@click.option('--sigma', default=None, help='Interval list for vertices in D')
@click.option('--rho', default=None, help='Interval list for vertices outside D')
@click.option('--degrees', default=None, help='Interval list of admissible degrees (GeneralFactor)')
@click.option('--bound', type=click.IntRange(min=0), default=None, help='Outdegree bound (MinMaxOutdegree)')
@click.option('--minimize', is_flag=True, help='Minimize |D| (GeneralizedDomination)')
@click.option('--motif', default=None, help='Comma-separated motif colors')
@click.option('--out', default=None, type=click.Path(dir_okay=False), help='Output file (default: stdout)')
@click.pass_context
@handle_errors("gen")
@debug_log
def gen(ctx: click.Context, generator: str, graph_path: Optional[str], from_path: Optional[str],
        k: Optional[int], n: Optional[int], m: Optional[int], planted: bool, msog: bool, seed: Optional[int],
        out: Optional[str], **opts: Any) -> int:
    """Write a GENERATOR instance; planted instances get OUT.witness.json."""
    validate_generator(generator)
    seed = ConfigManager.get_seed() if seed is None else seed

    if generator == "clique-lcc":
        k, n = require(k, "--k", generator), require(n, "--n", generator)
        m = n if m is None else m
        mc, clique = random_multicolored_clique(k, n, m, planted, seed)
        gadget = build_clique_gadget(mc)
        lcc = gadget.lcc
        inst = lcc_to_msog(lcc) if msog else encode_lcc_subset(lcc)
        emit_instance(inst, out)
        if planted:
            chosen = gadget.witness(clique)
            if msog:
                sets = [chosen] + [lcc.graph.neighbor_set(c) & chosen for c in sorted(gadget_cover(lcc))]
            else:
                sets = [chosen]
            payload = {"seed": seed, "clique": [v + 1 for v in clique],
                       "witness": [sorted(v + 1 for v in s) for s in sets]}
            if out:
                click.echo(click.style(f"✓ Wrote {write_sidecar(out, payload)}", fg='green'), err=True)
            else:
                logger.warning("Planted witness not written: --out is required for the sidecar")
        return EXIT_SAT

    if generator == "multicover":
        lcc = lcc_from_instance(read_instance(require(from_path, "--from", generator)))
        family = lcc_to_set_multicover(lcc)
        emit("\n".join(f"c r={smc.r}\n" + format_set_multicover(smc) for smc in family), out)
        return EXIT_SAT

    g = read_graph(require(graph_path, "--graph", generator))
    if generator == "equitable":
        inst = encode_equitable_coloring(g, require(k, "--k", generator))
    elif generator == "equitable-connected":
        inst = encode_equitable_connected_partition(g, require(k, "--k", generator))
    elif generator == "balanced":
        inst = encode_balanced_partitioning(g, require(k, "--k", generator))
    elif generator == "capacitated-ds":
        caps = int_list(opts['capacities'], '--capacities')
        if caps is None:
            caps = [require(opts['capacity'], "--capacity or --capacities", generator)] * g.n
        inst = encode_capacitated_dominating_set(g, caps)
    elif generator == "domination":
        kind = require(opts['kind'], "--kind", generator)
        inst = encode_domination_family(kind, g, domination_params(kind, g.n, opts))
    else:
        motif = [c.strip() for c in require(opts['motif'], "--motif", generator).split(",") if c.strip()]
        inst = encode_graph_motif(g, motif)
    emit_instance(inst, out)
    return EXIT_SAT


# ----------------------------------------------------------------------------
# decomp
# ----------------------------------------------------------------------------

@cli.command()
@click.argument('graph', type=click.Path(exists=True, dir_okay=False))
@click.option('--nd', 'mode', flag_value='nd', help='Neighborhood decomposition and type graph')
@click.option('--tw', 'mode', flag_value='tw', help='Tree decomposition')
@click.option('--nice', is_flag=True, help='Make the tree decomposition nice')
@click.option('--exact', is_flag=True, default=False, help='Exact treewidth on small graphs')
@click.option('--out', default=None, type=click.Path(dir_okay=False),
              help='Tree decomposition file (--tw) or relabelled graph (--nd)')
@click.pass_context
@handle_errors("decomp")
@debug_log
def decomp(ctx: click.Context, graph: str, mode: Optional[str], nice: bool, exact: bool,
           out: Optional[str]) -> int:
    """Decompose GRAPH; the emitted decomposition is re-validated first."""
    if mode is None:
        raise ValidationError("Choose --nd or --tw")
    g = read_graph(graph)
    if mode == 'nd':
        nd = nd_decomposition(g)
        problem = check_decomposition(g, nd)
        if problem:
            raise ValidationError(f"Neighborhood decomposition invalid: {problem}")
        tg = type_graph(g, nd)
        if out:
            relabelled, _, _ = relabel_by_types(g, nd)
            write_graph(relabelled, out)
        emit_json({
            "nu": nd.nu,
            "types": [[v + 1 for v in members] for members in nd.types],
            "kinds": [kind.value for kind in nd.kinds],
            "type_edges": sorted([i + 1, j + 1] for i, j in tg.edges),
            "loops": sorted(j + 1 for j in tg.loops),
        })
        return EXIT_SAT

    limits = ctx.obj['CONFIG'].limits()
    td = heuristic_tree_decomposition(g, exact=exact, exact_limit=limits.exact_tw_limit)
    if nice:
        td = make_nice(g, td)
        problem = td.check_nice()
        if problem:
            raise ValidationError(f"Nice decomposition invalid: {problem}")
    problem = check_tree_decomposition(g, td)
    if problem:
        raise ValidationError(f"Tree decomposition invalid: {problem}")
    if out:
        write_td(td, g.n, out)
    emit_json({
        "width": td.width,
        "nodes": td.size,
        "nice": nice,
        "bags": [sorted(v + 1 for v in bag) for bag in td.bags],
        "tree_edges": [[p + 1, a + 1] for p, a in td.tree_edges()],
    })
    return EXIT_SAT


# ----------------------------------------------------------------------------
# config
# ----------------------------------------------------------------------------

@cli.group()
def config():
    """Show or change persisted solver limits."""


@config.command('show')
@click.pass_context
def config_show(ctx: click.Context):
    emit_json(ctx.obj['CONFIG'].config)


@config.command('set')
@click.argument('key', type=click.Choice(list(LIMIT_KEYS) + ['backend']))
@click.argument('value')
@click.pass_context
@handle_errors("config")
def config_set(ctx: click.Context, key: str, value: str) -> int:
    """Persist KEY = VALUE."""
    if key != 'backend':
        try:
            value = int(value)
        except ValueError:
            raise ValidationError(f"{key} must be an integer")
    ctx.obj['CONFIG'].set(key, value)
    click.echo(click.style(f"✓ {key} = {value}", fg='green'), err=True)
    return EXIT_SAT


@config.command('reset')
@click.pass_context
def config_reset(ctx: click.Context):
    ctx.obj['CONFIG'].reset()
    click.echo(click.style("✓ Configuration reset", fg='green'), err=True)


def main():
    """Console entry point."""
    cli(obj={})


if __name__ == '__main__':
    main()
