"""bootperc command line."""

import os
import secrets
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import click
import numpy as np
import pandas as pd
import typer
import yaml
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from . import __version__
from .beams import al_check, beams_process, decay_experiment, dyadic_scales, enumerate_beams_small, beam_count_bound
from .engine import Boundary, Box, closure, dumps_snapshot, read_snapshot
from .exceptions import BootpercError, NotApplicableError, UsageError
from .family import (
    Family,
    ThresholdFamily,
    classify,
    is_stable_direction,
    load_explicit_family,
    parse_family,
    predicted_order,
    probe_directions,
)
from .growth import alpha_frame, alpha_table, alpha_t, droplet_experiment, find_s_pattern, growth_probability_experiment, pattern_probability_exact
from .models import (
    ClassifyResult,
    Command,
    EstimateResult,
    LcResult,
    OutputFormat,
    RANDOMIZED_COMMANDS,
    RunConfig,
    TraceEntry,
)
from .results import load_config, write_artifact
from .sampler import (
    BernoulliSeeding,
    ProbabilityEstimate,
    bernoulli_grid,
    critical_length,
    percolation_probability,
    sample_configuration,
    scaling_probe,
)
from .utils import get_logger

app = typer.Typer(help="Anisotropic bootstrap percolation toolkit.", add_completion=False)
console = Console()
_logger = get_logger(__name__)


@dataclass
class Outcome:
    summary: str
    payload: Dict[str, Any] = field(default_factory=dict)
    frame: Optional[pd.DataFrame] = None


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _family(config: RunConfig) -> Family:
    if config.family_file:
        return load_explicit_family(config.family_file)
    if config.family:
        return parse_family(config.family)
    raise UsageError("--family (or --family-file) is required")


def _threshold(config: RunConfig) -> ThresholdFamily:
    family = _family(config)
    if not isinstance(family, ThresholdFamily):
        raise NotApplicableError(f"'{config.command.value}' needs a threshold family literal")
    return family


def _need(config: RunConfig, *names: str) -> None:
    missing = [name for name in names if getattr(config, name) is None]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        raise UsageError(f"'{config.command.value}' requires {flags}")


def _estimate_payload(family: Family, estimate: ProbabilityEstimate) -> Dict[str, Any]:
    return EstimateResult(
        family=str(family),
        successes=estimate.successes,
        trials=estimate.trials,
        point=str(estimate.point),
        estimate=float(estimate.point),
        ci=(estimate.ci_low, estimate.ci_high),
        confidence=estimate.confidence,
    ).model_dump(mode="json")


def _estimate_summary(estimate: ProbabilityEstimate) -> str:
    return (
        f"P = {estimate.successes}/{estimate.trials} = {float(estimate.point):.4f} "
        f"[{estimate.ci_low:.4f}, {estimate.ci_high:.4f}] at {estimate.confidence:.0%}"
    )


def needs_seed(config: RunConfig) -> bool:
    return config.command in RANDOMIZED_COMMANDS or (config.command is Command.CLOSURE and config.input is None)


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------

def _classify(config: RunConfig) -> Outcome:
    family = _threshold(config)
    description = classify(family)
    try:
        order = predicted_order(family).describe()
    except NotApplicableError:
        order = None
    summary = f"{description.criticality.value}, stable set {description.label}"
    if order:
        summary += f"\n{order}"
    result = ClassifyResult(
        family=str(family),
        criticality=description.criticality.value,
        case=description.case.value,
        stable_set=description.label,
        predicted_order=order,
    )
    return Outcome(summary, result.model_dump(mode="json"))


def _stable_set(config: RunConfig) -> Outcome:
    family = _family(config)
    symbolic = None
    if isinstance(family, ThresholdFamily) and family.dims in (2, 3):
        symbolic = classify(family)
    rows = []
    for u in probe_directions(family.dims):
        row = {"direction": str(u), "stable": is_stable_direction(family, u)}
        if symbolic is not None:
            row["symbolic"] = symbolic.contains(u)
        rows.append(row)
    frame = pd.DataFrame(rows)
    label = symbolic.label if symbolic is not None else "probe directions only"
    name = str(family) if isinstance(family, ThresholdFamily) else f"explicit family ({len(family.rules)} rules)"
    payload = {"family": name, "stable_set": label, "probes": rows}
    return Outcome(f"{name}: stable set {label}", payload, frame)


def _closure(config: RunConfig) -> Outcome:
    family = _family(config)
    if config.input:
        start = read_snapshot(config.input)
    else:
        _need(config, "L", "p")
        box = Box.cube(config.L, family.dims, Boundary(config.boundary))
        start = sample_configuration(box, BernoulliSeeding(config.p, config.seed, 0, config.coupled))
    result = closure(family, start)
    payload = {
        "dims": list(start.box.dims),
        "boundary": start.box.boundary.value,
        "initial": start.count(),
        "final": result.count(),
        "percolates": result.is_full(),
        "snapshot": dumps_snapshot(result),
    }
    summary = f"closure: {start.count()} -> {result.count()} of {start.box.volume} sites; percolates={result.is_full()}"
    return Outcome(summary, payload)


def _prob(config: RunConfig) -> Outcome:
    _need(config, "L", "p")
    family = _family(config)
    estimate = percolation_probability(
        family, config.L, config.p, config.trials, config.seed,
        confidence=config.confidence, workers=config.workers, coupled=config.coupled,
        boundary=Boundary(config.boundary),
    )
    return Outcome(_estimate_summary(estimate), _estimate_payload(family, estimate))


def _lc(config: RunConfig) -> Outcome:
    _need(config, "p")
    family = _family(config)
    lc = critical_length(
        family, config.p, config.target, config.trials, config.seed, config.lmax,
        rel_width=config.rel_width, confidence=config.confidence, workers=config.workers, coupled=config.coupled,
    )
    trace = [
        TraceEntry(L=L, succ=e.successes, trials=e.trials, ci=(e.ci_low, e.ci_high)) for L, e in lc.probe_trace
    ]
    result = LcResult(
        family=str(family), p=lc.p, target=lc.target,
        bracket=(lc.L_lower, lc.L_upper), trace=trace, warnings=list(lc.warnings),
    )
    frame = pd.DataFrame(
        [{"L": t.L, "succ": t.succ, "trials": t.trials, "ci_lo": t.ci[0], "ci_hi": t.ci[1]} for t in trace]
    )
    upper = lc.L_upper if lc.L_upper is not None else "?"
    summary = f"L_c bracket ({lc.L_lower}, {upper}] at p={lc.p}, target={lc.target}"
    for warning in lc.warnings:
        summary += f"\n[yellow]warning:[/yellow] {warning}"
    return Outcome(summary, result.model_dump(mode="json"), frame)


def _scale(config: RunConfig) -> Outcome:
    _need(config, "p_list")
    family = _family(config)
    table = scaling_probe(
        family, config.p_list, config.trials, config.seed,
        target=config.target, L_max=config.lmax, rel_width=config.rel_width, workers=config.workers,
    )
    frame = table.to_frame()
    payload = {
        "family": str(family),
        "predicted": table.order.describe() if table.order else None,
        "rows": frame.replace({np.nan: None, np.inf: None, -np.inf: None}).to_dict(orient="records"),
        "warnings": table.warnings,
    }
    return Outcome(f"scaling probe for {family}: {payload['predicted']}", payload, frame)


def _grow(config: RunConfig) -> Outcome:
    _need(config, "base", "p")
    family = _threshold(config)
    report = growth_probability_experiment(
        family, config.base, config.direction, config.trials, config.seed, config.p,
        increment=config.increment, confidence=config.confidence, workers=config.workers, coupled=config.coupled,
    )
    row = report.to_row()
    payload = {"family": str(family), "label": report.label, **row}
    summary = f"{report.label}: {_estimate_summary(report.estimate)}"
    if report.pattern_bound is not None:
        summary += f"\nnew-layer s-pattern probability {report.pattern_bound:.4f}"
    return Outcome(summary, payload, pd.DataFrame([row]))


def _droplet(config: RunConfig) -> Outcome:
    _need(config, "droplet", "L", "p")
    family = _threshold(config)
    estimate = droplet_experiment(
        family, config.droplet, config.L, config.p, config.trials, config.seed,
        confidence=config.confidence, workers=config.workers, coupled=config.coupled,
    )
    payload = {**_estimate_payload(family, estimate), "droplet": list(config.droplet), "L": config.L}
    return Outcome(_estimate_summary(estimate), payload)


def _alpha(config: RunConfig) -> Outcome:
    entries = alpha_table(config.max_s)
    frame = alpha_frame(entries)
    payload = {"table": frame.to_dict(orient="records")}
    return Outcome(f"t_s and alpha_s for s = 2..{config.max_s}", payload, frame)


def _pattern(config: RunConfig) -> Outcome:
    _need(config, "s", "k", "p")
    p = Fraction(str(config.p))
    exact = pattern_probability_exact(config.s, config.k, p)
    columns = alpha_t(config.s).t + 1
    box = Box((columns, config.k))
    hits = 0
    for i in range(config.trials):
        grid = bernoulli_grid(box, BernoulliSeeding(config.p, config.seed, i, config.coupled))
        hits += find_s_pattern(grid, config.s) is not None
    estimate = ProbabilityEstimate.from_counts(hits, config.trials, config.confidence)
    payload = {
        "s": config.s,
        "k": config.k,
        "p": config.p,
        "exact": str(exact),
        "exact_value": float(exact),
        "monte_carlo": _estimate_payload(family=f"strip[{columns}x{config.k}]", estimate=estimate),
    }
    summary = f"exact {exact} = {float(exact):.6f}; Monte Carlo {_estimate_summary(estimate)}"
    return Outcome(summary, payload)


def _beams(config: RunConfig) -> Outcome:
    _need(config, "L", "p")
    family = _threshold(config)
    box = Box.cube(config.L, family.dims)
    A = sample_configuration(box, BernoulliSeeding(config.p, config.seed, 0, config.coupled))
    collection = beams_process(A, family, coarse=config.coarse)
    frame = pd.DataFrame(
        [
            {
                "step": r.step, "left": r.left, "right": r.right, "new_id": r.new_id,
                "area": r.beam.area, "height": r.beam.height, "path": len(r.path),
            }
            for r in collection.log
        ],
        columns=["step", "left", "right", "new_id", "area", "height", "path"],
    )
    summary = (
        f"{A.count()} seeds, {len(collection.log)} merges, {len(collection.members)} beams at STOP; "
        f"percolating={collection.percolating}"
    )
    return Outcome(summary, collection.to_dict(), frame)


def _al_check(config: RunConfig) -> Outcome:
    _need(config, "L", "p")
    family = _threshold(config)
    box = Box.cube(config.L, family.dims)
    scales = dyadic_scales(config.L)
    hits = {scale: 0 for scale in scales}
    percolating = 0
    for i in range(config.trials):
        A = sample_configuration(box, BernoulliSeeding(config.p, config.seed, i, config.coupled))
        collection = beams_process(A, family, coarse=config.coarse)
        if not collection.percolating:
            continue
        percolating += 1
        for hit in al_check(collection, scales, config.lam).hits:
            hits[(hit.h, hit.k)] += hit.found
    frame = pd.DataFrame(
        [
            {"h": h, "k": k, "percolating": percolating, "hits": n, "fraction": n / percolating if percolating else None}
            for (h, k), n in hits.items()
        ]
    )
    payload = {"family": str(family), "samples": config.trials, "rows": frame.to_dict(orient="records")}
    return Outcome(f"{percolating} of {config.trials} samples percolated", payload, frame)


def _decay(config: RunConfig) -> Outcome:
    _need(config, "p", "n_grid")
    literal = config.family2d or config.family
    if not literal:
        raise UsageError("'decay' requires --family2d")
    family = parse_family(literal)
    window = config.window[0] if config.window else 201
    table = decay_experiment(
        family, config.p, config.n_grid, config.trials, config.seed,
        window=window, censor_cap=config.censor_cap, confidence=config.confidence, workers=config.workers,
    )
    frame = table.to_frame()
    payload = {
        "family": str(family),
        "epsilon": table.epsilon,
        "window": table.window,
        "censored_fraction": table.censored_fraction,
        "slope": table.slope,
        "rows": frame.to_dict(orient="records"),
        "warnings": table.warnings,
    }
    summary = f"censored {table.censored_fraction:.2%}, log-tail slope {table.slope:.4f}"
    return Outcome(summary, payload, frame)


def _enum_beams(config: RunConfig) -> Outcome:
    _need(config, "h_max", "k_max", "window")
    count = enumerate_beams_small(config.h_max, config.k_max, config.window, anchored=config.anchored)
    bound = beam_count_bound(max(config.window), config.h_max)
    payload = {"count": count, "bound": bound, "window": list(config.window)}
    return Outcome(f"{count} beams (bound {bound:.4g})", payload)


_HANDLERS: Dict[Command, Callable[[RunConfig], Outcome]] = {
    Command.CLASSIFY: _classify,
    Command.STABLE_SET: _stable_set,
    Command.CLOSURE: _closure,
    Command.PROB: _prob,
    Command.LC: _lc,
    Command.SCALE: _scale,
    Command.GROW: _grow,
    Command.DROPLET: _droplet,
    Command.ALPHA: _alpha,
    Command.PATTERN: _pattern,
    Command.BEAMS: _beams,
    Command.AL_CHECK: _al_check,
    Command.DECAY: _decay,
    Command.ENUM_BEAMS: _enum_beams,
}


def _print_frame(frame: pd.DataFrame) -> None:
    table = Table(show_header=True, header_style="bold")
    for column in frame.columns:
        table.add_column(str(column))
    for row in frame.itertuples(index=False):
        table.add_row(*("" if value is None else str(value) for value in row))
    console.print(table)


def run(config: RunConfig) -> int:
    """Dispatch one run; returns the process exit status."""
    previous = os.environ.get("BOOTPERC_MAX_CELLS")
    try:
        if config.max_cells is not None:
            # read by Box, also in trial worker processes
            os.environ["BOOTPERC_MAX_CELLS"] = str(config.max_cells)
        if needs_seed(config) and config.seed is None:
            config = config.model_copy(update={"seed": secrets.randbits(63)})
            console.print(f"[dim]seed={config.seed}[/dim]")
        _logger.info("run command=%s config=%s", config.command.value, config.model_dump_json())
        outcome = _HANDLERS[config.command](config)
        console.print(outcome.summary)
        if outcome.frame is not None and not outcome.frame.empty:
            _print_frame(outcome.frame)
        if config.out:
            path = write_artifact(outcome.payload, outcome.frame, config, config.out)
            console.print(f"[dim]wrote {path}[/dim]")
        return 0
    except BootpercError as exc:
        _logger.error("run command=%s failed: %s", config.command.value, exc)
        console.print(Panel.fit(escape(str(exc)), title=type(exc).__name__, border_style="red"))
        return exc.exit_code
    finally:
        if config.max_cells is not None:
            if previous is None:
                os.environ.pop("BOOTPERC_MAX_CELLS", None)
            else:
                os.environ["BOOTPERC_MAX_CELLS"] = previous


# ---------------------------------------------------------------------------
# Option parsing
# ---------------------------------------------------------------------------

def _ints(text: Optional[str], name: str) -> Optional[List[int]]:
    if text is None:
        return None
    try:
        return [int(x) for x in text.replace("x", ",").split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--{name} expects comma-separated integers, got {text!r}")


def _floats(text: Optional[str], name: str) -> Optional[List[float]]:
    if text is None:
        return None
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--{name} expects comma-separated numbers, got {text!r}")


def _grid(text: Optional[str]) -> Optional[List[int]]:
    """``"5:50:5"`` (inclusive) or ``"5,10,20"``."""
    if text is None:
        return None
    if ":" in text:
        parts = text.split(":")
        try:
            start, stop, stride = (int(x) for x in (parts + ["1"])[:3])
        except ValueError:
            raise UsageError(f"--n expects start:stop:step, got {text!r}")
        if stride <= 0:
            raise UsageError("--n step must be positive")
        return list(range(start, stop + 1, stride))
    return _ints(text, "n")


def _dispatch(command: Command, **options: Any) -> None:
    try:
        config = RunConfig(command=command, **options)
    except ValidationError as exc:
        console.print(Panel.fit(escape(str(exc)), title="UsageError", border_style="red"))
        raise typer.Exit(1)
    code = run(config)
    if code:
        raise typer.Exit(code)


def _parsed(parse: Callable[[], Dict[str, Any]]) -> Dict[str, Any]:
    try:
        return parse()
    except UsageError as exc:
        console.print(Panel.fit(escape(str(exc)), title="UsageError", border_style="red"))
        raise typer.Exit(exc.exit_code)


# Shared options
FAMILY = typer.Option(None, "--family", help="Family literal, e.g. 'N[1,2,4]r=6'.")
FAMILY_FILE = typer.Option(None, "--family-file", help="YAML file listing explicit rules.")
SEED = typer.Option(None, "--seed", help="Master seed; generated and printed when omitted.")
TRIALS = typer.Option(1000, "--trials", help="Number of trials.")
OUT = typer.Option(None, "--out", help="Write the result artifact here.")
FORMAT = typer.Option(OutputFormat.JSON, "--format", help="Artifact format.")
WORKERS = typer.Option(None, "--workers", help="Worker processes for trials.")
MAX_CELLS = typer.Option(None, "--max-cells", help="Abort boxes with more cells than this.")
CONFIDENCE = typer.Option(None, "--confidence", help="Wilson interval confidence.")
INDEPENDENT = typer.Option(False, "--independent", help="Independent instead of coupled sampling.")


@app.command("classify")
def classify_command(family: Optional[str] = FAMILY, out: Optional[str] = OUT, format: OutputFormat = FORMAT):
    """Criticality class, stable set and predicted order of a family."""
    _dispatch(Command.CLASSIFY, family=family, out=out, format=format)


@app.command("stable-set")
def stable_set_command(
    family: Optional[str] = FAMILY, family_file: Optional[str] = FAMILY_FILE,
    out: Optional[str] = OUT, format: OutputFormat = FORMAT,
):
    """Stability of every probe direction."""
    _dispatch(Command.STABLE_SET, family=family, family_file=family_file, out=out, format=format)


@app.command("closure")
def closure_command(
    family: Optional[str] = FAMILY, family_file: Optional[str] = FAMILY_FILE,
    input: Optional[str] = typer.Option(None, "--input", help="Snapshot file to close."),
    L: Optional[int] = typer.Option(None, "--L", help="Box side for a random seed."),
    p: Optional[float] = typer.Option(None, "--p", help="Seed density."),
    boundary: str = typer.Option("closed", "--boundary", help="closed or torus."),
    seed: Optional[int] = SEED, out: Optional[str] = OUT, max_cells: Optional[int] = MAX_CELLS,
):
    """Closure of a snapshot or of a random seed."""
    _dispatch(
        Command.CLOSURE, family=family, family_file=family_file, input=input, L=L, p=p,
        boundary=boundary, seed=seed, out=out, max_cells=max_cells,
    )


@app.command("prob")
def prob_command(
    family: Optional[str] = FAMILY, family_file: Optional[str] = FAMILY_FILE,
    L: int = typer.Option(..., "--L", help="Box side."),
    p: float = typer.Option(..., "--p", help="Initial density."),
    boundary: str = typer.Option("closed", "--boundary", help="closed or torus."),
    trials: int = TRIALS, seed: Optional[int] = SEED, confidence: Optional[float] = CONFIDENCE,
    independent: bool = INDEPENDENT, workers: Optional[int] = WORKERS, max_cells: Optional[int] = MAX_CELLS,
    out: Optional[str] = OUT, format: OutputFormat = FORMAT,
):
    """Monte Carlo percolation probability of [L]^d."""
    _dispatch(
        Command.PROB, family=family, family_file=family_file, L=L, p=p, boundary=boundary, trials=trials,
        seed=seed, confidence=confidence, coupled=not independent, workers=workers, max_cells=max_cells,
        out=out, format=format,
    )


@app.command("lc")
def lc_command(
    family: Optional[str] = FAMILY, family_file: Optional[str] = FAMILY_FILE,
    p: float = typer.Option(..., "--p", help="Initial density."),
    target: Optional[float] = typer.Option(None, "--target", help="Target percolation probability."),
    lmax: Optional[int] = typer.Option(None, "--lmax", help="Largest side tried."),
    rel_width: float = typer.Option(0.0, "--rel-width", help="Stop bisection at this relative width."),
    trials: int = TRIALS, seed: Optional[int] = SEED, confidence: Optional[float] = CONFIDENCE,
    independent: bool = INDEPENDENT, workers: Optional[int] = WORKERS, max_cells: Optional[int] = MAX_CELLS,
    out: Optional[str] = OUT, format: OutputFormat = FORMAT,
):
    """Bracket the critical length L_c."""
    _dispatch(
        Command.LC, family=family, family_file=family_file, p=p, target=target, lmax=lmax, rel_width=rel_width,
        trials=trials, seed=seed, confidence=confidence, coupled=not independent, workers=workers,
        max_cells=max_cells, out=out, format=format,
    )


@app.command("scale")
def scale_command(
    family: Optional[str] = FAMILY,
    p_list: str = typer.Option(..., "--p-list", help="Strictly decreasing densities, comma-separated."),
    target: Optional[float] = typer.Option(None, "--target", help="Target percolation probability."),
    lmax: Optional[int] = typer.Option(None, "--lmax", help="Largest side tried."),
    rel_width: float = typer.Option(0.0, "--rel-width", help="Stop bisection at this relative width."),
    trials: int = TRIALS, seed: Optional[int] = SEED, workers: Optional[int] = WORKERS,
    max_cells: Optional[int] = MAX_CELLS, out: Optional[str] = OUT, format: OutputFormat = FORMAT,
):
    """log L_c brackets against the predicted order."""
    options = _parsed(lambda: {"p_list": _floats(p_list, "p-list")})
    _dispatch(
        Command.SCALE, family=family, target=target, lmax=lmax, rel_width=rel_width, trials=trials, seed=seed,
        workers=workers, max_cells=max_cells, out=out, format=format, **options,
    )


@app.command("grow")
def grow_command(
    family: Optional[str] = FAMILY,
    base: str = typer.Option(..., "--base", help="Base block extents, e.g. 4,4,4."),
    direction: str = typer.Option("e3", "--dir", help="Growth axis e1..ed."),
    increment: int = typer.Option(1, "--increment", help="Layers added."),
    p: float = typer.Option(..., "--p", help="Density on the new layers."),
    trials: int = TRIALS, seed: Optional[int] = SEED, confidence: Optional[float] = CONFIDENCE,
    independent: bool = INDEPENDENT, workers: Optional[int] = WORKERS,
    out: Optional[str] = OUT, format: OutputFormat = FORMAT,
):
    """P(grown block internally filled | base fully infected)."""
    options = _parsed(lambda: {"base": _ints(base, "base")})
    _dispatch(
        Command.GROW, family=family, direction=direction, increment=increment, p=p, trials=trials, seed=seed,
        confidence=confidence, coupled=not independent, workers=workers, out=out, format=format, **options,
    )


@app.command("droplet")
def droplet_command(
    family: Optional[str] = FAMILY,
    droplet: str = typer.Option(..., "--droplet", help="Droplet extents, e.g. 1,8,54."),
    L: int = typer.Option(..., "--L", help="Box side."),
    p: float = typer.Option(..., "--p", help="Density outside the droplet."),
    trials: int = TRIALS, seed: Optional[int] = SEED, confidence: Optional[float] = CONFIDENCE,
    independent: bool = INDEPENDENT, workers: Optional[int] = WORKERS, max_cells: Optional[int] = MAX_CELLS,
    out: Optional[str] = OUT, format: OutputFormat = FORMAT,
):
    """Percolation probability given a fully infected droplet."""
    options = _parsed(lambda: {"droplet": _ints(droplet, "droplet")})
    _dispatch(
        Command.DROPLET, family=family, L=L, p=p, trials=trials, seed=seed, confidence=confidence,
        coupled=not independent, workers=workers, max_cells=max_cells, out=out, format=format, **options,
    )


@app.command("alpha")
def alpha_command(
    max_s: int = typer.Option(14, "--max-s", help="Largest s."),
    out: Optional[str] = OUT, format: OutputFormat = FORMAT,
):
    """Table of t_s and alpha_s."""
    _dispatch(Command.ALPHA, max_s=max_s, out=out, format=format)


@app.command("pattern")
def pattern_command(
    s: int = typer.Option(..., "--s", help="Pattern parameter s >= 2."),
    k: int = typer.Option(..., "--k", help="Strip length."),
    p: float = typer.Option(..., "--p", help="Density."),
    trials: int = TRIALS, seed: Optional[int] = SEED, confidence: Optional[float] = CONFIDENCE,
    out: Optional[str] = OUT, format: OutputFormat = FORMAT,
):
    """Exact s-pattern probability next to a Monte Carlo check."""
    _dispatch(Command.PATTERN, s=s, k=k, p=p, trials=trials, seed=seed, confidence=confidence, out=out, format=format)


@app.command("beams")
def beams_command(
    family: Optional[str] = FAMILY,
    L: int = typer.Option(..., "--L", help="Box side."),
    p: float = typer.Option(..., "--p", help="Density."),
    fine: bool = typer.Option(False, "--fine", help="Generate fine instead of coarse beams."),
    seed: Optional[int] = SEED, max_cells: Optional[int] = MAX_CELLS,
    out: Optional[str] = OUT, format: OutputFormat = FORMAT,
):
    """Run the coarse beams process on one sample and log its merges."""
    _dispatch(
        Command.BEAMS, family=family, L=L, p=p, coarse=not fine, seed=seed, max_cells=max_cells,
        out=out, format=format,
    )


@app.command("al-check")
def al_check_command(
    family: Optional[str] = FAMILY,
    L: int = typer.Option(..., "--L", help="Box side."),
    p: float = typer.Option(..., "--p", help="Density."),
    lam: Optional[float] = typer.Option(None, "--lambda", help="Size factor; omit for no upper limit."),
    trials: int = typer.Option(50, "--samples", help="Number of samples."),
    seed: Optional[int] = SEED, max_cells: Optional[int] = MAX_CELLS,
    out: Optional[str] = OUT, format: OutputFormat = FORMAT,
):
    """Fraction of percolating samples with a covered beam at each dyadic scale."""
    _dispatch(
        Command.AL_CHECK, family=family, L=L, p=p, lam=lam, trials=trials, seed=seed, max_cells=max_cells,
        out=out, format=format,
    )


@app.command("decay")
def decay_command(
    family2d: str = typer.Option(..., "--family2d", help="Subcritical 2D family, e.g. 'N[1,2]r=4'."),
    eps: float = typer.Option(..., "--eps", help="Initial density epsilon."),
    window: int = typer.Option(201, "--window", help="Odd window side."),
    n: str = typer.Option("5:50:5", "--n", help="Cluster sizes, start:stop:step or a list."),
    censor_cap: Optional[float] = typer.Option(None, "--censor-cap", help="Largest censored fraction."),
    trials: int = typer.Option(10000, "--trials", help="Number of trials."),
    seed: Optional[int] = SEED, confidence: Optional[float] = CONFIDENCE, workers: Optional[int] = WORKERS,
    out: Optional[str] = OUT, format: OutputFormat = typer.Option(OutputFormat.CSV, "--format"),
):
    """Tail of the origin cluster size in a subcritical 2D family."""
    options = _parsed(lambda: {"n_grid": _grid(n)})
    _dispatch(
        Command.DECAY, family2d=family2d, p=eps, window=[window], censor_cap=censor_cap, trials=trials,
        seed=seed, confidence=confidence, workers=workers, out=out, format=format, **options,
    )


@app.command("enum-beams")
def enum_beams_command(
    h_max: int = typer.Option(..., "--h", help="Largest cross-section size (<= 8)."),
    k_max: int = typer.Option(..., "--k", help="Largest height."),
    window: str = typer.Option("8,8,8", "--window", help="Window sides."),
    anchored: bool = typer.Option(False, "--anchored", help="Only intervals starting at the floor."),
    out: Optional[str] = OUT, format: OutputFormat = FORMAT,
):
    """Exhaustive count of small beams against L^4 (3e)^h."""
    options = _parsed(lambda: {"window": _ints(window, "window")})
    _dispatch(Command.ENUM_BEAMS, h_max=h_max, k_max=k_max, anchored=anchored, out=out, format=format, **options)


@app.command("replay")
def replay_command(
    artifact: Path = typer.Argument(..., help="JSON/CSV artifact, or a YAML run config."),
    out: Optional[str] = OUT,
):
    """Rerun the configuration embedded in an artifact."""
    try:
        if artifact.suffix in (".yaml", ".yml"):
            with open(artifact, "r", encoding="utf-8") as f:
                config = RunConfig.model_validate(yaml.safe_load(f) or {})
        else:
            config = load_config(artifact)
    except (UsageError, ValidationError, OSError, yaml.YAMLError) as exc:
        console.print(Panel.fit(escape(str(exc)), title="UsageError", border_style="red"))
        raise typer.Exit(1)
    config = config.model_copy(update={"out": out})
    code = run(config)
    if code:
        raise typer.Exit(code)


@app.command("version")
def version_command():
    """Print the version."""
    console.print(f"bootperc {__version__}")


def main(argv: Optional[List[str]] = None) -> int:
    """Console entry point; click usage errors exit with status 1."""
    try:
        code = app(args=argv, prog_name="bootperc", standalone_mode=False)
    except click.exceptions.UsageError as exc:
        console.print(f"[red]usage error:[/red] {exc.format_message()}")
        return 1
    except click.exceptions.Abort:
        return 1
    return int(code or 0)


if __name__ == "__main__":
    sys.exit(main())
