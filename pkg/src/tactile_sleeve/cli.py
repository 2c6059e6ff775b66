"""Command-line front end: map, pattern, simulate, score, serve.

Exit codes: 0 success, 1 usage or I/O error, 2 task-level non-completion
(e.g. the simulated run did not reach the goal). The `map` subcommand
additionally distinguishes malformed PGM input (3) from a frame smaller
than the motor grid (4).
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click

from . import report
from .mapping import FrameTooSmallError, MappingConfig, process_frame
from .patterns import (Pattern, aggregate_trials, builtin_catalog,
                       builtin_patterns, classify, schedule)
from .pgm import PgmError, read_pgm
from .scene_store import bundled_scene_names, load_scene, load_scene_dir
from .session import (LogStore, SessionService, aggregate_runs,
                      load_session_logs, load_trial_records, runs_by_person)
from .sim import CameraModel, greedy_policy, run_session, scripted
from .wire import encode_wireframe

EXIT_BAD_PGM = 3
EXIT_FRAME_TOO_SMALL = 4


class TaskIncomplete(click.ClickException):
    exit_code = 2

    def show(self, file=None):
        click.echo(f"note: {self.message}", err=True)


def _load_config(path) -> MappingConfig:
    if path is None:
        return MappingConfig.indoor()
    return MappingConfig.from_text(Path(path).read_text())


@click.group()
def cli():
    """Depth-to-vibration sleeve toolkit."""


@cli.command("map")
@click.argument("pgm_path", type=click.Path())
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Mapping config file (key = value lines).")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON.")
@click.option("--wire-hex", is_flag=True,
              help="Also print the encoded wire frame as lowercase hex.")
def cli_map(pgm_path, config_path, as_json, wire_hex):
    """Map a depth PGM to the 5x5 intensity grid."""
    config = _load_config(config_path)
    try:
        frame = read_pgm(pgm_path)
    except OSError as exc:
        raise click.ClickException(f"cannot read {pgm_path}: {exc}")
    except FrameTooSmallError as exc:
        err = click.ClickException(str(exc))
        err.exit_code = EXIT_FRAME_TOO_SMALL
        raise err
    except PgmError as exc:
        err = click.ClickException(f"malformed PGM: {exc}")
        err.exit_code = EXIT_BAD_PGM
        raise err
    try:
        grid = process_frame(frame, config)
    except FrameTooSmallError as exc:
        err = click.ClickException(str(exc))
        err.exit_code = EXIT_FRAME_TOO_SMALL
        raise err
    if as_json:
        doc = {"intensities": list(grid.intensities)}
        if wire_hex:
            doc["wire_hex"] = encode_wireframe(grid, 0).hex()
        click.echo(json.dumps(doc))
    else:
        for row in grid.rows():
            click.echo(" ".join(f"{v:4d}" for v in row))
        if wire_hex:
            click.echo(encode_wireframe(grid, 0).hex())


@cli.group("pattern")
def cli_pattern():
    """Inspect the built-in vibration pattern catalog."""


@cli_pattern.command("list")
def pattern_list():
    for p in builtin_patterns():
        cls = classify(p)
        click.echo(f"{p.id:<4} {p.name:<32} {cls.simultaneity.value:<16} "
                   f"{cls.axis.value:<12} {p.direction.value}")


def _get_pattern(pattern_id: str) -> Pattern:
    catalog = builtin_catalog()
    if pattern_id not in catalog:
        raise click.ClickException(f"unknown pattern id {pattern_id!r}")
    return catalog[pattern_id]


@cli_pattern.command("show")
@click.argument("pattern_id")
def pattern_show(pattern_id):
    p = _get_pattern(pattern_id)
    cls = classify(p)
    click.echo(f"{p.id}: {p.name} ({cls.simultaneity.value}, "
               f"{cls.axis.value}), direction {p.direction.value}, "
               f"{p.step_ms} ms/step")
    for t_ms, _ in schedule(p)[:-1]:
        k = t_ms // p.step_ms
        motors = ",".join(str(m) for m, _ in p.steps[k])
        click.echo(f"  t={t_ms:>5} ms  motors {motors}")


@cli_pattern.command("export")
@click.argument("pattern_id")
def pattern_export(pattern_id):
    click.echo(_get_pattern(pattern_id).to_json())


@cli.command("simulate")
@click.argument("scene_ref")
@click.option("--controller", default="greedy",
              help="'greedy' or a path to a JSON command script.")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--tick-hz", default=6.0, show_default=True)
@click.option("--budget-s", default=300.0, show_default=True)
@click.option("--person", default=None)
@click.option("--run", "run_no", type=int, default=None)
@click.option("--output", type=click.Path(), default=None,
              help="Write the session log here instead of stdout.")
def cli_simulate(scene_ref, controller, config_path, tick_hz, budget_s,
                 person, run_no, output):
    """Run a headless navigation session; exits 2 on non-completion."""
    try:
        scene = load_scene(scene_ref)
    except (OSError, ValueError, KeyError) as exc:
        raise click.ClickException(f"bad scene {scene_ref!r}: {exc}")
    if controller == "greedy":
        control = lambda grid, tick: greedy_policy(grid)
    else:
        try:
            script = json.loads(Path(controller).read_text())
            control = scripted([tuple(c) for c in script])
        except (OSError, ValueError) as exc:
            raise click.ClickException(f"bad controller script: {exc}")
    config = _load_config(config_path)
    log = run_session(scene, config, CameraModel(), control,
                      tick_hz=tick_hz, budget_s=budget_s,
                      person=person, run=run_no)
    text = log.to_jsonl()
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=False)
    if log.did_not_finish:
        raise TaskIncomplete("agent did not reach the goal within budget")


@cli.command("score")
@click.argument("log_dir", type=click.Path())
@click.option("--json", "as_json", is_flag=True)
@click.option("--figures", "figures_dir", type=click.Path(), default=None,
              help="Render figures and CSV tables into this directory.")
def cli_score(log_dir, as_json, figures_dir):
    """Aggregate a directory of session/trial logs into summary tables."""
    log_dir = Path(log_dir)
    if not log_dir.is_dir():
        raise click.ClickException(f"{log_dir} is not a directory")
    logs = load_session_logs(log_dir)
    records = load_trial_records(log_dir)
    catalog = builtin_catalog()

    summary = None
    per_person = runs_by_person(logs)
    if per_person:
        counts = {len(p) for p in per_person}
        if len(counts) > 1:
            raise click.ClickException(
                "ragged runs: every person needs the same number of "
                "completed runs")
        summary = aggregate_runs(per_person)

    table = None
    if records:
        try:
            trials = [(catalog[r.pattern_id], r) for r in records]
        except KeyError as exc:
            raise click.ClickException(f"trial references unknown pattern "
                                       f"{exc.args[0]!r}")
        table = aggregate_trials(trials)

    if summary is None and table is None:
        click.echo("warning: no scoreable logs found", err=True)

    if as_json:
        from .session import accuracy_table_doc
        doc = {}
        if summary is not None:
            doc["run_summary"] = {
                "per_person": [list(p) for p in summary.per_person],
                "means": list(summary.means),
                "seconds_row": list(summary.seconds_row),
                "percent_row": list(summary.percent_row),
            }
        if table is not None:
            doc["accuracy"] = accuracy_table_doc(table)
        click.echo(json.dumps(doc))
    else:
        if summary is not None:
            click.echo(report.format_run_summary(summary), nl=False)
            click.echo("")
        if table is not None:
            click.echo(report.format_accuracy_table(table), nl=False)

    if figures_dir is not None:
        written = report.write_delimited_summary(summary, table, figures_dir)
        if table is not None:
            written += report.render_accuracy_figures(table, figures_dir)
        if summary is not None:
            written.append(report.render_run_times_figure(summary, figures_dir))
        for path in written:
            click.echo(f"wrote {path}", err=True)


@cli.command("serve")
@click.option("--port", default=7833, show_default=True)
@click.option("--scenes", "scenes_dir", type=click.Path(), default=None,
              help="Scene JSON directory; defaults to the bundled scenes.")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--tick-hz", default=6.0, show_default=True)
@click.option("--budget-s", default=300.0, show_default=True)
@click.option("--debug-pose", is_flag=True,
              help="Include agent pose in tick messages.")
@click.option("--wire-sink", default=None, metavar="HOST:PORT",
              help="Stream every broadcast grid as 43-octet wire frames.")
@click.option("--data-dir", type=click.Path(), default=None,
              help="Log directory (overrides TACTILE_DATA_DIR).")
def cli_serve(port, scenes_dir, config_path, tick_hz, budget_s, debug_pose,
              wire_sink, data_dir):
    """Run the live session service."""
    if scenes_dir is not None:
        scenes = load_scene_dir(scenes_dir)
    else:
        scenes = {name: load_scene(name) for name in bundled_scene_names()}
    if not scenes:
        raise click.ClickException("no scenes found")
    sink = None
    if wire_sink is not None:
        host, _, port_s = wire_sink.rpartition(":")
        try:
            sink = (host, int(port_s))
        except ValueError:
            raise click.ClickException(f"bad --wire-sink {wire_sink!r}")
    store = LogStore(Path(data_dir)) if data_dir else LogStore()
    svc = SessionService(scenes, config=_load_config(config_path),
                         tick_hz=tick_hz, budget_s=budget_s,
                         debug_pose=debug_pose, log_store=store,
                         wire_sink=sink)

    async def main_loop():
        try:
            await svc.start(port)
        except OSError as exc:
            raise click.ClickException(f"cannot bind port {port}: {exc}")
        click.echo(f"listening on 127.0.0.1:{svc.port} "
                   f"(scenes: {', '.join(sorted(scenes))})", err=True)
        await svc.serve_forever()

    asyncio.run(main_loop())


def main():
    try:
        cli.main(standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(1)


if __name__ == "__main__":
    main()
