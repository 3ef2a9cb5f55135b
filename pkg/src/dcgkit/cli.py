"""Command-line entry point: curate, render, evaluate, report, serve, doctor.

Every path-valued option resolves against ``--workdir``.  Config values
resolve as flag > config file > default; ``--set key=value`` overrides any
documented key ad hoc.  Exit codes: 0 success, 1 domain failure, 2 usage
error.
"""

from __future__ import annotations

import contextlib
import json
import sys
from pathlib import Path
from typing import Any, Iterator, Optional

import click

from dcgkit.config import Config, ConfigError, load_config, registry_help
from dcgkit.model import Split, Task, canonical_json


class _State:
    def __init__(self) -> None:
        self.config_path: Optional[str] = None
        self.workdir: Path = Path.cwd()
        self.json_mode: bool = False
        self.sets: tuple[str, ...] = ()


def _parse_sets(sets: tuple[str, ...]) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    for entry in sets:
        if "=" not in entry:
            raise click.UsageError(f"--set expects key=value, got {entry!r}")
        key, value = entry.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _load(state: _State, extra: Optional[dict[str, Any]] = None) -> Config:
    overrides = _parse_sets(state.sets)
    overrides.update({k: v for k, v in (extra or {}).items() if v is not None})
    try:
        return load_config(state.config_path, overrides, workdir=state.workdir)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from None


def _emit(state: _State, payload: dict[str, Any], text: str) -> None:
    if state.json_mode:
        click.echo(canonical_json(payload))
    else:
        click.echo(text)


def _resolve(state: _State, path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() else state.workdir / p


def _fail(message: str) -> "click.ClickException":
    return click.ClickException(message)


# -- backend wiring ------------------------------------------------------------


def _backend_from_spec(spec: str, default_id: str, workdir: Path):
    """CLI backend shorthand: ``mock:echo``, ``mock:<script.json>``, or
    ``http:<base_url>,model=<name>[,key=<ENV>][,caps=text+image+video]``."""
    from dcgkit.gateway import EchoBackend, HttpBackend, MockBackend

    if ":" not in spec:
        return None  # plain id referencing a configured backend
    kind, _, rest = spec.partition(":")
    if kind == "mock":
        if rest == "echo":
            return EchoBackend(default_id)
        script_path = Path(rest) if Path(rest).is_absolute() else workdir / rest
        if not script_path.exists():
            raise _fail(f"mock script does not exist: {script_path}")
        script = json.loads(script_path.read_text(encoding="utf-8"))
        caps = frozenset(script.pop("capabilities", ["text", "image", "video"]))
        return MockBackend(default_id, script, capabilities=caps)
    if kind == "http":
        base_url, _, tail = rest.partition(",")
        options = dict(part.split("=", 1) for part in tail.split(",") if "=" in part)
        if "model" not in options:
            raise _fail(f"http backend spec needs model=<name>: {spec!r}")
        caps = frozenset(options.get("caps", "text").split("+"))
        return HttpBackend(
            default_id,
            base_url=base_url,
            model=options["model"],
            api_key_env=options.get("key", "DCGKIT_API_KEY"),
            capabilities=caps,
        )
    raise _fail(f"unknown backend spec kind {kind!r} in {spec!r} (use mock: or http:)")


def _build_gateway(cfg: Config, specs: dict[str, Optional[str]]):
    """Gateway over configured backends plus CLI shorthand overrides.

    ``specs`` maps role -> spec string; a plain id must name a configured
    backend, a shorthand creates a backend under the role's id.
    """
    from dcgkit.gateway import Gateway, GatewayError, HttpBackend, MockBackend

    backends: dict[str, Any] = {}
    for entry in cfg.get("gateway.backends"):
        if not isinstance(entry, dict) or "id" not in entry or "kind" not in entry:
            raise _fail(f"gateway.backends entries need id and kind: {entry!r}")
        backend_id = entry["id"]
        caps = frozenset(entry.get("capabilities", ["text"]))
        if entry["kind"] == "mock":
            script = entry.get("script")
            if script is None:
                raise _fail(f"mock backend {backend_id!r} needs a script path")
            backends[backend_id] = MockBackend(
                backend_id, cfg.workdir / script, capabilities=caps
            )
        elif entry["kind"] == "http":
            backends[backend_id] = HttpBackend(
                backend_id,
                base_url=entry["base_url"],
                model=entry["model"],
                api_key_env=entry.get("api_key_env", "DCGKIT_API_KEY"),
                capabilities=caps,
            )
        else:
            raise _fail(f"backend {backend_id!r} has unknown kind {entry['kind']!r}")

    roles: dict[str, str] = {}
    for role, spec in specs.items():
        if spec is None:
            roles[role] = role
            continue
        built = _backend_from_spec(spec, role, cfg.workdir)
        if built is None:
            roles[role] = spec  # plain id
        else:
            backends[role] = built
            roles[role] = role

    budget = cfg.get("gateway.call_budget")
    gateway = Gateway(
        backends.values(),
        cache_dir=cfg.path("gateway.cache_dir"),
        max_in_flight=cfg.get("gateway.max_in_flight"),
        retries=cfg.get("gateway.retries"),
        backoff=cfg.get("gateway.backoff"),
        call_budget=budget,
    )
    for role, backend_id in roles.items():
        try:
            gateway.backend(backend_id)  # fail fast on missing ids
        except GatewayError:
            raise _fail(
                f"no configured backend named {backend_id!r} for role {role!r}; "
                f"add it to gateway.backends or pass --{role}"
            ) from None
    return gateway, roles


def _encoder_command(cfg: Config):
    from dcgkit.renderer.encode import FALLBACK_COMMAND, FFMPEG_COMMAND, resolve_encoder

    name = cfg.get("renderer.encoder")
    if name == "auto":
        return None
    if name == "ffmpeg":
        return FFMPEG_COMMAND
    if name == "cv2":
        return FALLBACK_COMMAND
    return resolve_encoder([name])


@contextlib.contextmanager
def _renderer(cfg: Config, workdir: Path) -> Iterator[Any]:
    """Yield a ready renderer; owns the emulator process when endpoint=mock."""
    from dcgkit.renderer.pipeline import BrowserRenderer

    endpoint = cfg.get("renderer.endpoint")
    kwargs = dict(
        settings=cfg.render_settings(),
        vendor_dir=cfg.path("renderer.vendor_dir"),
        encoder=_encoder_command(cfg),
        blank_threshold=cfg.get("renderer.blank_threshold"),
        keep_frames=cfg.get("renderer.keep_frames"),
    )
    if endpoint == "mock":
        from dcgkit.testing import MockBrowser, node_available

        if not node_available():
            raise _fail("renderer.endpoint=mock needs the 'node' binary on PATH")
        with MockBrowser() as browser:
            yield BrowserRenderer(browser.endpoint, workdir, **kwargs)
    else:
        yield BrowserRenderer(endpoint, workdir, **kwargs)


# -- group ----------------------------------------------------------------------


@click.group("dcgkit", context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=str, default=None,
              help="YAML config file; flags override its values.")
@click.option("--workdir", type=str, default=".",
              help="Base directory for all relative paths.")
@click.option("--json", "json_mode", is_flag=True, help="Machine-readable output.")
@click.option("--set", "sets", multiple=True, metavar="KEY=VALUE",
              help="Override any documented config key.")
@click.version_option(package_name="dcgkit")
@click.pass_context
def main(ctx: click.Context, config_path: Optional[str], workdir: str,
         json_mode: bool, sets: tuple[str, ...]) -> None:
    """Dynamic-chart harness: curation, rendering, scoring, rewards, studies."""
    state = _State()
    state.workdir = Path(workdir).resolve()
    state.config_path = (
        str(state.workdir / config_path)
        if config_path and not Path(config_path).is_absolute()
        else config_path
    )
    state.json_mode = json_mode
    state.sets = sets
    ctx.obj = state


@main.command("config-keys")
@click.pass_obj
def config_keys(state: _State) -> None:
    """List every documented config key with its default."""
    if state.json_mode:
        from dcgkit.config import REGISTRY

        click.echo(canonical_json({
            k.name: {"default": k.default, "kind": k.kind, "help": k.help}
            for k in REGISTRY
        }))
    else:
        click.echo(registry_help())


# -- render ----------------------------------------------------------------------


@main.command()
@click.option("--in", "input_path", required=True, type=str, help="Chart HTML file.")
@click.option("--out", "out_dir", type=str, default="render", help="Output directory.")
@click.option("--endpoint", type=str, default=None, help="Browser endpoint (or 'mock').")
@click.pass_obj
def render(state: _State, input_path: str, out_dir: str, endpoint: Optional[str]) -> None:
    """Render one chart document to frames and a video."""
    cfg = _load(state, {"renderer.endpoint": endpoint})
    source = _resolve(state, input_path)
    if not source.exists():
        raise _fail(f"input file does not exist: {source}")
    target = _resolve(state, out_dir)
    from dcgkit.model import RenderStatus

    with _renderer(cfg, target) as renderer:
        outcome = renderer.render(source.read_text(encoding="utf-8"), job_name=source.stem)
    payload = outcome.to_dict()
    lines = [f"status: {outcome.status.value}"]
    if outcome.error_class:
        lines.append(f"error_class: {outcome.error_class.value}")
    if outcome.frames_dir:
        lines.append(f"frames: {outcome.frames_dir}")
    if outcome.video_path:
        lines.append(f"video: {outcome.video_path}")
    for err in outcome.console_errors:
        lines.append(f"console: {err}")
    _emit(state, payload, "\n".join(lines))
    if outcome.status is not RenderStatus.RENDERED:
        sys.exit(1)


# -- evaluate / report / stats -----------------------------------------------------


def _load_samples(state: _State, dataset: str):
    from dcgkit.dataset import DatasetError, load_dataset

    path = _resolve(state, dataset)
    if path.is_dir():
        path = path / f"{Split.TEST.value}.jsonl"
    try:
        return load_dataset(path), path
    except DatasetError as exc:
        raise _fail(str(exc)) from None


@main.command()
@click.option("--task", "tasks", multiple=True, required=True,
              type=click.Choice([t.value for t in Task]), help="Repeat for several tasks.")
@click.option("--dataset", required=True, type=str,
              help="Dataset JSONL file, or a directory holding test.jsonl.")
@click.option("--model", "model_spec", required=True, type=str,
              help="Model backend: configured id, mock:<script.json>, mock:echo, or http:<...>.")
@click.option("--judge", "judge_spec", required=True, type=str,
              help="Judge backend spec (same grammar as --model).")
@click.option("--out", "out_path", type=str, default="reports/report.json",
              help="Where the report JSON lands.")
@click.option("--any-split", is_flag=True, help="Evaluate samples outside the test split too.")
@click.pass_obj
def evaluate(state: _State, tasks: tuple[str, ...], dataset: str, model_spec: str,
             judge_spec: str, out_path: str, any_split: bool) -> None:
    """Run the benchmark: generate, render, judge, aggregate."""
    cfg = _load(state)
    samples, dataset_path = _load_samples(state, dataset)
    gateway, roles = _build_gateway(cfg, {"model": model_spec, "judge": judge_spec})
    task_list = sorted({Task(t) for t in tasks}, key=lambda t: list(Task).index(t))
    report_path = _resolve(state, out_path)
    work = state.workdir / "benchmark"

    from dcgkit.evaluator import BenchmarkError, render_report, run_benchmark
    from dcgkit.gateway import GatewayError
    from dcgkit.renderer.pipeline import RenderError

    try:
        with _renderer(cfg, work / "render") as renderer:
            report = run_benchmark(
                samples,
                task_list,
                gateway,
                roles["model"],
                roles["judge"],
                renderer,
                workdir=work,
                media_root=str(dataset_path.parent),
                max_workers=cfg.get("evaluator.max_workers"),
                temperature=cfg.get("evaluator.temperature"),
                max_output=cfg.get("evaluator.max_output"),
                query_to_judge=cfg.get("evaluator.query_to_judge"),
                require_test_split=not any_split,
            )
    except (BenchmarkError, GatewayError, RenderError, ValueError) as exc:
        raise _fail(str(exc)) from None
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(render_report(report, "json") + "\n", encoding="utf-8")
    _emit(state, report.to_dict(), render_report(report, "table") + f"\n\nreport: {report_path}")


@main.command()
@click.option("--in", "report_path", required=True, type=str, help="Report JSON file.")
@click.option("--format", "fmt", default="table",
              type=click.Choice(["table", "csv", "json"]), help="Output format.")
@click.pass_obj
def report(state: _State, report_path: str, fmt: str) -> None:
    """Re-render a saved evaluation report."""
    from dcgkit.evaluator import parse_report, render_report

    path = _resolve(state, report_path)
    if not path.exists():
        raise _fail(f"report file does not exist: {path}")
    try:
        loaded = parse_report(path.read_text(encoding="utf-8"))
    except (ValueError, KeyError) as exc:
        raise _fail(f"{path}: not a valid report: {exc}") from None
    click.echo(render_report(loaded, "json" if state.json_mode else fmt))


@main.command()
@click.option("--dataset", required=True, type=str, help="Dataset JSONL file or directory.")
@click.pass_obj
def stats(state: _State, dataset: str) -> None:
    """Summarize a dataset: counts, chart types, code length."""
    from dcgkit.dataset import dataset_stats

    samples, path = _load_samples(state, dataset)
    summary = dataset_stats(samples).to_dict()
    lines = [f"samples: {summary['n_samples']} ({path})"]
    lines.append("splits: " + ", ".join(f"{k}={v}" for k, v in summary["split_counts"].items()))
    lines.append("chart types: " + ", ".join(
        f"{k}={v}" for k, v in summary["chart_type_histogram"].items()))
    lines.append(f"code tokens: mean {summary['mean_code_tokens']:.1f}, "
                 f"median {summary['median_code_tokens']:.1f}")
    _emit(state, summary, "\n".join(lines))


# -- curate ------------------------------------------------------------------------


@main.command()
@click.option("--seeds", "seeds_dir", type=str, default=None,
              help="Seed directory with manifest.json (stage 1).")
@click.option("--stage", type=click.Choice(["1", "2", "3", "4", "all"]), default="all")
@click.option("--generator", "generator_spec", type=str, default=None,
              help="Generator backend spec; defaults to curation.generator_backend.")
@click.option("--out", "out_dir", type=str, default="curation", help="Pipeline root directory.")
@click.pass_obj
def curate(state: _State, seeds_dir: Optional[str], stage: str,
           generator_spec: Optional[str], out_dir: str) -> None:
    """Run the dataset construction stages."""
    cfg = _load(state)
    from dcgkit.curation import (
        CurationError, PipelineError, PoolError, StagePaths,
        run_stage1, run_stage2, run_stage3, run_stage4,
    )
    from dcgkit.gateway import GatewayError

    paths = StagePaths(_resolve(state, out_dir))
    paths.root.mkdir(parents=True, exist_ok=True)
    stages = ["1", "2", "3", "4"] if stage == "all" else [stage]
    needs_generator = any(s in stages for s in ("2", "3", "4"))
    needs_renderer = any(s in stages for s in ("1", "3"))

    gateway = None
    generator_role = cfg.get("curation.generator_backend")
    if needs_generator:
        gateway, roles = _build_gateway(cfg, {generator_role: generator_spec})
        generator_role = roles[generator_role]

    rng_seed = cfg.get("curation.rng_seed")
    summary: dict[str, Any] = {}
    try:
        with contextlib.ExitStack() as stack:
            renderer = (
                stack.enter_context(_renderer(cfg, paths.root / "render"))
                if needs_renderer
                else None
            )
            if "1" in stages:
                if seeds_dir is None:
                    raise _fail("stage 1 needs --seeds")
                kept, rejected = run_stage1(_resolve(state, seeds_dir), renderer, paths)
                summary["stage1"] = {"kept": kept, "rejected": rejected}
            if "2" in stages:
                kept, rejected = run_stage2(
                    paths, gateway, generator_role,
                    rng_seed=rng_seed,
                    candidates_per_seed=cfg.get("curation.candidates_per_seed"),
                    pool_path=cfg.path("curation.pool"),
                )
                summary["stage2"] = {"kept": kept, "rejected": rejected}
            if "3" in stages:
                kept, rejected = run_stage3(paths, renderer, gateway, generator_role)
                summary["stage3"] = {"kept": kept, "rejected": rejected}
            if "4" in stages:
                counts = run_stage4(
                    paths, gateway, generator_role,
                    ratios=cfg.split_ratios(), rng_seed=rng_seed,
                )
                summary["stage4"] = counts
    except (CurationError, PipelineError, PoolError, GatewayError) as exc:
        raise _fail(str(exc)) from None
    text = "\n".join(f"{name}: {json.dumps(info)}" for name, info in summary.items())
    _emit(state, summary, text or "nothing to do")


# -- services ------------------------------------------------------------------------


@main.command("reward-serve")
@click.option("--dataset", required=True, type=str, help="Samples the trainer draws queries from.")
@click.option("--judge", "judge_spec", required=True, type=str, help="Judge backend spec.")
@click.option("--host", type=str, default=None)
@click.option("--port", type=int, default=None)
@click.pass_obj
def reward_serve(state: _State, dataset: str, judge_spec: str,
                 host: Optional[str], port: Optional[int]) -> None:
    """Serve joint code-visual rewards over HTTP."""
    cfg = _load(state, {"reward.host": host, "reward.port": port})
    samples, _ = _load_samples(state, dataset)
    gateway, roles = _build_gateway(cfg, {"judge": judge_spec})
    from dcgkit.reward import RewardConfig, create_reward_app, serve_rewards

    reward_cfg = RewardConfig(
        w_code=cfg.get("reward.w_code"),
        w_video=cfg.get("reward.w_video"),
        failure_penalty=cfg.get("reward.failure_penalty"),
        group_size=cfg.get("reward.group_size"),
        judge_backend=roles["judge"],
        render_settings=cfg.render_settings(),
    )
    with _renderer(cfg, state.workdir / "reward-render") as renderer:
        app = create_reward_app(
            samples, gateway, renderer, reward_cfg,
            max_in_flight=cfg.get("reward.max_in_flight"),
            workers_per_batch=cfg.get("reward.workers_per_batch"),
        )
        click.echo(f"reward service on http://{cfg.get('reward.host')}:{cfg.get('reward.port')}")
        serve_rewards(app, cfg.get("reward.host"), cfg.get("reward.port"))


@main.command("study-serve")
@click.option("--log", "log_path", type=str, default=None, help="Judgment event log.")
@click.option("--media", "media_dir", type=str, default=None, help="Video directory.")
@click.option("--ui", "ui_dir", type=str, default=None, help="Built annotation UI bundle.")
@click.option("--host", type=str, default=None)
@click.option("--port", type=int, default=None)
@click.pass_obj
def study_serve(state: _State, log_path: Optional[str], media_dir: Optional[str],
                ui_dir: Optional[str], host: Optional[str], port: Optional[int]) -> None:
    """Serve the human study API and, when available, the annotation UI."""
    cfg = _load(state, {
        "study.log": log_path, "study.media": media_dir, "study.ui": ui_dir,
        "study.host": host, "study.port": port,
    })
    from dcgkit.study import StudyStore, create_study_app, serve_study

    store = StudyStore(cfg.path("study.log"))
    app = create_study_app(store, media_root=cfg.path("study.media"), ui_dir=cfg.path("study.ui"))
    click.echo(f"study service on http://{cfg.get('study.host')}:{cfg.get('study.port')}")
    serve_study(app, cfg.get("study.host"), cfg.get("study.port"))


# -- doctor ------------------------------------------------------------------------


@main.command()
@click.pass_obj
def doctor(state: _State) -> None:
    """Check the environment: browser, encoder, assets, cache."""
    cfg = _load(state)
    checks: list[tuple[str, bool, str]] = []

    from dcgkit.testing import node_available

    endpoint = cfg.get("renderer.endpoint")
    if endpoint == "mock":
        ok = node_available()
        checks.append(("browser", ok, "bundled emulator (node found)" if ok
                       else "missing binary: node (needed for renderer.endpoint=mock)"))
        if ok:
            try:
                from dcgkit.testing import MockBrowser

                with MockBrowser() as browser:
                    import httpx

                    r = httpx.get(f"{browser.endpoint}/json/version", timeout=5)
                    r.raise_for_status()
                checks.append(("browser-roundtrip", True, "emulator answered /json/version"))
            except Exception as exc:
                checks.append(("browser-roundtrip", False, f"emulator failed: {exc}"))
    else:
        try:
            import httpx

            r = httpx.get(f"{endpoint}/json/version", timeout=5)
            r.raise_for_status()
            checks.append(("browser", True, f"{endpoint} answered /json/version"))
        except Exception as exc:
            checks.append(("browser", False, f"cannot reach {endpoint}: {exc}"))

    from dcgkit.renderer.encode import EncoderMissingError

    try:
        command = _encoder_command(cfg)
        if command is None:
            from dcgkit.renderer.encode import resolve_encoder

            command = resolve_encoder(None)
        checks.append(("encoder", True, f"using {command.name}"))
    except EncoderMissingError as exc:
        checks.append(("encoder", False, str(exc)))

    try:
        from importlib import resources

        shim = resources.files("dcgkit.renderer").joinpath("assets/virtual_clock_shim.js")
        size = len(shim.read_bytes())
        checks.append(("clock-shim", True, f"asset present ({size} bytes)"))
    except Exception as exc:
        checks.append(("clock-shim", False, f"missing virtual clock asset: {exc}"))

    try:
        from dcgkit.curation import load_modification_pool

        pool = load_modification_pool(cfg.path("curation.pool"))
        checks.append(("modification-pool", True, f"{sum(len(v) for v in pool.values())} templates"))
    except Exception as exc:
        checks.append(("modification-pool", False, str(exc)))

    cache_dir = cfg.path("gateway.cache_dir")
    try:
        cache_dir.mkdir(parents=True, exist_ok=True)
        probe = cache_dir / ".doctor-probe"
        probe.write_text("ok")
        probe.unlink()
        checks.append(("cache-dir", True, str(cache_dir)))
    except OSError as exc:
        checks.append(("cache-dir", False, f"not writable: {exc}"))

    payload = {name: {"ok": ok, "detail": detail} for name, ok, detail in checks}
    lines = [f"{'ok ' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in checks]
    _emit(state, payload, "\n".join(lines))
    if not all(ok for _, ok, _ in checks):
        sys.exit(1)


if __name__ == "__main__":
    main()
