"""Regenerate the committed test fixtures.

Produces, deterministically:

- tests/fixtures/dataset/test.jsonl + media/   (12-sample benchmark corpus)
- tests/fixtures/dataset/replay/              (recorded render outcomes)
- tests/fixtures/mocks/*.json                 (scripted model/judge/generator)
- tests/fixtures/seeds/                       (3 seed templates + manifest)
- tests/fixtures/goldens/                     (expected benchmark reports and
                                               curation stage files)

Run from the repository root with the package installed:

    python3 scripts/build_fixtures.py
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"
CHARTS = FIXTURES / "charts"

from dcgkit.dataset import save_dataset
from dcgkit.evaluator import render_report, run_benchmark
from dcgkit.gateway import Gateway, MockBackend
from dcgkit.model import ChartSample, Provenance, QAPair, RenderSettings, Split, Task
from dcgkit.renderer.extract import extract_code
from dcgkit.renderer.pipeline import BrowserRenderer, ReplayRenderer
from dcgkit.testing import MockBrowser

TEMPLATES = ["good_bars", "good_line", "good_pie", "good_scatter", "good_area"]
CHART_TYPES = {"good_bars": "bar", "good_line": "line", "good_pie": "pie",
               "good_scatter": "scatter", "good_area": "area"}
ACCENTS = ["#8e44ad", "#16a085", "#c0392b", "#2980b9", "#d35400", "#27ae60",
           "#e91e63", "#3f51b5", "#ff5722", "#009688", "#795548", "#607d8b"]


def sample_html(index: int) -> str:
    """A unique renderable document per sample: template + marker + accent."""
    template = TEMPLATES[index % len(TEMPLATES)]
    html = (CHARTS / f"{template}.html").read_text(encoding="utf-8")
    data = data_sequence(index)
    marker = f"<!-- series {data[0]}-{data[1]}-{data[2]} -->\n"
    html = html.replace("<canvas", marker + "<canvas", 1)
    return html.replace("#4e79a7", ACCENTS[index]).replace("#d62728", ACCENTS[index]) \
               .replace("#355c7d", ACCENTS[index]).replace("#2a9d8f", ACCENTS[index]) \
               .replace("#1f77b4", ACCENTS[index])


def data_sequence(index: int) -> list[int]:
    return [index * 3 + 1, index * 3 + 2, index * 3 + 3]


def qa_sets(index: int) -> tuple[list[QAPair], list[QAPair]]:
    a, b, c = data_sequence(index)
    code = [
        (f"Does the source include a series comment listing {a}-{b}-{c}?", "yes"),
        (f"Is the first value of the {a}-{b}-{c} series equal to {a}?", "yes"),
        (f"Is the first value of the {a}-{b}-{c} series equal to {b}?", "no"),
        (f"Does the {a}-{b}-{c} series end with the value {c}?", "yes"),
        (f"Does the {a}-{b}-{c} series contain the value {c + 7}?", "no"),
        (f"Does the code draw the {a}-{b}-{c} chart on a canvas element?", "yes"),
        (f"Does the {a}-{b}-{c} document fetch any remote script?", "no"),
        (f"Is the {a}-{b}-{c} animation driven by the page clock?", "yes"),
        (f"Does the {a}-{b}-{c} source define more than {c + 10} series?", "no"),
        (f"Is the canvas for the {a}-{b}-{c} chart 800 pixels wide?", "yes"),
    ]
    video = [
        (f"Does the {a}-{b}-{c} animation start from an empty plot?", "yes"),
        (f"Is the {a}-{b}-{c} animation finished by the final frame?", "yes"),
        (f"Does the {a}-{b}-{c} animation ever go fully black?", "no"),
        (f"Do shapes in the {a}-{b}-{c} animation grow over time?", "yes"),
        (f"Does the {a}-{b}-{c} animation show a legend sliding in?", "no"),
        (f"Is the {a}-{b}-{c} chart visible in the last frame?", "yes"),
        (f"Does the {a}-{b}-{c} animation flicker between frames?", "no"),
        (f"Is motion in the {a}-{b}-{c} animation smooth and continuous?", "yes"),
        (f"Does the {a}-{b}-{c} animation restart in a loop?", "no"),
        (f"Does the {a}-{b}-{c} chart keep a stable background color?", "yes"),
    ]
    qa_code = [QAPair(question=q, expected_answer=e, target="code") for q, e in code]
    qa_video = [QAPair(question=q, expected_answer=e, target="video") for q, e in video]
    return qa_code, qa_video


def build_dataset() -> list[ChartSample]:
    samples = []
    for i in range(12):
        qa_code, qa_video = qa_sets(i)
        template = TEMPLATES[i % len(TEMPLATES)]
        a, b, c = data_sequence(i)
        samples.append(
            ChartSample(
                id=f"bench-{i:03d}",
                split=Split.TEST,
                chart_type=CHART_TYPES[template],
                html_code=sample_html(i),
                video_path=f"media/bench-{i:03d}/reference.webm",
                detailed_desc=(
                    f"A {CHART_TYPES[template]} chart animating the series "
                    f"{a}, {b}, {c}: shapes grow from an empty plot to their "
                    f"final size over roughly two seconds, drawn in accent "
                    f"color {ACCENTS[i]} on a light background."
                ),
                simple_desc=f"An animated {CHART_TYPES[template]} chart of the series {a}, {b}, {c}.",
                data_sequence=data_sequence(i),
                qa_code=tuple(qa_code),
                qa_video=tuple(qa_video),
                provenance=Provenance(seed_template_id=template),
            )
        )
    return samples


BROKEN_REPLY = """Here is the chart:
```html
<!DOCTYPE html>
<html><body><canvas id="c" width="800" height="600"></canvas>
<script>function draw( { ctx.fillRect(0, 0, ]; }</script>
</body></html>
```"""

WHITE_REPLY = """```html
<!DOCTYPE html>
<html><body><canvas id="c" width="800" height="600"></canvas>
<script>const ready = true;</script>
</body></html>
```"""

PROSE_REPLY = (
    "I cannot produce the chart right now, but it would show three growing "
    "bars in a pleasing accent color."
)


def build_model_script(samples: list[ChartSample]) -> dict:
    """Model replies keyed on each sample's data block; 3 scripted failures."""
    rules = []
    for i, sample in enumerate(samples):
        marker = json.dumps(sample.data_sequence)
        if i == 8:
            reply = BROKEN_REPLY
        elif i == 9:
            reply = WHITE_REPLY
        elif i == 10:
            reply = PROSE_REPLY
        else:
            reply = f"Here is the chart you asked for.\n```html\n{sample.html_code}\n```"
        rules.append({"contains": marker, "reply": reply})
    return {"capabilities": ["text", "image", "video"], "rules": rules}


def build_judge_script(samples: list[ChartSample]) -> dict:
    """Judge is right on question j of sample i unless (i + j) % 5 == 0."""
    rules = []
    seen = []
    for i, sample in enumerate(samples):
        for j, pair in enumerate(list(sample.qa_code) + list(sample.qa_video)):
            correct = (i + j) % 5 != 0
            answer = pair.expected_answer if correct else (
                "no" if pair.expected_answer == "yes" else "yes"
            )
            suffix = "that matches the chart." if answer == "yes" else "that is not the case."
            rules.append({"contains": pair.question, "reply": f"{answer}, {suffix}"})
            seen.append(pair.question)
    for q in seen:
        if sum(1 for other in seen if q in other) != 1:
            raise SystemExit(f"ambiguous judge rule: {q!r}")
        if any(q in s.html_code for s in samples):
            raise SystemExit(f"judge rule text appears inside chart code: {q!r}")
    return {"capabilities": ["text", "video"], "rules": rules}


def fresh_gateway(tmp: Path) -> Gateway:
    model = MockBackend(
        "model", json_script(FIXTURES / "mocks" / "model_benchmark.json"),
        capabilities=frozenset(["text", "image", "video"]),
    )
    judge = MockBackend(
        "judge", json_script(FIXTURES / "mocks" / "judge_benchmark.json"),
        capabilities=frozenset(["text", "video"]),
    )
    return Gateway([model, judge], cache_dir=tmp / "cache")


def json_script(path: Path) -> dict:
    script = json.loads(path.read_text(encoding="utf-8"))
    script.pop("capabilities", None)
    return script


def main() -> None:
    dataset_dir = FIXTURES / "dataset"
    mocks_dir = FIXTURES / "mocks"
    goldens = FIXTURES / "goldens"
    seeds_dir = FIXTURES / "seeds"
    for d in (dataset_dir, mocks_dir, goldens, seeds_dir):
        d.mkdir(parents=True, exist_ok=True)

    samples = build_dataset()
    save_dataset(samples, dataset_dir / "test.jsonl")
    print(f"dataset: {len(samples)} samples")

    (mocks_dir / "model_benchmark.json").write_text(
        json.dumps(build_model_script(samples), indent=2) + "\n", encoding="utf-8"
    )
    (mocks_dir / "judge_benchmark.json").write_text(
        json.dumps(build_judge_script(samples), indent=2) + "\n", encoding="utf-8"
    )
    print("mock scripts written")

    with MockBrowser() as browser, tempfile.TemporaryDirectory() as tmp:
        renderer = BrowserRenderer(
            browser.endpoint, Path(tmp) / "render", RenderSettings(per_job_timeout=25.0)
        )
        for sample in samples:
            outcome = renderer.render(sample.html_code, job_name=f"ref-{sample.id}")
            if outcome.video_path is None:
                raise SystemExit(f"reference {sample.id} failed: {outcome.status}")
            dest = dataset_dir / sample.video_path
            dest.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(outcome.video_path, dest)
        print("reference media rendered")

        model_script = build_model_script(samples)
        generated = []
        for rule in model_script["rules"]:
            code = extract_code(rule["reply"])
            if code is not None:
                generated.append(code)
        if len(generated) != 11:
            raise SystemExit(f"expected 11 recordable documents, got {len(generated)}")
        replay_dir = dataset_dir / "replay"
        shutil.rmtree(replay_dir, ignore_errors=True)
        ReplayRenderer.record(renderer, generated, replay_dir / "manifest.json")
        print("replay manifest recorded")

        reports = []
        for run in range(2):
            with tempfile.TemporaryDirectory() as work:
                gateway = fresh_gateway(Path(work))
                report = run_benchmark(
                    samples,
                    [Task.D2C, Task.S2C],
                    gateway,
                    "model",
                    "judge",
                    renderer,
                    workdir=Path(work) / "bench",
                    media_root=str(dataset_dir),
                )
                reports.append(render_report(report, "json") + "\n")
        if reports[0] != reports[1]:
            raise SystemExit("benchmark report not reproducible")
        (goldens / "benchmark_report.json").write_text(reports[0], encoding="utf-8")
        print("benchmark golden written")

    replay_reports = []
    for run in range(2):
        with tempfile.TemporaryDirectory() as work:
            gateway = fresh_gateway(Path(work))
            replay = ReplayRenderer(dataset_dir / "replay" / "manifest.json")
            report = run_benchmark(
                samples,
                [Task.D2C, Task.S2C, Task.V2C],
                gateway,
                "model",
                "judge",
                replay,
                workdir=Path(work) / "bench",
                media_root=str(dataset_dir),
            )
            replay_reports.append(render_report(report, "json") + "\n")
    if replay_reports[0] != replay_reports[1]:
        raise SystemExit("replay report not reproducible")
    (goldens / "benchmark_report_replay.json").write_text(replay_reports[0], encoding="utf-8")
    print("replay golden written")

    build_curation_fixtures(goldens, seeds_dir)
    print("curation fixtures written")


# -- curation fixtures ----------------------------------------------------------


def seed_variant(html: str, title: str, variant: str) -> str:
    """A recognizable rewrite of a seed: marker comment plus a color swap."""
    palette = {"A": "#ff8800", "B": "#0066cc"}
    out = html.replace("<canvas", f"<!-- rewrite {title}-{variant} -->\n<canvas", 1)
    for old in ("#4e79a7", "#d62728", "#355c7d"):
        out = out.replace(old, palette[variant])
    return out


def build_generator_script(seed_files: dict[str, Path]) -> dict:
    """Scripted generator for the whole curation flow.

    Rules are matched first-hit in order, and later prompts quote earlier
    outputs (the summary prompt embeds the description, the describe and QA
    prompts embed the rewritten chart), so specific keys come first and the
    rewrite rules, keyed on seed chart titles, come last.
    """
    qa_items = [
        {"question": f"Is checkpoint {i} satisfied by the rewritten chart?",
         "expected_answer": "yes" if i % 3 else "no",
         "rationale": "fixture checkpoint"}
        for i in range(10)
    ]
    qa_reply = "```json\n" + json.dumps(qa_items, indent=1) + "\n```"
    rules = [
        {"contains": "Summarize this chart description",
         "reply": "An animated chart grows from empty to complete."},
        {"contains": "Extract the data sequence plotted",
         "reply": "```json\n[42, 71, 55, 88]\n```"},
        {"contains": "by reading the chart source code alone", "reply": qa_reply},
        {"contains": "by watching the chart animation alone", "reply": qa_reply},
    ]
    accents = {"A": "an orange accent", "B": "a blue accent"}
    for title in seed_files:
        for variant in ("A", "B"):
            rules.append({
                "contains": f"rewrite {title}-{variant}",
                "reply": (
                    f"A detailed look at rewrite {title}-{variant}: the animated "
                    f"chart keeps its original structure with {accents[variant]}, "
                    "shapes growing from a blank plot to full size across the clip."
                ),
            })
    for title, path in seed_files.items():
        html = path.read_text(encoding="utf-8")
        marker = {"bars": "Quarterly revenue", "lines": "Temperature trend",
                  "pies": "Market share"}[title]
        rules.append({
            "contains": marker,
            "replies": [
                f"Rewritten as requested.\n```html\n{seed_variant(html, title, 'A')}\n```",
                f"Rewritten again.\n```html\n{seed_variant(html, title, 'B')}\n```",
            ],
        })
    return {"capabilities": ["text", "video"], "rules": rules}


def build_curation_fixtures(goldens: Path, seeds_dir: Path) -> None:
    from dcgkit.curation import StagePaths, run_stage1, run_stage2, run_stage3, run_stage4

    seed_files = {}
    for title, template in [("bars", "good_bars"), ("lines", "good_line"), ("pies", "good_pie")]:
        dest = seeds_dir / f"{title}.html"
        shutil.copyfile(CHARTS / f"{template}.html", dest)
        seed_files[title] = dest
    (seeds_dir / "manifest.json").write_text(
        json.dumps({"bars.html": "bar", "lines.html": "line", "pies.html": "pie"}, indent=2)
        + "\n",
        encoding="utf-8",
    )
    script = build_generator_script(seed_files)
    (FIXTURES / "mocks" / "generator_curation.json").write_text(
        json.dumps(script, indent=2) + "\n", encoding="utf-8"
    )

    outputs = []
    with MockBrowser() as browser:
        for run in range(2):
            with tempfile.TemporaryDirectory() as tmp:
                renderer = BrowserRenderer(
                    browser.endpoint, Path(tmp) / "render",
                    RenderSettings(per_job_timeout=25.0),
                )
                generator = MockBackend(
                    "generator", json_script(FIXTURES / "mocks" / "generator_curation.json"),
                    capabilities=frozenset(["text", "video"]),
                )
                gateway = Gateway([generator], cache_dir=Path(tmp) / "cache")
                paths = StagePaths(Path(tmp) / "out")
                paths.root.mkdir(parents=True)
                run_stage1(seeds_dir, renderer, paths)
                run_stage2(paths, gateway, "generator", rng_seed=13, candidates_per_seed=2)
                run_stage3(paths, renderer, gateway, "generator")
                run_stage4(paths, gateway, "generator", rng_seed=13)
                bundle = {}
                for rel in ["stage1_seeds.jsonl", "stage2_candidates.jsonl",
                            "stage3_described.jsonl", "rejections.jsonl"]:
                    bundle[rel] = (paths.root / rel).read_text(encoding="utf-8")
                for found in sorted(paths.dataset_dir.glob("*.jsonl")):
                    bundle[f"dataset/{found.name}"] = found.read_text(encoding="utf-8")
                outputs.append(bundle)
    if outputs[0] != outputs[1]:
        raise SystemExit("curation stages not reproducible")
    curation_dir = goldens / "curation"
    shutil.rmtree(curation_dir, ignore_errors=True)
    for rel, text in outputs[0].items():
        dest = curation_dir / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text, encoding="utf-8")


if __name__ == "__main__":
    sys.exit(main())
