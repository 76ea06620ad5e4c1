"""End-to-end generation: source dataset in, weather-stylized dataset out.

The central invariant: every emitted pair keeps the SOURCE disparity file,
byte for byte. Depth conditioning preserves scene geometry, so the original
ground truth stays valid for the stylized pair.
"""

from __future__ import annotations

import hashlib
import json
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..consistency.hooks import attention_hook
from ..consistency.types import SimilarityConfig
from ..core.manifest import load_sample, write_image
from ..core.types import DatasetManifest, ManifestEntry, StereoSample
from ..errors import ConfigurationError, StereoWeatherError
from .backends import BackendClients, build_backends
from .config import GenerationConfig
from .depth import DepthCondition, predict_depth
from .prompts import CONDITIONS, WeatherPrompt, build_weather_prompt


def stable_seed(global_seed: int, sample_id: str, condition: str) -> int:
    """Deterministic per-(sample, condition) seed, stable across platforms."""
    digest = hashlib.sha256(f"{global_seed}|{sample_id}|{condition}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class GeneratedPair:
    left: np.ndarray
    right: np.ndarray
    hook_invocations: int
    sites: tuple[str, ...]


def generate_pair(
    sample: StereoSample,
    prompt: WeatherPrompt,
    depth_cond: DepthCondition,
    cfg: GenerationConfig,
    backends: BackendClients,
    seed: int | None = None,
) -> GeneratedPair:
    """Generate both views jointly with the consistency hook installed.

    Stacked two-view generation is what lets the hook see [2, N, C] tokens at
    every step. Remote diffusion backends expose no local attention sites; for
    those the dfm settings travel inside the request instead.
    """
    seed = cfg.seed if seed is None else seed
    diffusion = backends.diffusion
    hook = None
    sites: tuple[str, ...] = ()
    if diffusion.attention_sites():
        hook = attention_hook(
            cfg.dfm.layer_selector,
            cfg.dfm.n,
            SimilarityConfig(alpha=cfg.dfm.alpha, d_max=cfg.dfm.d_max),
            timestep_range=cfg.dfm.timestep_range,
        )
        sites = tuple(hook.install(diffusion))
    try:
        out_left, out_right = diffusion.generate(
            sample.left, sample.right, depth_cond, prompt, cfg, seed
        )
    finally:
        if hook is not None:
            hook.remove(diffusion)
    if out_left.shape != sample.left.shape or out_right.shape != sample.right.shape:
        raise StereoWeatherError(
            f"backend changed resolution: {out_left.shape} vs {sample.left.shape}"
        )
    return GeneratedPair(
        left=out_left,
        right=out_right,
        hook_invocations=hook.invocations if hook is not None else 0,
        sites=sites,
    )


@dataclass
class GenerationReport:
    generated: int = 0
    skipped: list[dict] = field(default_factory=list)
    seeds: dict[str, int] = field(default_factory=dict)
    hook_invocations: dict[str, int] = field(default_factory=dict)
    sites: tuple[str, ...] = ()
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "generated": self.generated,
            "skipped": sorted(self.skipped, key=lambda s: (s["id"], s["condition"])),
            "seeds": dict(sorted(self.seeds.items())),
            "hook_invocations": dict(sorted(self.hook_invocations.items())),
            "sites": list(self.sites),
            "config": self.config,
        }


def _check_writable(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write_probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise ConfigurationError(f"output root {path} is not writable: {exc}") from exc


def _emit(
    out_dirs: dict[str, Path],
    staging: Path,
    new_id: str,
    pair: GeneratedPair,
    source_disparity: Path,
) -> None:
    """Write the triple via a staging dir + atomic renames; no partial triples."""
    temps = {
        "left": staging / f"{new_id}.left.png",
        "right": staging / f"{new_id}.right.png",
        "disp": staging / f"{new_id}.pfm",
    }
    finals = {
        "left": out_dirs["left"] / f"{new_id}.png",
        "right": out_dirs["right"] / f"{new_id}.png",
        "disp": out_dirs["disp"] / f"{new_id}.pfm",
    }
    try:
        write_image(pair.left, temps["left"])
        write_image(pair.right, temps["right"])
        shutil.copyfile(source_disparity, temps["disp"])  # byte-identical pass-through
        for key in ("left", "right", "disp"):
            temps[key].replace(finals[key])
    except BaseException:
        for tmp in temps.values():
            tmp.unlink(missing_ok=True)
        raise


def run_pipeline(
    manifest: DatasetManifest,
    conditions: list[str],
    cfg: GenerationConfig,
    backends: BackendClients | None,
    out_root: str | Path,
) -> GenerationReport:
    """Stylize every (sample, condition) combination into a new dataset tree.

    Per-sample failures are recorded and skipped; the batch never aborts.
    When ``backends`` is None a fresh client bundle is built per task from the
    configured ids, which also keeps hook state worker-local under the thread
    pool.
    """
    for condition in conditions:
        if condition not in CONDITIONS:
            raise ConfigurationError(
                f"unknown condition {condition!r}, expected one of {CONDITIONS}"
            )
    out_root = Path(out_root)
    split_dir = out_root / manifest.split
    out_dirs = {name: split_dir / name for name in ("left", "right", "disp")}
    _check_writable(split_dir)
    staging = split_dir / ".tmp"
    for d in (*out_dirs.values(), staging):
        d.mkdir(parents=True, exist_ok=True)

    report = GenerationReport(config=cfg.to_dict())
    subsets: dict[str, str] = {}

    def task(entry: ManifestEntry, condition: str) -> tuple[str, str, dict]:
        new_id = f"{entry.id}_{condition}"
        seed = stable_seed(cfg.seed, entry.id, condition)
        clients = backends if backends is not None else build_backends(
            cfg.backends, cfg.endpoints
        )
        sample = load_sample(entry)
        prompt = build_weather_prompt(sample, condition, clients.prompt)
        depth_cond = predict_depth(sample, clients.depth)
        pair = generate_pair(sample, prompt, depth_cond, cfg, clients, seed=seed)
        _emit(out_dirs, staging, new_id, pair, entry.disparity_path)
        return new_id, condition, {
            "seed": seed,
            "hook_invocations": pair.hook_invocations,
            "sites": pair.sites,
        }

    jobs = [(entry, condition) for entry in manifest for condition in conditions]
    results = []
    if cfg.workers == 1:
        for entry, condition in jobs:
            results.append((entry, condition, _run_task(task, entry, condition)))
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [
                (entry, condition, pool.submit(_run_task, task, entry, condition))
                for entry, condition in jobs
            ]
            results = [(entry, condition, fut.result()) for entry, condition, fut in futures]

    for entry, condition, outcome in results:
        if isinstance(outcome, Exception):
            report.skipped.append(
                {
                    "id": entry.id,
                    "condition": condition,
                    "error": f"{type(outcome).__name__}: {outcome}",
                }
            )
            continue
        new_id, condition, info = outcome
        subsets[new_id] = condition
        report.generated += 1
        report.seeds[new_id] = info["seed"]
        report.hook_invocations[new_id] = info["hook_invocations"]
        report.sites = info["sites"] or report.sites

    shutil.rmtree(staging, ignore_errors=True)
    (split_dir / "subsets.json").write_text(
        json.dumps(dict(sorted(subsets.items())), indent=2, sort_keys=True) + "\n"
    )
    (split_dir / "report.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    )
    return report


def _run_task(task, entry, condition):
    try:
        return task(entry, condition)
    except Exception as exc:  # recorded, never aborts the batch
        return exc
