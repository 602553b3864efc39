"""Run configuration and the genome -> objectives evaluation pipeline."""

import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gait, objectives, terrain as terrain_mod
from .analysis import ArchiveEntry, ParetoArchive
from .errors import ConfigError
from .evaluator import SimulationConfig, simulate
from .io import config_hash
from .nsga3 import EvolutionConfig, optimize
from .robot import load_morphology

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENV_PREFIX = "MODGAIT_"


@dataclass
class RunConfig:
    robot: object
    morphology_name: str
    gait_name: str
    terrain: terrain_mod.Terrain
    evolution: EvolutionConfig
    simulation: SimulationConfig
    constants: objectives.ObjectiveConstants
    objective_count: int = 3
    raw: dict = field(default_factory=dict)

    @property
    def bounds(self):
        return gait.gait_bounds(self.gait_name, self.robot.leg_count)

    def hash(self):
        return config_hash(self.raw)

    def metadata(self):
        return {
            "morphology": self.morphology_name,
            "gait": self.gait_name,
            "terrain": {
                "kind": self.terrain.kind,
                "slope_deg": self.terrain.slope_deg,
                "step_height_m": self.terrain.step_height_m,
                "step_edge_x_m": self.terrain.step_edge_x_m,
                "friction": self.terrain.friction,
            },
            "seed": self.evolution.rng_seed,
            "objectives": self.objective_count,
            "config_hash": self.hash(),
        }


def _parse_env_value(text):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def apply_env_overrides(data, environ=None):
    """MODGAIT_SECTION__KEY=value (or MODGAIT_KEY for top level) overrides."""
    environ = os.environ if environ is None else environ
    for name, value in sorted(environ.items()):
        if not name.startswith(ENV_PREFIX):
            continue
        path = name[len(ENV_PREFIX):].lower().split("__")
        node = data
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"env override {name} addresses a non-table key")
        node[path[-1]] = _parse_env_value(value)
    return data


def _section(data, name, allowed):
    sec = data.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"config section [{name}] must be a table")
    unknown = set(sec) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key {name}.{sorted(unknown)[0]}")
    return sec


def load_run_config(path, seed=None, objective_count=None, environ=None):
    """Load and validate a run config TOML, with env and CLI overrides."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(p, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    apply_env_overrides(data, environ)
    if seed is not None:
        data.setdefault("optimizer", {})["seed"] = int(seed)
    if objective_count is not None:
        data.setdefault("objectives", {})["count"] = int(objective_count)
    return build_run_config(data, base_dir=p.parent)


def build_run_config(data, base_dir=Path(".")):
    for key in ("morphology", "gait"):
        if key not in data:
            raise ConfigError(f"config missing required key {key!r}")
    morph_ref = str(data["morphology"])
    morph_path = base_dir / morph_ref
    robot = load_morphology(morph_path if morph_path.exists() else morph_ref)
    gait_name = str(data["gait"])
    if gait_name not in gait.GAIT_LEG_COUNT:
        raise ConfigError(f"gait: unknown gait {gait_name!r}")
    if gait.GAIT_LEG_COUNT[gait_name] != robot.leg_count:
        raise ConfigError(
            f"gait {gait_name!r} needs {gait.GAIT_LEG_COUNT[gait_name]} legs but "
            f"morphology {robot.name!r} has {robot.leg_count}"
        )

    tsec = _section(data, "terrain",
                    ("kind", "slope_deg", "step_height_m", "step_edge_x_m", "friction"))
    try:
        terrain = terrain_mod.Terrain(
            kind=tsec.get("kind", "flat"),
            slope_deg=float(tsec.get("slope_deg", 10.0)),
            step_height_m=float(tsec.get("step_height_m", 0.10)),
            step_edge_x_m=float(tsec.get("step_edge_x_m", 0.5)),
            friction=float(tsec.get("friction", 0.6)),
        )
    except ValueError as exc:
        raise ConfigError(f"terrain: {exc}") from exc

    osec = _section(data, "optimizer",
                    ("population_size", "generations", "crossover_probability",
                     "crossover_eta", "mutation_probability", "mutation_eta", "seed"))
    evolution = EvolutionConfig(
        population_size=int(osec.get("population_size", 91)),
        generations=int(osec.get("generations", 10)),
        crossover_probability=float(osec.get("crossover_probability", 1.0)),
        crossover_eta=float(osec.get("crossover_eta", 30.0)),
        mutation_probability=(
            float(osec["mutation_probability"]) if "mutation_probability" in osec else None
        ),
        mutation_eta=float(osec.get("mutation_eta", 20.0)),
        rng_seed=int(osec.get("seed", 0)),
    )

    ssec = _section(data, "simulation",
                    ("control_rate_hz", "cycles", "warmup_cycles", "fall_threshold_m",
                     "impact_proxy"))
    simulation = SimulationConfig(
        control_rate_hz=float(ssec.get("control_rate_hz", 240.0)),
        cycles=int(ssec.get("cycles", 3)),
        warmup_cycles=int(ssec.get("warmup_cycles", 1)),
        fall_threshold_m=(
            float(ssec["fall_threshold_m"]) if "fall_threshold_m" in ssec else None
        ),
        impact_proxy=bool(ssec.get("impact_proxy", True)),
    )

    obsec = _section(data, "objectives",
                     ("count", "v_ref_mps", "drift_weight", "d_nom_m", "failure_penalty"))
    count = int(obsec.get("count", 3))
    if count not in (2, 3):
        raise ConfigError("objectives.count must be 2 or 3")
    constants = objectives.constants_for(
        robot,
        v_ref_mps=float(obsec.get("v_ref_mps", 0.15)),
        drift_weight=float(obsec.get("drift_weight", 0.5)),
        d_nom_m=float(obsec["d_nom_m"]) if "d_nom_m" in obsec else None,
        failure_penalty=float(obsec.get("failure_penalty", objectives.FAILURE_PENALTY)),
    )
    return RunConfig(
        robot=robot,
        morphology_name=robot.name,
        gait_name=gait_name,
        terrain=terrain,
        evolution=evolution,
        simulation=simulation,
        constants=constants,
        objective_count=count,
        raw=data,
    )


def evaluate_genome(cfg, genome):
    """Full evaluation of one genome: trace plus minimization triple."""
    dv = gait.genome_decode(genome, cfg.gait_name, cfg.robot.leg_count)
    schedule = gait.build_schedule(cfg.gait_name, cfg.robot.leg_count, dv)
    trace = simulate(cfg.robot, schedule, cfg.terrain, cfg.simulation)
    triple, violation = objectives.assemble(trace, cfg.constants, cfg.robot.weight)
    return trace, triple, violation


def make_objective_callback(cfg):
    m = cfg.objective_count

    def evaluate(genome):
        _, triple, violation = evaluate_genome(cfg, genome)
        return triple[:m], violation

    return evaluate


def run_optimization(cfg, jobs=1, on_generation=None):
    """Optimize and build the final archive with full (re-scored) triples.

    For 2-objective runs the optimizer never sees the load objective; the
    archive entries are re-scored afterwards so the stored triples are always
    complete.
    """
    result = optimize(
        make_objective_callback(cfg),
        cfg.bounds,
        cfg.evolution,
        n_objectives=cfg.objective_count,
        jobs=jobs,
        on_generation=on_generation,
    )
    entries = []
    for genome in result.archive_genomes:
        trace, triple, violation = evaluate_genome(cfg, genome)
        entries.append(
            ArchiveEntry(
                genome=np.array(genome), objectives=triple, violation=violation,
                summary=trace.summary(),
            )
        )
    archive = ParetoArchive(entries=entries, metadata=cfg.metadata())
    return archive, result
