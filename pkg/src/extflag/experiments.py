"""Random-flag experiments: candidate generation, ranking, sweeps and reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .circuit import (Circuit, compile_to_native, load, magic_distillation_circuit,
                      zzzzz_rotation_circuit)
from .densesim import fidelity, output_state, postselect_flags, simulate
from .faults import (FlagScore, NoiseModel, detected_faults, exact_quality, fault_locations,
                     output_error_set, quality, rank_flags, retarget, score_flag, scoring_view)
from .gadget import NestedFlagSet, instrument, nest, synthesize, validate_nesting
from .pauli import PauliString, random_pauli, weight
from .propagation import CompatibilityError, check_compatibility, propagate

log = logging.getLogger(__name__)

WORKERS_ENV = "EXTFLAG_WORKERS"
DEFAULT_P_GRID = tuple(float(v) for v in np.logspace(-4, -2, 5))
DEFAULT_EPS_GRID = tuple(float(v) for v in np.logspace(-3, -1, 5))
REDRAW_FACTOR = 100


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class Benchmark:
    name: str
    circuit: Circuit
    section: tuple[int, int]
    input_state: str


def builtin_benchmarks() -> dict[str, Benchmark]:
    magic = magic_distillation_circuit()
    zz = zzzzz_rotation_circuit(5, math.pi / 4)
    return {
        # flags cover the Clifford block after the T layer
        "magic": Benchmark("magic", magic, (1, len(magic)), "+" * magic.width),
        "zzzzz": Benchmark("zzzzz", zz, (0, len(zz)), "+" * zz.width),
    }


def resolve_benchmark(name_or_path: str, section: tuple[int, int] | None = None,
                      input_state: str | None = None) -> Benchmark:
    builtins = builtin_benchmarks()
    if name_or_path in builtins:
        b = builtins[name_or_path]
    elif Path(name_or_path).is_file():
        c = load(name_or_path)
        b = Benchmark(Path(name_or_path).stem, c, (0, len(c)), "0" * c.width)
    else:
        raise ExperimentError(f"no builtin circuit or file named {name_or_path!r}")
    if section is not None:
        b = Benchmark(b.name, b.circuit, tuple(section), b.input_state)
    if input_state is not None:
        b = Benchmark(b.name, b.circuit, b.section, input_state)
    start, stop = b.section
    if not 0 <= start <= stop <= len(b.circuit):
        raise ExperimentError(f"section {start}:{stop} outside {len(b.circuit)} moments")
    return b


@dataclass(frozen=True)
class ExperimentConfig:
    circuit: str = "magic"
    model: str = "depolarizing"
    parameter_grid: tuple[float, ...] = ()
    n_flags: int = 500
    n_pairs: int = 100
    seed: int = 0
    section: tuple[int, int] | None = None
    output: str | None = None
    exact_scoring: bool = False
    crosstalk_ratio: float = 0.1
    max_overlap: int | None = None
    input_state: str | None = None

    def __post_init__(self):
        if self.n_flags < 1 or self.n_pairs < 1:
            raise ValueError("flag and pair counts must be >= 1")
        grid = tuple(float(v) for v in self.parameter_grid) or (
            DEFAULT_EPS_GRID if self.model == "overrotation" else DEFAULT_P_GRID
        )
        object.__setattr__(self, "parameter_grid", grid)
        for v in grid:
            if v < 0 or (self.model != "overrotation" and v > 1):
                raise ValueError(f"grid value {v} invalid for {self.model}")
        NoiseModel(self.model, crosstalk_ratio=self.crosstalk_ratio)

    def noise_model(self, value: float = 0.0) -> NoiseModel:
        return NoiseModel(self.model, crosstalk_ratio=self.crosstalk_ratio).with_parameter(value)

    def to_json(self) -> dict:
        d = asdict(self)
        d["parameter_grid"] = list(self.parameter_grid)
        d["section"] = list(self.section) if self.section else None
        return d


@dataclass(frozen=True)
class ExperimentRecord:
    flag_id: str
    entangle: str
    disentangle: str
    weight_P: int
    weight_Pprime: int
    q: float | str
    n_detected: float | str
    rank: int | str
    parameter: float
    fidelity_raw: float
    fidelity_postselected: float
    survival_probability: float


RECORD_FIELDS = [f.name for f in fields(ExperimentRecord)]


# ---------------------------------------------------------------------------
# candidates


def draw_candidates(b: Benchmark, count: int, seed: int) -> list[PauliString]:
    """Uniform non-identity Paulis compatible with the benchmark section."""
    start, stop = b.section
    out: list[PauliString] = []
    cap = REDRAW_FACTOR * count
    rejected = 0
    draw = 0
    while len(out) < count:
        if draw >= cap:
            raise ExperimentError(
                f"found {len(out)}/{count} compatible flags after {draw} draws "
                f"({rejected} incompatible); circuit too dense in non-Clifford gates"
            )
        p = random_pauli(b.circuit.width, seed, draw, nonidentity=True)
        draw += 1
        if check_compatibility(b.circuit, p, start, stop):
            out.append(p)
        else:
            rejected += 1
    log.info("drew %d flags in %d draws (%d incompatible)", count, draw, rejected)
    return out


def support_overlap(a: PauliString, b: PauliString) -> int:
    return len(set(a.support) & set(b.support))


def draw_pairs(b: Benchmark, count: int, seed: int, max_overlap: int | None = None
               ) -> list[NestedFlagSet]:
    """Independent flag pairs whose disentangling operators share at most
    ``max_overlap`` qubits of support (default: half the width, rounded down)."""
    width = b.circuit.width
    limit = width // 2 if max_overlap is None else max_overlap
    start, stop = b.section
    pairs: list[NestedFlagSet] = []
    draw = 0
    cap = REDRAW_FACTOR * count
    stats = {"incompatible": 0, "overlap": 0}
    while len(pairs) < count:
        if draw >= cap:
            raise ExperimentError(
                f"found {len(pairs)}/{count} valid pairs after {draw} draws; rejections {stats}"
            )
        p1 = random_pauli(width, seed, 2 * draw, nonidentity=True)
        p2 = random_pauli(width, seed, 2 * draw + 1, nonidentity=True)
        draw += 1
        try:
            g1 = synthesize(b.circuit, p1, b.section)
            g2 = synthesize(b.circuit, p2, b.section)
        except CompatibilityError:
            stats["incompatible"] += 1
            continue
        if p1 == p2 or support_overlap(g1.disentangle, g2.disentangle) > limit:
            stats["overlap"] += 1
            continue
        flags = nest(g1, g2, data_width=width)
        check = validate_nesting(flags, b.circuit)
        if not check:
            raise ExperimentError(f"invalid nesting: {check.detail}")
        pairs.append(flags)
    return pairs


# ---------------------------------------------------------------------------
# simulation


def simulate_flagged(b: Benchmark, flags: NestedFlagSet, m: NoiseModel) -> tuple[float, float]:
    """(post-selected fidelity, survival probability) for one flag set."""
    circ = instrument(b.circuit, flags)
    if m.needs_native:
        circ = compile_to_native(circ)
    ref = output_state(b.circuit, b.input_state)
    rho = simulate(circ, m, b.input_state)
    data, survival = postselect_flags(rho, flags)
    return fidelity(data, ref), survival


def raw_fidelity(b: Benchmark, m: NoiseModel) -> float:
    circ = compile_to_native(b.circuit) if m.needs_native else b.circuit
    return fidelity(simulate(circ, m, b.input_state), output_state(b.circuit, b.input_state))


def _job(args):
    b, flags, m = args
    return simulate_flagged(b, flags, m)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _run_jobs(jobs: list) -> list[tuple[float, float]]:
    n = _workers()
    if n == 1 or len(jobs) < 2:
        return [_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (4 * n))))


# ---------------------------------------------------------------------------
# experiments


def _scores(b: Benchmark, flag_sets: list, cfg: ExperimentConfig) -> list[FlagScore]:
    m = cfg.noise_model()
    if cfg.exact_scoring:
        return [exact_quality(b.circuit, f, m) for f in flag_sets]
    scored, sec = scoring_view(b.circuit, m, b.section)
    es = output_error_set(scored, m, sec)
    return [score_flag(b.circuit, f, m, es) for f in flag_sets]


def _ranks(scores: list[FlagScore]) -> list[int]:
    order = sorted(range(len(scores)), key=lambda i: (scores[i].sort_key(), i))
    ranks = [0] * len(scores)
    for r, i in enumerate(order, start=1):
        ranks[i] = r
    return ranks


def _records(b: Benchmark, flag_sets: list, prefix: str, cfg: ExperimentConfig
             ) -> list[ExperimentRecord]:
    scores = _scores(b, flag_sets, cfg)
    ranks = _ranks(scores)
    grid = cfg.parameter_grid
    raw = {v: raw_fidelity(b, cfg.noise_model(v)) for v in grid}
    jobs = [(b, f, cfg.noise_model(v)) for f in flag_sets for v in grid]
    results = _run_jobs(jobs)
    rows = [
        ExperimentRecord("none", "", "", 0, 0, "", "", "", v, raw[v], raw[v], 1.0) for v in grid
    ]
    width = len(str(len(flag_sets) - 1))
    it = iter(results)
    for i, (f, s) in enumerate(zip(flag_sets, scores)):
        row = s.to_row()
        for v in grid:
            fid, surv = next(it)
            rows.append(ExperimentRecord(
                f"{prefix}{i:0{width}d}",
                row["flag_entangle"],
                row["flag_disentangle"],
                row["weight_P"],
                row["weight_Pprime"],
                row["q"],
                row["n_detected"],
                ranks[i],
                v,
                raw[v],
                fid,
                surv,
            ))
    return rows


def run_single_flag_experiment(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    b = resolve_benchmark(cfg.circuit, cfg.section, cfg.input_state)
    candidates = draw_candidates(b, cfg.n_flags, cfg.seed)
    flags = [NestedFlagSet((synthesize(b.circuit, p, b.section),)) for p in candidates]
    return _records(b, flags, "f", cfg)


def run_pair_experiment(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    b = resolve_benchmark(cfg.circuit, cfg.section, cfg.input_state)
    pairs = draw_pairs(b, cfg.n_pairs, cfg.seed, cfg.max_overlap)
    return _records(b, pairs, "p", cfg)


def rank_candidates(cfg: ExperimentConfig) -> list[FlagScore]:
    b = resolve_benchmark(cfg.circuit, cfg.section, cfg.input_state)
    candidates = draw_candidates(b, cfg.n_flags, cfg.seed)
    res = rank_flags(b.circuit, candidates, b.section, cfg.noise_model(), exact=cfg.exact_scoring)
    return res.scores


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_csv(rows: Sequence[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for r in rows:
        w.writerow([_fmt(getattr(r, k)) for k in RECORD_FIELDS])
    return buf.getvalue()


def scores_csv(scores: Sequence[FlagScore]) -> str:
    cols = ["flag_entangle", "flag_disentangle", "weight_P", "weight_Pprime", "n_detected", "q"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for s in scores:
        row = s.to_row()
        w.writerow([_fmt(row[k]) for k in cols])
    return buf.getvalue()


def summarize(rows: Sequence[ExperimentRecord], cfg: ExperimentConfig) -> dict:
    grid = cfg.parameter_grid
    per_param = {}
    for v in grid:
        flagged = [r for r in rows if r.parameter == v and r.flag_id != "none"]
        raw = next(r.fidelity_raw for r in rows if r.parameter == v)
        best = max(flagged, key=lambda r: (r.fidelity_postselected, -int(r.rank)))
        per_param[repr(v)] = {
            "fidelity_raw": raw,
            "fraction_improving": sum(r.fidelity_postselected > raw for r in flagged) / len(flagged),
            "best_flag": best.flag_id,
            "best_disentangle": best.disentangle,
            "best_fidelity_postselected": best.fidelity_postselected,
            "best_survival_probability": best.survival_probability,
            "spread": max(r.fidelity_postselected for r in flagged)
            - min(r.fidelity_postselected for r in flagged),
        }
    nonzero = [v for v in grid if v > 0]
    headline = per_param[repr(min(nonzero))] if nonzero else None
    return {"config": cfg.to_json(), "per_parameter": per_param, "best_at_smallest_nonzero": headline}


def write_outputs(prefix: str, csv_text: str, summary: dict) -> tuple[Path, Path]:
    base = Path(prefix)
    if base.parent and not base.parent.exists():
        base.parent.mkdir(parents=True)
    csv_path = base.with_name(base.name + ".csv")
    json_path = base.with_name(base.name + ".json")
    csv_path.write_text(csv_text)
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


# ---------------------------------------------------------------------------
# explain


def explain_flag(circuit: Circuit, flag: PauliString, model: NoiseModel,
                 section: tuple[int, int] | None = None) -> dict:
    """Layer trace, fault list, detected subset and the q breakdown."""
    start, stop = section if section is not None else (0, len(circuit))
    compat = check_compatibility(circuit, flag, start, stop)
    if not compat:
        return {"flag": str(flag), "section": [start, stop], "compatibility": compat.to_json()}
    trace = propagate(circuit, flag.extend(circuit.width) if flag.n < circuit.width else flag,
                      start, stop)
    gadget = synthesize(circuit, flag, (start, stop))
    scored, sec = scoring_view(circuit, model, (start, stop))
    es = output_error_set(scored, model, sec)
    moved = retarget(gadget, sec)
    score = quality(moved, es, model)
    hits = detected_faults(moved, es)
    return {
        "flag": str(flag),
        "section": [start, stop],
        "compatibility": compat.to_json(),
        "gadget": gadget.to_json(),
        "layer_trace": [str(p) for p in trace.layer_trace],
        "model": model.to_json(),
        "fault_locations": [loc.to_json() for loc in fault_locations(scored, model)],
        "detected": [e.to_json() for e in hits],
        "quality": {
            "n_detected": score.n_detected,
            "penalty_per_qubit": score.penalty,
            "weight_P": weight(gadget.entangle),
            "weight_Pprime": weight(gadget.disentangle),
            "q": score.q,
            "total_faults": es.total_weight,
            "nonpropagable": len(es.nonpropagable),
        },
    }
