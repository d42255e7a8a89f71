"""Command-line front end: compile, validate, spectrum, evaluate, bench.

Exit codes: 0 success, 2 matrix validation failure, 3 I/O or format error,
4 dense-size limit exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import flow
from .circuit import emit
from .evaluation import DenseLimitError, circuit_unitary, dense_limit, exact_evolution, fidelity
from .htt import qdrift_matrix, spectrum, validate
from .pauli import Hamiltonian, HamiltonianFormatError, load_hamiltonian, random_hamiltonian, split_dominant, stationary
from .pipeline import PRESETS, MixWeights, build_matrix, compile_sequence, prepare, summary

log = logging.getLogger("marqsim")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_SIZE = 4

RUN_SCHEMA = "marqsim-run/1"
SPECTRUM_SCHEMA = "marqsim-spectrum/1"
BENCH_SCHEMA = "marqsim-bench/1"
RUN_COLUMNS = ["seed", "N", "cx_count", "single_qubit_count", "rz_count",
               "junction_cx_predicted", "junction_cx_achieved", "fidelity", "fidelity_modulus"]
BENCH_COLUMNS = ["qubits", "strings", "seed", "terms_after_split", "rp_trials", "N",
                 "t_matrix_qd", "t_matrix_gc", "t_matrix_rp",
                 "t_circuit_baseline", "t_circuit_gc", "t_circuit_gc_rp"]


class ValidationFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    input: Path
    time: float = math.pi / 4
    epsilon: Optional[float] = None
    samples: Optional[int] = None
    weights: MixWeights = field(default_factory=MixWeights)
    rp_trials: int = 100
    rp_seed: int = 0
    seeds: list = field(default_factory=lambda: [0])
    cost_file: Optional[Path] = None
    emit_matrix: bool = False
    emit_circuit: Optional[str] = None
    out_dir: Optional[Path] = None
    allow_unverified_connectivity: bool = False
    jobs: int = 1

    def __post_init__(self):
        if (self.epsilon is None) == (self.samples is None):
            raise ValueError("give exactly one of --epsilon or --samples")
        if self.weights.qd <= 0 and not self.allow_unverified_connectivity:
            raise ValidationFailure(
                "theta_qd = 0 leaves strong connectivity unguaranteed; "
                "pass --allow-unverified-connectivity to try anyway")
        if self.rp_trials < 1:
            raise ValueError("--rp-trials must be positive")


@dataclass
class RunReport:
    records: list
    aggregate: dict
    validation: dict
    spectrum: list
    config: dict

    def to_json(self) -> str:
        return json.dumps({"schema": RUN_SCHEMA, "config": self.config, "validation": self.validation,
                           "spectrum": self.spectrum, "aggregate": self.aggregate,
                           "records": self.records}, indent=2)

    def write_csv(self, path: Path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# schema={RUN_SCHEMA}\n")
            w = csv.DictWriter(fh, fieldnames=RUN_COLUMNS, restval="")
            w.writeheader()
            for rec in self.records:
                w.writerow({k: rec.get(k, "") for k in RUN_COLUMNS})


def _build(cfg: RunConfig):
    h = load_hamiltonian(cfg.input)
    costs = None
    if cfg.cost_file is not None:
        costs = flow.load_cost_file(cfg.cost_file, len(split_dominant(h)))
    ms, matrix = build_matrix(h, cfg.weights, costs=costs, rp_trials=cfg.rp_trials, rp_seed=cfg.rp_seed)
    report = validate(matrix)
    if not report.ok:
        raise ValidationFailure(f"combined transition matrix fails validation: {report}")
    return ms, matrix, report


def _config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in d.items()}


def _run_seed(args):
    h, matrix, cfg, seed, evaluate, u_exact = args
    seq, circ = compile_sequence(h, matrix, cfg.time, seed, cfg.epsilon, cfg.samples)
    rec = {"seed": seed, "N": seq.N, **circ.stats}
    if evaluate:
        fid = fidelity(circuit_unitary(circ), u_exact)
        rec["fidelity"] = fid.fidelity
        rec["fidelity_modulus"] = fid.modulus
    text = emit(circ, cfg.emit_circuit) if cfg.emit_circuit else None
    return rec, text


def _run(cfg: RunConfig, evaluate: bool) -> RunReport:
    ms, matrix, report = _build(cfg)
    h = ms.hamiltonian
    u_exact = None
    if evaluate:
        if h.qubit_count > dense_limit():
            raise DenseLimitError(f"{h.qubit_count} qubits exceeds the dense evaluation limit of {dense_limit()}"
                                  " (set MARQSIM_DENSE_LIMIT to raise it)")
        u_exact = exact_evolution(h, cfg.time)
    jobs = [(h, matrix, cfg, s, evaluate, u_exact) for s in cfg.seeds]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            results = list(pool.map(_run_seed, jobs))
    else:
        results = [_run_seed(j) for j in jobs]

    out = cfg.out_dir
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        if cfg.emit_matrix:
            (out / "matrix.json").write_text(matrix.to_json())
        if cfg.emit_circuit:
            ext = "json" if cfg.emit_circuit == "json" else "qasm"
            for (rec, text) in results:
                (out / f"circuit_seed{rec['seed']}.{ext}").write_text(text)

    records = [rec for rec, _ in results]
    agg = {k: summary([r[k] for r in records]) for k in ("N", "cx_count", "single_qubit_count")}
    if evaluate:
        agg["fidelity"] = summary([r["fidelity"] for r in records])
    rep = RunReport(
        records=records,
        aggregate=agg,
        validation={**asdict(report), "ok": report.ok},
        spectrum=spectrum(matrix).eigenvalue_moduli.tolist(),
        config=_config_dict(cfg),
    )
    if out is not None:
        (out / "report.json").write_text(rep.to_json())
        rep.write_csv(out / "report.csv")
    return rep


def cmd_compile(cfg: RunConfig) -> RunReport:
    return _run(cfg, evaluate=False)


def cmd_evaluate(cfg: RunConfig) -> RunReport:
    return _run(cfg, evaluate=True)


def cmd_validate(cfg: RunConfig) -> dict:
    h = load_hamiltonian(cfg.input)
    ms, matrix = build_matrix(h, cfg.weights, rp_trials=cfg.rp_trials, rp_seed=cfg.rp_seed)
    report = validate(matrix)
    if cfg.out_dir is not None and cfg.emit_matrix:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        (cfg.out_dir / "matrix.json").write_text(matrix.to_json())
    return {**asdict(report), "ok": report.ok, "terms": matrix.n}


def cmd_spectrum(h: Hamiltonian, labels: list[str], weights: list[MixWeights],
                 rp_trials: int = 100, rp_seed: int = 0) -> tuple[list[str], np.ndarray]:
    """Sorted eigenvalue moduli, one column per mixing configuration."""
    if all(w.qd == 1.0 for w in weights):
        # qDrift alone needs no splitting; keeps n = 1 inputs at one eigenvalue
        m = qdrift_matrix(stationary(h))
        return labels, np.column_stack([spectrum(m).eigenvalue_moduli for _ in weights])
    ms = prepare(h, need_gc=any(w.gc > 0 for w in weights), need_rp=any(w.rp > 0 for w in weights),
                 rp_trials=rp_trials, rp_seed=rp_seed)
    cols = [spectrum(ms.mix(w)).eigenvalue_moduli for w in weights]
    return labels, np.column_stack(cols)


def write_spectrum_csv(path_or_fh, labels, table):
    fh = open(path_or_fh, "w", newline="") if not hasattr(path_or_fh, "write") else path_or_fh
    try:
        fh.write(f"# schema={SPECTRUM_SCHEMA}\n")
        w = csv.writer(fh)
        w.writerow(["rank"] + list(labels))
        for k, row in enumerate(table, start=1):
            w.writerow([k] + [repr(float(v)) for v in row])
    finally:
        if fh is not path_or_fh:
            fh.close()


def cmd_bench(qubits: int, strings: int, seed: int = 0, rp_trials: int = 100,
              t: float = math.pi / 4, epsilon: float = 0.05) -> dict:
    """Time matrix generation and circuit generation separately on a random Hamiltonian."""
    if qubits < 1 or strings < 1:
        raise ValueError("qubits and strings must be positive")
    h = random_hamiltonian(qubits, strings, np.random.default_rng(seed))
    ms = prepare(h, need_gc=True, need_rp=True, rp_trials=rp_trials, rp_seed=seed)
    row = {"qubits": qubits, "strings": strings, "seed": seed, "terms_after_split": len(ms.hamiltonian),
           "rp_trials": rp_trials,
           "t_matrix_qd": ms.timings["qd"], "t_matrix_gc": ms.timings["gc"], "t_matrix_rp": ms.timings["rp"]}
    for name in PRESETS:
        matrix = ms.mix(MixWeights.preset(name))
        t0 = time.perf_counter()
        seq, _ = compile_sequence(ms.hamiltonian, matrix, t, seed, epsilon=epsilon)
        row[f"t_circuit_{name.replace('-', '_')}"] = time.perf_counter() - t0
        row["N"] = seq.N
    return row


def write_bench_csv(path_or_fh, rows):
    fh = open(path_or_fh, "w", newline="") if not hasattr(path_or_fh, "write") else path_or_fh
    try:
        fh.write(f"# schema={BENCH_SCHEMA}\n")
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow(r)
    finally:
        if fh is not path_or_fh:
            fh.close()


# ------------------------------------------------------------------ argparse

def _parse_seeds(text: str) -> list[int]:
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed list")
    return seeds


def _weights(args) -> MixWeights:
    if args.preset:
        return MixWeights.preset(args.preset)
    if args.theta_qd is None and args.theta_gc is None and args.theta_rp is None:
        return MixWeights.preset("baseline")
    return MixWeights(args.theta_qd or 0.0, args.theta_gc or 0.0, args.theta_rp or 0.0)


def _add_run_args(p: argparse.ArgumentParser, needs_budget: bool = True):
    p.add_argument("--input", "-i", type=Path, required=True, help=".ham Hamiltonian file")
    p.add_argument("--time", "-t", type=float, default=math.pi / 4, help="evolution time (default pi/4)")
    if needs_budget:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--epsilon", type=float, help="target precision; N = ceil(2 lambda^2 t^2 / epsilon)")
        g.add_argument("--samples", "-N", type=int, help="explicit number of sampling steps")
    mix = p.add_mutually_exclusive_group()
    mix.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--theta-qd", type=float)
    p.add_argument("--theta-gc", type=float)
    p.add_argument("--theta-rp", type=float)
    p.add_argument("--rp-trials", type=int, default=100)
    p.add_argument("--rp-seed", type=int, default=0)
    p.add_argument("--seeds", type=_parse_seeds, default=[0], help="e.g. 0,1,2 or 0-19")
    p.add_argument("--cost-file", type=Path, help="CSV n x n junction cost override (after term splitting)")
    p.add_argument("--emit-matrix", action="store_true", help="write matrix.json to --out-dir")
    p.add_argument("--emit-circuit", choices=["qasm", "json"])
    p.add_argument("--out-dir", type=Path)
    p.add_argument("--allow-unverified-connectivity", action="store_true")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for independent seeds")


def _config(args) -> RunConfig:
    if args.preset and any(v is not None for v in (args.theta_qd, args.theta_gc, args.theta_rp)):
        raise ValueError("--preset and --theta-* are mutually exclusive")
    eps = getattr(args, "epsilon", None)
    samples = getattr(args, "samples", None)
    if eps is None and samples is None:
        eps = 0.05
    return RunConfig(
        input=args.input, time=args.time, epsilon=eps, samples=samples, weights=_weights(args),
        rp_trials=args.rp_trials, rp_seed=args.rp_seed, seeds=args.seeds, cost_file=args.cost_file,
        emit_matrix=args.emit_matrix, emit_circuit=args.emit_circuit, out_dir=args.out_dir,
        allow_unverified_connectivity=args.allow_unverified_connectivity, jobs=args.jobs,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="marqsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_args(sub.add_parser("compile", help="sample and assemble circuits"))
    _add_run_args(sub.add_parser("evaluate", help="compile and measure fidelity against exp(iHt)"))
    _add_run_args(sub.add_parser("validate", help="check the combined matrix"), needs_budget=False)

    sp = sub.add_parser("spectrum", help="eigenvalue moduli of preset matrices")
    sp.add_argument("--input", "-i", type=Path, required=True)
    sp.add_argument("--presets", default="baseline,gc,gc-rp")
    sp.add_argument("--rp-trials", type=int, default=100)
    sp.add_argument("--rp-seed", type=int, default=0)
    sp.add_argument("--out", type=Path, help="CSV path (default stdout)")

    bp = sub.add_parser("bench", help="time matrix and circuit generation on a random Hamiltonian")
    bp.add_argument("--qubits", type=int, nargs="+", default=[10])
    bp.add_argument("--strings", type=int, nargs="+", default=[100])
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--rp-trials", type=int, default=100)
    bp.add_argument("--out", type=Path, help="CSV path (default stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in ("compile", "evaluate"):
            cfg = _config(args)
            rep = (cmd_evaluate if args.command == "evaluate" else cmd_compile)(cfg)
            if cfg.out_dir is None:
                print(rep.to_json())
            else:
                print(json.dumps(rep.aggregate, indent=2))
        elif args.command == "validate":
            cfg = _config(args)
            result = cmd_validate(cfg)
            print(json.dumps(result, indent=2))
            if not result["ok"]:
                return EXIT_VALIDATION
        elif args.command == "spectrum":
            labels = [s.strip() for s in args.presets.split(",") if s.strip()]
            weights = [MixWeights.preset(s) for s in labels]
            h = load_hamiltonian(args.input)
            labels, table = cmd_spectrum(h, labels, weights, args.rp_trials, args.rp_seed)
            write_spectrum_csv(args.out if args.out else sys.stdout, labels, table)
        elif args.command == "bench":
            rows = [cmd_bench(q, s, args.seed, args.rp_trials) for q in args.qubits for s in args.strings]
            write_bench_csv(args.out if args.out else sys.stdout, rows)
    except ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DenseLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (OSError, HamiltonianFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except flow.FlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
