"""CSV and summary emission for experiment results.

Floats are written with Python's shortest round-trip representation, so
identical runs produce byte-identical files.
"""

from __future__ import annotations

from .errors import DivergenceDetected
from .metrics import MsdTrace
from .runner import ExperimentResult


def trace_to_csv(trace: MsdTrace, *, per_node: bool = False) -> str:
    header = "iteration,msd_linear,msd_db"
    n_nodes = 0
    if per_node:
        if trace.per_node is None:
            raise ValueError("trace carries no per-node detail")
        n_nodes = trace.per_node.shape[1]
        header += "," + ",".join(f"node_{k}" for k in range(1, n_nodes + 1))
    rows = [header]
    for n in range(len(trace.linear)):
        row = f"{n},{float(trace.linear[n])!r},{float(trace.db[n])!r}"
        if per_node:
            row += "," + ",".join(repr(float(x)) for x in trace.per_node[n])
        rows.append(row)
    return "\n".join(rows) + "\n"


def summary_text(result: ExperimentResult) -> str:
    cfg = result.config
    lines = [
        "status = ok",
        f"seed = {cfg.scenario.seed}",
        f"algorithms = {', '.join(cfg.algorithm.algorithms)}",
        f"gradient = {cfg.algorithm.gradient}",
        f"iterations = {cfg.run.iterations}",
        f"monte_carlo_runs = {cfg.run.monte_carlo}",
        f"steady_state_window = {result.steady_state_window}",
        "",
    ]
    for label in cfg.algorithm.algorithms:
        lines.append(f"[{label}]")
        lines.append(f"steady_state_db = {result.steady_state_db[label]!r}")
        lines.append(
            f"transfers_per_iteration = {result.transfers_per_iteration[label]}"
        )
        lines.append("")
    return "\n".join(lines)


def divergence_summary(exc: DivergenceDetected) -> str:
    return "\n".join(
        [
            "status = diverged",
            f"algorithm = {exc.algorithm}",
            f"run = {exc.run_index}",
            f"iteration = {exc.iteration}",
            f"node = {exc.node}",
            f"detail = {exc}",
            "",
        ]
    )


def experiment_files(result: ExperimentResult) -> dict[str, str]:
    """File payloads for one finished experiment: one CSV per algorithm plus
    the summary."""
    per_node = result.config.output.per_node
    files = {
        f"msd_{label}.csv": trace_to_csv(trace, per_node=per_node)
        for label, trace in result.traces.items()
    }
    files["summary.txt"] = summary_text(result)
    return files
